"""Rate reports and their CSV form."""

from __future__ import annotations

import contextlib
import csv
import io
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

__all__ = ["RateRow", "RateReport", "CSV_COLUMNS", "fmt", "open_out"]

CSV_COLUMNS = ("delta", "alpha", "residual", "error", "chi_norm", "bound", "regime")


def fmt(x) -> str:
    """Full-precision scientific notation; empty for missing values."""
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        return "nan"
    return f"{x:.16e}"


@contextlib.contextmanager
def open_out(path: str | Path | None):
    """Text handle for ``path``, or stdout when ``path`` is ``None``."""
    if path is None:
        yield sys.stdout
        return
    with open(path, "w", newline="", encoding="utf-8") as fh:
        yield fh


@dataclass(frozen=True)
class RateRow:
    """One noise level.

    ``chi_norm`` is ``||f - f_alpha||_chi`` when a ``chi`` is known.
    ``regime`` tags the bound in use; ``failure`` holds the message of an
    aborted row (numbers are then NaN).  ``degenerate`` marks a discrepancy
    row with ``||g_delta|| <= C_dis delta``, where no alpha attains equality.
    """

    delta: float
    alpha: float
    residual: float
    error: float
    chi_norm: float | None = None
    bound: float | None = None
    regime: str = ""
    noise_norm: float | None = None
    failure: str | None = None
    degenerate: bool = False

    @property
    def dominated(self) -> bool | None:
        """``error <= bound``; ``None`` without a bound."""
        if self.bound is None or self.failure is not None:
            return None
        return self.error <= self.bound

    def csv_fields(self) -> list[str]:
        return [fmt(self.delta), fmt(self.alpha), fmt(self.residual), fmt(self.error),
                fmt(self.chi_norm), fmt(self.bound), self.regime]


@dataclass
class RateReport:
    """Rows of one experiment plus the fitted convergence exponent.

    ``passed`` is ``None`` when no claim is checked (no theory slope and no
    extra checks).
    """

    name: str
    rows: list[RateRow]
    slope: float | None = None
    fit_residual: float | None = None
    theory_slope: float | None = None
    tolerance: float = 0.1
    trimmed: int = 0
    checks: dict[str, bool] = field(default_factory=dict)
    meta: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.rows = sorted(self.rows, key=lambda r: -r.delta)

    @property
    def slope_ok(self) -> bool | None:
        if self.theory_slope is None or self.slope is None:
            return None
        return abs(self.slope - self.theory_slope) <= self.tolerance

    @property
    def passed(self) -> bool | None:
        verdicts = [v for v in [self.slope_ok, *self.checks.values()] if v is not None]
        if not verdicts:
            return None
        return all(verdicts)

    @property
    def failures(self) -> list[RateRow]:
        return [r for r in self.rows if r.failure is not None]

    def write_csv(self, target) -> None:
        """Header plus one line per row, to a path or an open text file."""
        if isinstance(target, (str, Path)):
            with open(target, "w", newline="", encoding="utf-8") as fh:
                self._emit(fh)
        else:
            self._emit(target)

    def to_csv(self) -> str:
        buf = io.StringIO()
        self._emit(buf)
        return buf.getvalue()

    def _emit(self, fh) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            w.writerow(r.csv_fields())

    def summary(self) -> str:
        parts = [self.name]
        if self.slope is not None:
            parts.append(f"slope={self.slope:.4f} (rms {self.fit_residual:.2e})")
        if self.theory_slope is not None:
            parts.append(f"theory={self.theory_slope:.4f} tol={self.tolerance:g}")
        elif self.meta.get("no_theory"):
            parts.append("no theory slope")
        if self.trimmed:
            parts.append(f"trimmed={self.trimmed}")
        for k, v in self.checks.items():
            parts.append(f"{k}={'ok' if v else 'FAIL'}")
        if self.failures:
            parts.append(f"aborted_rows={len(self.failures)}")
        verdict = {True: "PASS", False: "FAIL", None: "INFO"}[self.passed]
        return f"{verdict} " + " ".join(parts)
