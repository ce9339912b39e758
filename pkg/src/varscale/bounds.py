"""Interpolation-inequality error bounds and modulus-of-continuity bounds.

Bounds require a concave ``Psi``.  By default a failed precondition raises
:class:`PreconditionError`; with ``strict=False`` the value is still
returned and :class:`UnverifiedBoundWarning` is emitted.
"""

from __future__ import annotations

import csv
import itertools
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from .exceptions import PreconditionError, SpectrumError
from .indexfn import (
    Compose,
    IndexFn,
    Power,
    psi_bar_from_Psi,
    support_grid,
    theta_inverse,
    verify_props,
)
from .operators import DiagonalOperator, eval_clipped

__all__ = [
    "BoundInputs",
    "UnverifiedBoundWarning",
    "concavity_verified",
    "error_bound",
    "bound_monotonicity",
    "specialized_bound",
    "modulus_bound_direct",
    "modulus_bound_nested",
    "nested_composite",
    "CoincidenceReport",
    "check_coincidence",
    "modulus_brute_force",
    "RateCurve",
    "rate_curve",
    "InterpolationReport",
    "interpolation_check",
]


class UnverifiedBoundWarning(UserWarning):
    """A bound was computed although its sampled precondition failed."""


@dataclass(frozen=True)
class BoundInputs:
    """Positive scalars entering the bounds."""

    epsilon: float
    zeta: float
    R: float
    delta: float
    K_bar: float

    def __post_init__(self):
        for name in ("epsilon", "zeta", "R", "delta", "K_bar"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ValueError(f"{name} must be positive and finite, got {v!r}")


@lru_cache(maxsize=256)
def _props(psi: IndexFn):
    return verify_props(psi)


def concavity_verified(psi: IndexFn) -> bool:
    """``Psi`` verified concave and increasing on the default grid."""
    p = _props(psi)
    return p.concave.ok and p.monotone_increasing.ok


def _gate(ok: bool, what: str, strict: bool) -> bool:
    if ok:
        return True
    if strict:
        raise PreconditionError(what)
    warnings.warn(what, UnverifiedBoundWarning, stacklevel=3)
    return False


def _positive(**kw) -> None:
    for k, v in kw.items():
        if not np.all(np.asarray(v) > 0):
            raise ValueError(f"{k} must be positive")


def _out(x):
    x = np.asarray(x, dtype=float)
    return float(x) if x.ndim == 0 else x


def error_bound(psi: IndexFn, epsilon, zeta, *, strict: bool = True):
    """``epsilon * sqrt(Psi(zeta**2 / epsilon**2))``.

    Examples
    --------
    >>> error_bound(Power(0.5), 0.01, 1.0)
    0.1
    """
    _positive(epsilon=epsilon, zeta=zeta)
    _gate(concavity_verified(psi), f"{psi} is not verified concave", strict)
    e = np.asarray(epsilon, dtype=float)
    z = np.asarray(zeta, dtype=float)
    return _out(e * np.sqrt(eval_clipped(psi, (z / e) ** 2)))


def bound_monotonicity(psi: IndexFn, eps_grid, zeta_grid) -> tuple[bool, bool]:
    """Whether ``error_bound`` is non-decreasing in ``epsilon`` and in ``zeta``."""
    e = np.asarray(eps_grid, dtype=float)[:, None]
    z = np.asarray(zeta_grid, dtype=float)[None, :]
    b = e * np.sqrt(eval_clipped(psi, (z / e) ** 2))
    tol = 1e-12 * np.abs(b)
    in_eps = bool(np.all(np.diff(b, axis=0) >= -tol[1:, :]))
    in_zeta = bool(np.all(np.diff(b, axis=1) >= -tol[:, 1:]))
    return in_eps, in_zeta


def specialized_bound(kind: str, norm_theta, norm_psitheta, kappa: float | None = None):
    """Closed-form interpolation bounds.

    Parameters
    ----------
    kind : {"power", "over_log", "log"}
    norm_theta, norm_psitheta : float
        ``epsilon`` and ``zeta``.
    kappa : float
        Exponent, required for ``kind="power"``.

    Raises
    ------
    ValueError
        For the logarithmic kinds when ``norm_psitheta <= norm_theta``.
    """
    e = np.asarray(norm_theta, dtype=float)
    z = np.asarray(norm_psitheta, dtype=float)
    _positive(norm_theta=e, norm_psitheta=z)
    if kind == "power":
        if kappa is None or not 0 <= kappa <= 1:
            raise ValueError("power kind needs 0 <= kappa <= 1")
        return _out(e ** (1.0 - kappa) * z**kappa)
    if kind not in ("over_log", "log"):
        raise ValueError(f"unknown kind {kind!r}")
    if np.any(z <= e):
        raise ValueError("logarithmic bounds need norm_psitheta > norm_theta")
    two_log = 2.0 * np.log(z / e)
    if kind == "over_log":
        return _out(z / np.sqrt(two_log))
    return _out(e * np.sqrt(two_log))


def modulus_bound_direct(psi: IndexFn, R, delta, *, strict: bool = True):
    """``delta * sqrt(Psi(R**2 / delta**2))``."""
    _positive(R=R, delta=delta)
    p = _props(psi)
    _gate(
        p.concave.ok and p.strictly_increasing.ok,
        f"{psi} is not verified concave and strictly increasing",
        strict,
    )
    d = np.asarray(delta, dtype=float)
    r = np.asarray(R, dtype=float)
    return _out(d * np.sqrt(eval_clipped(psi, (r / d) ** 2)))


def nested_composite(psi_bar: IndexFn) -> IndexFn:
    """``s -> psi_bar(Theta^{-1}(sqrt(s)))**2``."""
    return Compose(Power(2.0), Compose(psi_bar, Compose(theta_inverse(psi_bar), Power(0.5))))


@lru_cache(maxsize=256)
def _nested_parts(psi_bar: IndexFn):
    ti = theta_inverse(psi_bar)
    comp = nested_composite(psi_bar)
    ok = verify_props(comp, support_grid(comp)).concave.ok
    return ti, ok


def modulus_bound_nested(psi_bar: IndexFn, R, delta, *, strict: bool = True):
    """``R * psi_bar(Theta^{-1}(delta / R))`` with ``Theta(t) = sqrt(t) psi_bar(t)``."""
    _positive(R=R, delta=delta)
    ti, ok = _nested_parts(psi_bar)
    _gate(ok, f"composite of {psi_bar} is not verified concave", strict)
    r = np.asarray(R, dtype=float)
    d = np.asarray(delta, dtype=float)
    return _out(r * np.asarray(psi_bar(ti(d / r))))


@dataclass(frozen=True)
class CoincidenceReport:
    """Both modulus bounds over a grid of ``delta`` values for fixed ``R``."""

    R: float
    deltas: np.ndarray
    direct: np.ndarray
    nested: np.ndarray
    rel_dev: np.ndarray

    @property
    def ratios(self) -> np.ndarray:
        return self.deltas / self.R

    @property
    def max_dev(self) -> float:
        return float(np.max(self.rel_dev))

    def write_csv(self, path_or_file) -> None:
        rows = zip(self.deltas, self.direct, self.nested, self.rel_dev)
        _write_rows(path_or_file, ["delta", "bound_direct", "bound_nested", "rel_dev"], rows)


def _write_rows(target, header, rows) -> None:
    if hasattr(target, "write"):
        _emit(target, header, rows)
    else:
        with Path(target).open("w", newline="") as fh:
            _emit(fh, header, rows)


def _emit(fh, header, rows) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([format(float(v), ".16e") for v in r])


def check_coincidence(psi: IndexFn, R: float, deltas, *, strict: bool = True) -> CoincidenceReport:
    """Evaluate both modulus bounds; ``psi_bar`` is derived from ``Psi``."""
    d = np.asarray(deltas, dtype=float)
    direct = np.asarray(modulus_bound_direct(psi, R, d, strict=strict), dtype=float)
    nested = np.asarray(modulus_bound_nested(psi_bar_from_Psi(psi), R, d, strict=strict), dtype=float)
    dev = np.abs(direct - nested) / np.abs(direct)
    return CoincidenceReport(float(R), d, np.atleast_1d(direct), np.atleast_1d(nested), np.atleast_1d(dev))


def modulus_brute_force(A: DiagonalOperator, chi, R: float, delta: float, *, mix: int = 10_000) -> float:
    """``sup ||x||`` subject to ``||x||_chi <= R`` and ``||Ax|| <= delta``.

    With ``y = x**2`` this is a linear program whose optimum has at most two
    nonzero coordinates, so every single coordinate and every pair is
    scanned (``mix`` mixing weights plus the exact vertex).

    Raises
    ------
    SpectrumError
        For non-diagonal operators, more than 8 values or repeated values.
    """
    if not isinstance(A, DiagonalOperator):
        raise SpectrumError("brute-force modulus needs a diagonal operator")
    s = A.sigma
    if s.size > 8:
        raise SpectrumError("brute-force modulus supports n <= 8")
    if np.any(np.diff(s) == 0):
        raise SpectrumError("singular values must be distinct")
    _positive(R=R, delta=delta)
    b = s**2
    a = np.asarray(eval_clipped(chi, 1.0 / b), dtype=float) if isinstance(chi, IndexFn) else np.asarray(chi(1.0 / b), dtype=float)
    R2, d2 = float(R) ** 2, float(delta) ** 2
    best = float(np.max(np.minimum(R2 / a, d2 / b)))
    p = np.linspace(0.0, 1.0, mix)
    for i, j in itertools.combinations(range(s.size), 2):
        wa = p * a[i] + (1 - p) * a[j]
        wb = p * b[i] + (1 - p) * b[j]
        best = max(best, float(np.max(np.minimum(R2 / wa, d2 / wb))))
        det = a[i] * b[j] - a[j] * b[i]
        if det != 0 and np.isfinite(det):
            yi = (R2 * b[j] - d2 * a[j]) / det
            yj = (d2 * a[i] - R2 * b[i]) / det
            if yi >= 0 and yj >= 0:
                best = max(best, yi + yj)
    return math.sqrt(best)


@dataclass(frozen=True)
class RateCurve:
    """Tabulated ``delta * sqrt(Psi(K_bar / delta**2))``."""

    deltas: np.ndarray
    bounds: np.ndarray
    monotone: bool
    decays: bool

    def __iter__(self):
        return iter(zip(self.deltas.tolist(), self.bounds.tolist()))

    def __len__(self):
        return self.deltas.size

    def write_csv(self, path_or_file) -> None:
        _write_rows(path_or_file, ["delta", "bound"], zip(self.deltas, self.bounds))


def rate_curve(psi: IndexFn, K_bar: float, deltas, *, strict: bool = True) -> RateCurve:
    """Rate bound over a ``delta`` grid.

    ``monotone`` reports that the bound decreases with ``delta``;
    ``decays`` that ``Psi`` passes the sublinearity surrogate, so the bound
    tends to 0.
    """
    _positive(K_bar=K_bar)
    d = np.atleast_1d(np.asarray(deltas, dtype=float))
    _positive(deltas=d)
    _gate(concavity_verified(psi), f"{psi} is not verified concave", strict)
    b = d * np.sqrt(eval_clipped(psi, K_bar / d**2))
    order = np.argsort(d)
    bs = b[order]
    monotone = bool(np.all(np.diff(bs) >= -1e-12 * np.abs(bs[1:])))
    return RateCurve(d, b, monotone, _props(psi).sublinear.ok)


@dataclass(frozen=True)
class InterpolationReport:
    """Outcome of the sampled interpolation inequality."""

    n_samples: int
    violations: int
    max_ratio: float
    worst_index: int | None


def interpolation_check(A: DiagonalOperator, psi: IndexFn, chi, samples, *, slack: float = 1e-10) -> InterpolationReport:
    """Count samples with ``||f||**2 > ||Af||**2 Psi(||f||_chi**2 / ||Af||**2) (1 + slack)``.

    ``samples`` has one element per row.  Rows with infinite ``chi``-norm
    satisfy the inequality trivially.
    """
    F = np.atleast_2d(np.asarray(samples, dtype=float))
    if F.shape[1] != A.size:
        raise ValueError("sample length does not match the operator")
    w = A.chi_weights(chi)
    f2 = np.sum(F**2, axis=1)
    af2 = np.sum(A.gram * F**2, axis=1)
    with np.errstate(invalid="ignore", over="ignore"):
        c2 = np.sum(np.where(F != 0, w * F**2, 0.0), axis=1)
        rhs = af2 * eval_clipped(psi, c2 / af2)
    ratio = f2 / rhs
    bad = ratio > 1.0 + slack
    worst = int(np.argmax(ratio)) if ratio.size else None
    return InterpolationReport(F.shape[0], int(np.sum(bad)), float(np.max(ratio)), worst)
