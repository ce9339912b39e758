"""Sampled verification of analytic properties of index functions.

Limits and concavity cannot be proven by finite sampling.  The checks here
are deterministic grid surrogates: a ``REFUTED`` verdict always carries a
concrete witness, and inconclusive samples give ``UNKNOWN``.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .expr import IndexFn

__all__ = [
    "Verdict",
    "FnProps",
    "GridWarning",
    "default_grid",
    "check_grid",
    "verify_props",
    "monotone_verdict",
    "concavity_verdict",
    "concave_by_divided_differences",
    "CHORD_RTOL",
]

DEFAULT_LO, DEFAULT_HI, DEFAULT_N = 1e-8, 1e8, 256
MIN_POINTS, MIN_DECADES = 64, 6.0
CHORD_RTOL = 1e-10
MONO_RTOL = 1e-12
SLOPE_MIN = 0.05
SLOPE_SUBLINEAR = 0.95
SMALL_RATIO = 1e-6
FLAT_SLOPE = 1e-3


class Verdict(enum.Enum):
    """Ternary outcome of a sampled check."""

    VERIFIED = "verified"
    REFUTED = "refuted"
    UNKNOWN = "unknown"

    @property
    def ok(self) -> bool:
        return self is Verdict.VERIFIED

    def __and__(self, other: "Verdict") -> "Verdict":
        if Verdict.REFUTED in (self, other):
            return Verdict.REFUTED
        if Verdict.UNKNOWN in (self, other):
            return Verdict.UNKNOWN
        return Verdict.VERIFIED


class GridWarning(UserWarning):
    """Sample grid narrower than recommended."""


@dataclass(frozen=True)
class FnProps:
    """Sampled properties of an index function.

    Attributes
    ----------
    positive, monotone_increasing, strictly_increasing, concave : Verdict
        ``concave`` refers to the whole grid.
    concave_on : tuple or None
        ``(lam0, inf)`` where the samples from ``lam0`` upward are concave
        and increasing.
    is_rate_function : Verdict
        Increasing with limit 0 at 0.
    limit_at_zero : float or None
        0.0 when the limit-0 surrogate passes, the smallest sample when the
        low end is flat, otherwise ``None``.
    tends_to_infinity, sublinear : Verdict
        Surrogates for ``f -> inf`` and ``f(lam)/lam -> 0`` at infinity.
    witnesses : dict
        Grid points demonstrating each refuted property.
    """

    positive: Verdict
    monotone_increasing: Verdict
    strictly_increasing: Verdict
    concave: Verdict
    concave_on: tuple[float, float] | None
    is_rate_function: Verdict
    limit_at_zero: float | None
    tends_to_infinity: Verdict
    sublinear: Verdict
    witnesses: dict = field(default_factory=dict, compare=False)
    grid: np.ndarray = field(default=None, compare=False, repr=False)


def default_grid(lo: float = DEFAULT_LO, hi: float = DEFAULT_HI, n: int = DEFAULT_N) -> np.ndarray:
    """Geometric sample grid, by default 256 points over [1e-8, 1e8]."""
    return np.geomspace(lo, hi, n)


def check_grid(grid) -> np.ndarray:
    """Validate a verification grid: positive, increasing, >= 64 points."""
    g = np.asarray(grid, dtype=float)
    if g.ndim != 1 or g.size < MIN_POINTS:
        raise ValueError(f"verification grid needs at least {MIN_POINTS} points")
    if not (np.all(g > 0) and np.all(np.diff(g) > 0)):
        raise ValueError("verification grid must be positive and strictly increasing")
    if math.log10(g[-1] / g[0]) < MIN_DECADES - 1e-9:
        warnings.warn(
            f"grid spans fewer than {MIN_DECADES:g} decades; verdicts are less reliable",
            GridWarning,
            stacklevel=3,
        )
    return g


def monotone_verdict(x: np.ndarray, v: np.ndarray, *, strict: bool = False):
    """Pairwise monotonicity on samples; returns ``(verdict, witness)``."""
    fin = np.isfinite(v[:-1]) & np.isfinite(v[1:])
    a, b = v[:-1], v[1:]
    scale = np.maximum(np.abs(a), np.abs(b))
    with np.errstate(invalid="ignore"):
        if strict:
            bad = fin & ~(b > a)
        else:
            bad = fin & (b < a - MONO_RTOL * scale)
    if np.any(bad):
        i = int(np.argmax(bad))
        return Verdict.REFUTED, (float(x[i]), float(x[i + 1]))
    # inf following finite values is still increasing
    posinf_tail = np.isposinf(b) & np.isfinite(a)
    if np.all(fin | posinf_tail | (np.isposinf(a) & np.isposinf(b))):
        return Verdict.VERIFIED, None
    return Verdict.UNKNOWN, None


def _chord_violations(x: np.ndarray, v: np.ndarray):
    """Per-triple concavity test; returns (violation mask, finite mask)."""
    xa, xb, xc = x[:-2], x[1:-1], x[2:]
    va, vb, vc = v[:-2], v[1:-1], v[2:]
    fin = np.isfinite(va) & np.isfinite(vb) & np.isfinite(vc)
    with np.errstate(invalid="ignore", over="ignore"):
        chord = va + (vc - va) * ((xb - xa) / (xc - xa))
        scale = np.maximum(np.maximum(np.abs(va), np.abs(vb)), np.abs(vc))
        bad = fin & (vb < chord - CHORD_RTOL * scale)
    return bad, fin


def concavity_verdict(x: np.ndarray, v: np.ndarray):
    """Concavity on the whole sample by chord tests on consecutive triples.

    Returns ``(verdict, witness, lam0)`` where ``lam0`` is the start of the
    largest concave upper tail, or ``None`` if no tail qualifies.
    """
    bad, fin = _chord_violations(x, v)
    if np.any(bad):
        i = int(np.argmax(bad))
        witness = (float(x[i]), float(x[i + 1]), float(x[i + 2]))
        last = int(np.flatnonzero(bad)[-1])
        start = last + 1
        verdict = Verdict.REFUTED
    else:
        witness = None
        start = 0
        verdict = Verdict.VERIFIED if np.all(fin) else Verdict.UNKNOWN
    tail_ok = x.size - start >= 3 and np.all(fin[start:])
    lam0 = float(x[start]) if tail_ok else None
    return verdict, witness, lam0


def concave_by_divided_differences(f: IndexFn, grid=None) -> Verdict:
    """Concavity through divided differences.

    For every base point ``s0`` the quotients ``(f(s) - f(s0)) / (s - s0)``,
    ``s > s0``, must be non-increasing in ``s``.
    """
    x = check_grid(default_grid() if grid is None else grid)
    v = np.asarray(f(x), dtype=float)
    if not np.all(np.isfinite(v)):
        return Verdict.UNKNOWN
    dx = x[None, :] - x[:, None]
    dv = v[None, :] - v[:, None]
    iu = np.triu(np.ones_like(dx, dtype=bool), k=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.where(iu, dv / np.where(iu, dx, 1.0), np.nan)
    q0, q1 = q[:, :-1], q[:, 1:]
    vmax = np.maximum(np.abs(v)[:, None], np.abs(v)[None, 1:])
    noise = CHORD_RTOL * (vmax + np.abs(v)[None, :-1]) / np.where(iu[:, 1:], dx[:, 1:], 1.0)
    with np.errstate(invalid="ignore"):
        valid = np.isfinite(q0) & np.isfinite(q1)
        rise = valid & (q1 > q0 + noise + CHORD_RTOL * (np.abs(q0) + np.abs(q1)))
    return Verdict.REFUTED if np.any(rise) else Verdict.VERIFIED


def _log_slope(x: np.ndarray, v: np.ndarray, i: int, j: int) -> float:
    if not (v[i] > 0 and v[j] > 0 and np.isfinite(v[i]) and np.isfinite(v[j])):
        return math.nan
    return math.log(v[j] / v[i]) / math.log(x[j] / x[i])


def _limit_zero(f: IndexFn, x, v, witnesses) -> tuple[Verdict, float | None]:
    v3 = v[:3]
    if not np.all(np.isfinite(v3) & (v3 > 0)):
        return Verdict.UNKNOWN, None
    q = max(x.size // 4, 3)
    slope = _log_slope(x, v, 0, q)
    if not (v3[0] < v3[1] < v3[2]):
        if math.isfinite(slope) and abs(slope) < FLAT_SLOPE:
            witnesses["limit_at_zero"] = (float(x[0]), float(x[1]), float(x[2]))
            return Verdict.REFUTED, float(v3[0])
        return Verdict.UNKNOWN, None
    try:
        f1 = float(f(1.0))
    except Exception:
        f1 = math.nan
    small = math.isfinite(f1) and v3[0] < SMALL_RATIO * f1
    if small or (math.isfinite(slope) and slope >= SLOPE_MIN):
        return Verdict.VERIFIED, 0.0
    if math.isfinite(slope) and slope < FLAT_SLOPE:
        witnesses["limit_at_zero"] = (float(x[0]), float(x[q]))
        return Verdict.REFUTED, float(v3[0])
    return Verdict.UNKNOWN, None


def _high_end(x, v, witnesses) -> tuple[Verdict, Verdict]:
    n = x.size
    i = n - 1 - max(n // 4, 3)
    slope = _log_slope(x, v, i, n - 1)
    if not math.isfinite(slope):
        return Verdict.UNKNOWN, Verdict.UNKNOWN
    if slope >= SLOPE_MIN:
        infinity = Verdict.VERIFIED
    elif slope < FLAT_SLOPE:
        infinity = Verdict.REFUTED
        witnesses["tends_to_infinity"] = (float(x[i]), float(x[-1]))
    else:
        infinity = Verdict.UNKNOWN
    if slope <= SLOPE_SUBLINEAR:
        sub = Verdict.VERIFIED
    elif slope >= 1.0 - 1e-9:
        sub = Verdict.REFUTED
        witnesses["sublinear"] = (float(x[i]), float(x[-1]))
    else:
        sub = Verdict.UNKNOWN
    return infinity, sub


def verify_props(f: IndexFn, grid=None) -> FnProps:
    """Check positivity, monotonicity, concavity and the rate property.

    Parameters
    ----------
    f : IndexFn
    grid : array_like, optional
        Increasing positive sample points; default 256 geometric points over
        [1e-8, 1e8].

    Returns
    -------
    FnProps
    """
    x = check_grid(default_grid() if grid is None else grid)
    witnesses: dict = {}
    try:
        v = np.asarray(f(x), dtype=float)
    except Exception as exc:  # evaluation failure is inconclusive
        witnesses["evaluation"] = (repr(exc),)
        u = Verdict.UNKNOWN
        return FnProps(u, u, u, u, None, u, None, u, u, witnesses, x)

    fin = np.isfinite(v)
    if np.any(fin & ~(v > 0)):
        i = int(np.argmax(fin & ~(v > 0)))
        positive = Verdict.REFUTED
        witnesses["positive"] = (float(x[i]),)
    else:
        positive = Verdict.VERIFIED if np.all(fin) else Verdict.UNKNOWN

    mono, w = monotone_verdict(x, v)
    if w:
        witnesses["monotone_increasing"] = w
    strict, w = monotone_verdict(x, v, strict=True)
    if w:
        witnesses["strictly_increasing"] = w

    concave, w, lam0 = concavity_verdict(x, v)
    if w:
        witnesses["concave"] = w
    concave_on = None
    if lam0 is not None:
        k = int(np.searchsorted(x, lam0))
        tail_mono, _ = monotone_verdict(x[k:], v[k:])
        if tail_mono.ok:
            concave_on = (lam0, math.inf)
        elif concave.ok:
            concave = Verdict.UNKNOWN

    lim0, lim_value = _limit_zero(f, x, v, witnesses)
    rate = mono & lim0 & positive
    infinity, sub = _high_end(x, v, witnesses)
    return FnProps(
        positive=positive,
        monotone_increasing=mono,
        strictly_increasing=strict,
        concave=concave,
        concave_on=concave_on,
        is_rate_function=rate,
        limit_at_zero=lim_value,
        tends_to_infinity=infinity,
        sublinear=sub,
        witnesses=witnesses,
        grid=x,
    )
