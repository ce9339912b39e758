"""Variable Hilbert scale norms on Fourier grids and range tests."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..indexfn import IndexFn
from .spectral import FourierGrid, FourierMultiplier, GOperator, eval_fn

__all__ = [
    "hilbert_norm",
    "RangeInclusion",
    "range_inclusion_check",
    "chi_is_unbounded",
    "HSResult",
    "hs_range_test",
]

_TINY = np.finfo(float).tiny


def _log_phi(phi, lam: np.ndarray) -> np.ndarray:
    lam = np.where(lam > 0, lam, _TINY)
    if isinstance(phi, IndexFn):
        return phi.log_value(lam)
    with np.errstate(divide="ignore"):
        return np.log(np.asarray(eval_fn(phi, lam), dtype=float))


def hilbert_norm(x, phi, grid: FourierGrid, *, cap: float = 0.0, spectral: bool = False) -> float:
    """``sqrt((1/2pi) int phi(w**2) |x_hat(w)|**2 dw)`` by the discrete sum.

    Parameters
    ----------
    x : array_like
        Grid samples, or FFT coefficients when ``spectral`` is true.
    phi : IndexFn or callable or float
    grid : FourierGrid
    cap : float, optional
        Terms ``phi(w**2)|x_hat|**2`` below ``cap`` are dropped.  The sum is
        formed in log space, so ``phi = exp`` does not overflow.
    """
    X = np.asarray(x) if spectral else np.fft.fft(np.asarray(x))
    if X.shape != (grid.N,):
        raise ValueError("sample count does not match the grid")
    with np.errstate(divide="ignore"):
        lt = _log_phi(phi, grid.omega**2) + 2.0 * np.log(np.abs(X))
    keep = np.isfinite(lt) if cap <= 0 else lt > math.log(cap)
    if not np.any(keep):
        return 0.0
    lt = lt[keep]
    m = float(np.max(lt))
    total = m + math.log(float(np.sum(np.exp(lt - m))))
    return math.exp(0.5 * (math.log(grid.spectral_weight) + total))


def _symbol(op) -> Callable:
    if isinstance(op, FourierMultiplier):
        if op.symbol is None:
            raise ValueError("operator has no continuous symbol")
        return op.symbol
    if callable(op):
        return op
    raise TypeError("expected a FourierMultiplier or a callable symbol")


def _g_squared(G) -> Callable:
    if G is None:
        return lambda w: np.ones_like(np.asarray(w, dtype=float))
    if isinstance(G, GOperator):
        if G.squared_symbol is None:
            raise ValueError("G has no squared symbol")
        return G.squared_symbol
    if callable(G):
        return G
    raise TypeError("expected a GOperator or a callable")


def chi_is_unbounded(chi) -> bool:
    """Sampled surrogate for ``chi(lam) -> inf``.

    Samples six geometric points from 1 to the top of ``chi``'s support
    (at most 1e250); unbounded when they strictly increase by more than 20%.
    """
    hi = chi.support()[1] if isinstance(chi, IndexFn) else math.inf
    top = min(hi * (1 - 1e-9), 1e250)
    lam = np.geomspace(1.0, max(top, 10.0), 6)
    with np.errstate(all="ignore"):
        v = np.asarray(eval_fn(chi, lam), dtype=float)
    if np.isposinf(v[-1]):
        return True
    return bool(np.all(np.diff(v) > 0) and v[-1] > 1.2 * v[0])


@dataclass(frozen=True)
class RangeInclusion:
    """Outcome of a range-inclusion check.

    ``bounded`` with the stabilised supremum ``bound``, or an unbounded
    ``witness`` frequency.
    """

    bounded: bool
    bound: float | None
    witness: float | None
    sups: tuple[float, ...]
    reason: str


def _bisect_root(k: Callable, a: float, b: float) -> float:
    fa = float(k(np.array([a]))[0])
    for _ in range(200):
        m = 0.5 * (a + b)
        fm = float(k(np.array([m]))[0])
        if fm == 0.0:
            return m
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b = m
        if b - a <= 1e-15 * m:
            break
    return 0.5 * (a + b)


def _first_zero(k: Callable, w: np.ndarray, vals: np.ndarray) -> float | None:
    exact = np.flatnonzero(vals == 0)
    first = float(w[exact[0]]) if exact.size else None
    if not np.iscomplexobj(vals):
        s = np.sign(vals)
        change = np.flatnonzero((s[:-1] * s[1:]) < 0)
        if change.size:
            i = int(change[0])
            root = _bisect_root(k, float(w[i]), float(w[i + 1]))
            first = root if first is None else min(first, root)
    return first


def range_inclusion_check(
    A,
    G,
    chi,
    omega=None,
    *,
    refine: float = 1e4,
    levels: int = 2,
    rtol: float = 0.05,
) -> RangeInclusion:
    """Check ``sup_w chi(1/|k(w)|**2) * g(w)**2 < inf``.

    Parameters
    ----------
    A : FourierMultiplier or callable
        Forward multiplier ``k``.
    G : GOperator or callable or None
        Squared penalty multiplier ``g**2`` (``None`` means ``G = I``).
    chi : IndexFn or callable
    omega : array_like, optional
        Positive frequencies, default 4096 geometric points over [1e-2, 1e2].
    refine : float
        Each refinement level widens the range by this factor at both ends
        and doubles the number of points.
    levels : int
        Number of refinements; bounded when every refinement changes the
        supremum by at most ``rtol``.
    """
    k = _symbol(A)
    g2 = _g_squared(G)
    w0 = np.geomspace(1e-2, 1e2, 4096) if omega is None else np.asarray(omega, dtype=float)
    if not np.all(w0 > 0):
        raise ValueError("frequencies must be positive")
    unbounded_chi = chi_is_unbounded(chi)
    hi = chi.support()[1] if isinstance(chi, IndexFn) else math.inf
    mcap = min(1e300, hi * (1 - 1e-12))

    sups: list[float] = []
    arg = None
    for level in range(levels + 1):
        f = refine**level
        w = w0 if level == 0 else np.geomspace(w0[0] / f, w0[-1] * f, w0.size * 2**level)
        kv = np.asarray(k(w))
        zero = _first_zero(k, w, kv)
        if zero is not None and unbounded_chi:
            return RangeInclusion(False, None, zero, tuple(sups), "multiplier zero with unbounded chi")
        with np.errstate(divide="ignore", over="ignore"):
            m = np.minimum(1.0 / np.abs(kv) ** 2, mcap)
        m = np.where(m > 0, m, _TINY)
        vals = np.asarray(eval_fn(chi, m), dtype=float) * np.asarray(g2(w), dtype=float)
        if not np.all(np.isfinite(vals)):
            i = int(np.argmax(~np.isfinite(vals)))
            return RangeInclusion(False, None, float(w[i]), tuple(sups), "non-finite product")
        i = int(np.argmax(vals))
        sups.append(float(vals[i]))
        arg = float(w[i])
    stable = all(sups[j + 1] <= sups[j] * (1 + rtol) for j in range(levels))
    if stable:
        return RangeInclusion(True, sups[-1], None, tuple(sups), "supremum stable under refinement")
    return RangeInclusion(False, None, arg, tuple(sups), "supremum grows under refinement")


@dataclass(frozen=True)
class HSResult:
    """Outcome of the 2-D integrability test; always a heuristic verdict."""

    finite: bool
    value: float
    values: tuple[float, ...]
    heuristic: bool = True


def hs_range_test(
    ktilde: Callable,
    phi,
    W: float = 8.0,
    S: float = 8.0,
    h: float = 0.05,
    *,
    levels: int = 2,
    rtol: float = 0.05,
) -> HSResult:
    """Midpoint quadrature of ``int int phi(w**2) |k(w, s)|**2 ds dw``.

    The rectangle ``[-W, W] x [-S, S]`` is doubled ``levels`` times at fixed
    spacing ``h``; the integral is judged finite when each doubling changes
    it by at most ``rtol``.

    Raises
    ------
    ValueError
        If the kernel transform has non-finite samples.
    """
    values = []
    for level in range(levels + 1):
        f = 2**level
        nw = int(round(2 * W * f / h))
        ns = int(round(2 * S * f / h))
        w = -W * f + h * (np.arange(nw) + 0.5)
        s = -S * f + h * (np.arange(ns) + 0.5)
        kk = np.asarray(ktilde(w[:, None], s[None, :]))
        if not np.all(np.isfinite(kk)):
            raise ValueError("kernel transform has non-finite samples")
        with np.errstate(divide="ignore"):
            lt = _log_phi(phi, w**2)[:, None] + 2.0 * np.log(np.abs(kk))
        values.append(float(np.sum(np.exp(lt)) * h * h))
    finite = all(
        abs(values[j + 1] - values[j]) <= rtol * abs(values[j + 1]) for j in range(levels)
    ) and math.isfinite(values[-1])
    return HSResult(finite, values[-1], tuple(values))
