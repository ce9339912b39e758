"""Linear spectral regularisation: schemes, verification, solves and
parameter choice rules."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from .exceptions import BracketError, SpectrumError
from .indexfn import IndexFn, theta_inverse
from .operators import GOperator, SpectralOperator, eval_fn

__all__ = [
    "RegScheme",
    "TIKHONOV",
    "SPECTRAL_CUTOFF",
    "SCHEMES",
    "SchemeCheck",
    "verify_scheme",
    "Qualification",
    "qualification_constant",
    "GammaCheck",
    "gamma_bound_check",
    "APriori",
    "ChengYamamoto",
    "Discrepancy",
    "ParamChoice",
    "AlphaChoice",
    "choose_alpha",
    "SolveResult",
    "solve",
    "solve_with_G",
    "residual_norm",
    "tikhonov_functional",
    "ALPHA_FLOOR",
]

ALPHA_FLOOR = 1e-16
DIS_RTOL = 1e-8
DIS_MAXITER = 200
REFINE_FACTOR = 1e-4
GROWTH_RTOL = 0.05


def _extend_down(x: np.ndarray, factor: float = REFINE_FACTOR) -> np.ndarray:
    """Prepend points below ``x.min()`` down to ``factor * x.min()`` at the grid's smallest log step."""
    x = np.sort(np.asarray(x, dtype=float))
    step = float(np.min(np.diff(np.log(x)))) if x.size > 1 else math.log(10.0)
    k = int(math.ceil(-math.log(factor) / step))
    return np.concatenate([x[0] * np.exp(-step * np.arange(k, 0, -1)), x])


# ---------------------------------------------------------------- schemes


@dataclass(frozen=True)
class RegScheme:
    """Filter ``h_alpha(t)`` with bias ``r_alpha(t) = t h_alpha(t) - 1``.

    ``bias_fn`` optionally gives ``r`` in closed form, avoiding the
    cancellation in ``t h - 1`` when ``alpha << t``.
    """

    name: str
    generator: Callable[[np.ndarray, float], np.ndarray] = field(compare=False)
    alpha_max: float = math.inf
    C1: float = 1.0
    C2: float = 1.0
    bias_fn: Callable[[np.ndarray, float], np.ndarray] | None = field(default=None, compare=False)

    def h(self, t, alpha: float) -> np.ndarray:
        return self.generator(np.asarray(t, dtype=float), np.asarray(alpha, dtype=float))

    def bias(self, t, alpha: float) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.bias_fn is not None:
            return self.bias_fn(t, np.asarray(alpha, dtype=float))
        return t * self.h(t, alpha) - 1.0

    def check_alpha(self, alpha: float) -> None:
        if not (alpha > 0 and alpha <= self.alpha_max):
            raise ValueError(f"alpha={alpha!r} outside (0, {self.alpha_max!r}]")


def _tikhonov(t, alpha):
    return 1.0 / (t + alpha)


def _cutoff(t, alpha):
    with np.errstate(divide="ignore"):
        return np.where(t >= alpha, 1.0 / np.where(t > 0, t, 1.0), 0.0)


def _tikhonov_bias(t, alpha):
    return -alpha / (t + alpha)


def _cutoff_bias(t, alpha):
    return np.where(t >= alpha, 0.0, -1.0)


TIKHONOV = RegScheme("tikhonov", _tikhonov, bias_fn=_tikhonov_bias)
SPECTRAL_CUTOFF = RegScheme("cutoff", _cutoff, bias_fn=_cutoff_bias)
SCHEMES = {"tikhonov": TIKHONOV, "cutoff": SPECTRAL_CUTOFF}


@dataclass(frozen=True)
class SchemeCheck:
    """Empirical constants of a scheme on sample grids."""

    C1: float
    C2: float
    passed: bool
    limit_ok: bool
    witnesses: dict


def verify_scheme(scheme: RegScheme, t_grid, alpha_grid) -> SchemeCheck:
    """Suprema of ``t|h_alpha(t)|`` and ``|r_alpha(t)|``, and the limit ``r -> 0``.

    The limit is checked at the smallest ``alpha`` for every ``t`` at least
    1e6 times larger, requiring ``|r| <= 1e-3``.
    """
    t = np.asarray(t_grid, dtype=float)[None, :]
    a = np.asarray(alpha_grid, dtype=float)[:, None]
    h = scheme.h(t, a)
    th = np.abs(t * h)
    r = np.abs(scheme.bias(t, a))
    c1, c2 = float(th.max()), float(r.max())
    witnesses = {}
    if c1 > scheme.C1 * (1 + 1e-12):
        i, j = np.unravel_index(np.argmax(th), th.shape)
        witnesses["C1"] = (float(t[0, j]), float(a[i, 0]))
    if c2 > scheme.C2 * (1 + 1e-12):
        i, j = np.unravel_index(np.argmax(r), r.shape)
        witnesses["C2"] = (float(t[0, j]), float(a[i, 0]))
    amin = float(a.min())
    far = t[0] >= 1e6 * amin
    rlim = np.abs(scheme.bias(t[0][far], amin))
    limit_ok = bool(np.all(rlim <= 1e-3))
    if not limit_ok:
        witnesses["limit"] = (float(t[0][far][np.argmax(rlim)]), amin)
    return SchemeCheck(c1, c2, not ("C1" in witnesses or "C2" in witnesses), limit_ok, witnesses)


@dataclass(frozen=True)
class Qualification:
    """Qualification estimate and its refinement."""

    estimate: float
    refined: float
    finite: bool
    witness_alpha: float | None


def _quali_est(scheme, phi_bar, t, a):
    r = np.abs(scheme.bias(t[None, :], a[:, None]))
    pt = eval_fn(phi_bar, t)[None, :]
    ratio = np.max(r * pt, axis=1) / eval_fn(phi_bar, a)
    i = int(np.argmax(ratio))
    return float(ratio[i]), float(a[i])


def qualification_constant(scheme: RegScheme, phi_bar, t_grid, alpha_grid, *, refine: bool = True) -> Qualification:
    """``max_alpha sup_t |r_alpha(t)| phi_bar(t) / phi_bar(alpha)``.

    With ``refine`` the alpha grid is extended downward by a factor 1e-4 at
    its own log spacing; growth beyond 5% marks the estimate as divergent,
    with the maximising alpha as witness.
    """
    t = np.asarray(t_grid, dtype=float)
    a = np.asarray(alpha_grid, dtype=float)
    est, _ = _quali_est(scheme, phi_bar, t, a)
    if not refine:
        return Qualification(est, est, math.isfinite(est), None)
    a2 = _extend_down(a)
    ref, arg = _quali_est(scheme, phi_bar, t, a2)
    finite = math.isfinite(ref) and ref <= est * (1 + GROWTH_RTOL)
    return Qualification(est, ref, finite, None if finite else arg)


@dataclass(frozen=True)
class GammaCheck:
    """``C_para = max_delta delta * Gamma(alpha(delta))`` or a divergence witness."""

    C_para: float | None
    finite: bool
    values: np.ndarray
    witness: tuple[float, float, float] | None


def _gamma(scheme, psi_bar, alpha, t):
    v = np.sqrt(t) * np.abs(scheme.h(t, alpha)) / eval_fn(psi_bar, t)
    i = int(np.argmax(v))
    return float(v[i]), float(t[i])


def gamma_bound_check(scheme: RegScheme, psi_bar, alpha_of_delta, deltas, t_grid=None) -> GammaCheck:
    """Estimate ``Gamma(alpha) = sup_t sqrt(t)|h_alpha(t)|/psi_bar(t)``.

    ``alpha_of_delta`` is a callable or an :class:`APriori` rule.  The t grid
    (default 4096 points over [1e-16, 1]) is extended downward by 1e-4; growth
    beyond 5% gives a witness ``(delta, alpha, t)``.
    """
    if isinstance(alpha_of_delta, APriori):
        rule = alpha_of_delta
        alpha_of_delta = lambda d: rule.alpha(d)  # noqa: E731
    t = np.geomspace(1e-16, 1.0, 4096) if t_grid is None else np.asarray(t_grid, dtype=float)
    t2 = _extend_down(t)
    vals = []
    for d in np.asarray(deltas, dtype=float):
        a = float(alpha_of_delta(d))
        g, _ = _gamma(scheme, psi_bar, a, t)
        g2, targ = _gamma(scheme, psi_bar, a, t2)
        if not (math.isfinite(g2) and g2 <= g * (1 + GROWTH_RTOL)):
            return GammaCheck(None, False, np.asarray(vals), (float(d), a, targ))
        vals.append(d * g2)
    vals = np.asarray(vals)
    return GammaCheck(float(vals.max()), True, vals, None)


# ---------------------------------------------------------------- choice rules


@dataclass(frozen=True)
class APriori:
    """``alpha = Theta^{-1}(delta)`` with ``Theta(t) = sqrt(t) psi_bar(t)``."""

    psi_bar: IndexFn
    name: str = field(default="apriori", init=False)

    def alpha(self, delta: float) -> float:
        return float(_theta_inv(self.psi_bar)(float(delta)))


@lru_cache(maxsize=64)
def _theta_inv(psi_bar):
    return theta_inverse(psi_bar)


@dataclass(frozen=True)
class ChengYamamoto:
    """``c_lo delta**2 <= alpha <= c_hi delta**2``; the geometric midpoint is used."""

    c_lo: float = 1.0
    c_hi: float = 1.0
    name: str = field(default="cheng_yamamoto", init=False)

    def __post_init__(self):
        if not (0 < self.c_lo <= self.c_hi):
            raise ValueError("need 0 < c_lo <= c_hi")


@dataclass(frozen=True)
class Discrepancy:
    """Residual ``||A f_alpha - g_delta|| = C_dis delta``."""

    C_dis: float = 1.5
    name: str = field(default="discrepancy", init=False)

    def __post_init__(self):
        if not self.C_dis > 0:
            raise ValueError("C_dis must be positive")
        if self.C_dis <= 1:
            warnings.warn("C_dis <= 1 voids the residual bound (C_dis + 1) delta", stacklevel=3)


ParamChoice = APriori | ChengYamamoto | Discrepancy


@dataclass(frozen=True)
class AlphaChoice:
    """Chosen parameter with bookkeeping."""

    alpha: float
    rule: str
    interval: tuple[float, float] | None = None
    residual: float | None = None
    degenerate: bool = False
    iterations: int = 0


def residual_norm(A: SpectralOperator, g_delta, scheme: RegScheme, alpha: float) -> float:
    """``||A f_alpha - g_delta||`` evaluated spectrally as ``||r_alpha(A*A) g_delta||``."""
    G = A.to_spectral(A._check(g_delta))
    return A.spectral_norm(scheme.bias(A.gram, alpha) * G)


def choose_alpha(rule: ParamChoice, A: SpectralOperator, g_delta, delta: float, scheme: RegScheme = TIKHONOV) -> AlphaChoice:
    """Regularisation parameter for noise level ``delta``.

    Raises
    ------
    BracketError
        If the discrepancy target is below the residual at ``alpha = 1e-16``.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    if isinstance(rule, APriori):
        return AlphaChoice(rule.alpha(delta), rule.name)
    if isinstance(rule, ChengYamamoto):
        d2 = delta * delta
        return AlphaChoice(math.sqrt(rule.c_lo * rule.c_hi) * d2, rule.name, (rule.c_lo * d2, rule.c_hi * d2))
    if not isinstance(rule, Discrepancy):
        raise TypeError(f"unknown rule {rule!r}")

    target = rule.C_dis * delta
    G = A.to_spectral(A._check(g_delta))
    t = A.gram

    def res(log_a: float) -> float:
        return A.spectral_norm(scheme.bias(t, math.exp(log_a)) * G)

    top = scheme.alpha_max if math.isfinite(scheme.alpha_max) else A.norm_sq * 1e6
    if A.spectral_norm(G) <= target:
        return AlphaChoice(top, rule.name, residual=A.spectral_norm(G), degenerate=True)
    lo, hi = math.log(ALPHA_FLOOR), math.log(top)
    if res(lo) > target:
        raise BracketError("discrepancy target below the residual at the smallest alpha")
    r_hi = res(hi)
    if r_hi <= target:
        return AlphaChoice(top, rule.name, residual=r_hi)
    it = 0
    for it in range(1, DIS_MAXITER + 1):
        mid = 0.5 * (lo + hi)
        if res(mid) <= target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * max(1.0, abs(lo)):
            break
    return AlphaChoice(math.exp(lo), rule.name, residual=res(lo), iterations=it)


# ---------------------------------------------------------------- solves


@dataclass(frozen=True)
class SolveResult:
    """Regularised solution with its residual and optional chi-norm."""

    f_alpha: np.ndarray
    alpha: float
    residual: float
    chi_norm: float | None = None

    def recheck(self, A: SpectralOperator, g_delta) -> float:
        """Relative mismatch between stored and recomputed residual."""
        r = A.norm(A.apply(self.f_alpha) - np.asarray(g_delta))
        return abs(r - self.residual) / max(self.residual, np.finfo(float).tiny)


def _finish(A, f, alpha, chi, res_coeffs) -> SolveResult:
    # residual from its spectral closed form, free of cancellation in A f - g
    res = A.spectral_norm(res_coeffs)
    cn = A.chi_norm(f, chi) if chi is not None else None
    return SolveResult(f, float(alpha), res, cn)


def solve(A: SpectralOperator, g_delta, scheme: RegScheme, alpha: float, *, chi=None) -> SolveResult:
    """``f_alpha = h_alpha(A*A) A* g_delta``."""
    scheme.check_alpha(alpha)
    g = A._check(g_delta)
    f = A.apply_fn(lambda t: scheme.h(t, alpha), A.apply_adjoint(g))
    return _finish(A, f, alpha, chi, scheme.bias(A.gram, alpha) * A.to_spectral(g))


def solve_with_G(A: SpectralOperator, G: GOperator, g_delta, alpha: float, *, chi=None) -> SolveResult:
    """``f_alpha = G (G A*A G + alpha)^{-1} G A* g_delta`` for commuting ``A`` and ``G``.

    Raises
    ------
    SpectrumError
        If ``G`` does not share ``A``'s spectral basis.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    if not G.compatible(A):
        raise SpectrumError("A and G must share a grid (non-commuting pairs are unsupported)")
    g = A._check(g_delta)
    gv = G.spectrum
    Gd = A.to_spectral(g)
    den = gv**2 * A.gram + alpha
    c = gv * (gv * np.conj(A.spectrum) * Gd) / den
    f = A.from_spectral(c, bool(np.isrealobj(g) and A.hermitian))
    return _finish(A, f, alpha, chi, -alpha / den * Gd)


def tikhonov_functional(A: SpectralOperator, G: GOperator, g_delta, alpha: float, f) -> float:
    """``||A f - g_delta||**2 + alpha ||G^{-1} f||**2``."""
    f = A._check(f)
    r = A.norm(A.apply(f) - np.asarray(g_delta))
    Finv = A.to_spectral(f) / G.spectrum
    return r * r + alpha * A.spectral_norm(Finv) ** 2
