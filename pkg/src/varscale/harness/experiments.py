"""Synthetic convergence-rate experiments.

Every experiment draws its randomness from ``SeedSequence(seed).spawn``:
child 0 builds the source, child ``i + 1`` the noise of row ``i``, so rows
are independent and their order or concurrency cannot change results.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from typing import Callable

import numpy as np

from ..bounds import UnverifiedBoundWarning, concavity_verified, error_bound
from ..exceptions import ConfigError, VarscaleError
from ..indexfn import Exp, IndexFn, Power, SobolevPoly, chi_from_Psi, eddington_Psi
from ..operators import (
    DiagonalOperator,
    FourierGrid,
    GOperator,
    SpectralOperator,
    eddington_L,
    hilbert_norm,
    identity_G,
    sobolev_G,
)
from ..regularize import APriori, ChengYamamoto, Discrepancy, choose_alpha, solve, solve_with_G
from .config import DeltaGrid, ExperimentConfig, NoiseSpec, OperatorSpec, SourceSpec
from .fitting import fit_rate_exponent
from .reports import RateReport, RateRow

__all__ = [
    "run_rate_experiment",
    "run_deblur_experiment",
    "run_eddington_experiment",
    "deblur_config",
    "eddington_bound",
    "eddington_config",
    "norm_equivalence_check",
    "eddington_precondition_check",
    "NOISE_RTOL",
    "BOUND_SLACK",
]

NOISE_RTOL = 1e-12
BOUND_SLACK = 1e-8
DIS_RTOL = 1e-8
EQUIV_TOL = 1e-10


def _streams(seed: int, rows: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(rows + 2)]


def _grid_of(A: SpectralOperator) -> FourierGrid | None:
    return A.grid


def _white(A: SpectralOperator, rng: np.random.Generator) -> np.ndarray:
    return rng.standard_normal(A.size)


def _octave_weight(grid: FourierGrid) -> np.ndarray:
    # amplitude (|w| / dw)**-1/2: equal energy per octave, DC removed
    a = np.abs(grid.omega) / (2.0 * math.pi / grid.L)
    return np.where(a > 0, 1.0 / np.sqrt(np.where(a > 0, a, 1.0)), 0.0)


def _shaped(A: SpectralOperator, rng: np.random.Generator, weight: np.ndarray | None) -> np.ndarray:
    z = _white(A, rng)
    if weight is None:
        return z
    if A.grid is None:
        raise ConfigError("spectral shaping needs a Fourier operator")
    return np.fft.ifft(np.fft.fft(z) * weight).real


def _noise_weight(A: SpectralOperator, noise: NoiseSpec) -> np.ndarray | None:
    if noise.model == "white":
        return None
    if A.grid is None:
        raise ConfigError("gaussian noise needs a Fourier operator")
    return np.exp(-0.5 * A.grid.omega**2)


def _unit(A: SpectralOperator, x: np.ndarray, scale: float = 1.0) -> np.ndarray:
    n = A.norm(x)
    if not n > 0:
        raise VarscaleError("degenerate random direction")
    return x * (scale / n)


def _failed(delta: float, exc: Exception) -> RateRow:
    nan = math.nan
    return RateRow(delta, nan, nan, nan, failure=f"{type(exc).__name__}: {exc}")


class _Problem:
    """Exact data plus the per-row solve recipe shared by all experiments."""

    def __init__(self, A, f, g, cfg: ExperimentConfig, *, G: GOperator | None = None,
                 Psi: IndexFn | None = None, bound_fn: Callable | None = None, exact: bool = False):
        self.A, self.f, self.g, self.cfg, self.G = A, f, g, cfg, G
        self.scheme = cfg.build_scheme()
        self.rule = cfg.rule()
        self.noise_w = _noise_weight(A, cfg.noise)
        self.Psi = Psi
        self.chi = chi_from_Psi(Psi) if Psi is not None else None
        self.bound_fn = bound_fn
        self.exact = exact

    def row(self, delta: float, rng: np.random.Generator) -> RateRow:
        A = self.A
        try:
            if self.exact:
                gd, nn = self.g, 0.0
                rule = self.rule if isinstance(self.rule, APriori) else ChengYamamoto()
            else:
                e = _unit(A, _shaped(A, rng, self.noise_w), delta)
                gd, nn = self.g + e, A.norm(e)
                rule = self.rule
            choice = choose_alpha(rule, A, gd, delta, self.scheme)
            if self.G is not None:
                res = solve_with_G(A, self.G, gd, choice.alpha)
            else:
                res = solve(A, gd, self.scheme, choice.alpha)
            diff = self.f - res.f_alpha
            err = A.norm(diff)
            zeta = bound = None
            regime = ""
            if self.bound_fn is not None:
                bound, regime = self.bound_fn(delta)
            elif self.chi is not None:
                zeta = A.chi_norm(diff, self.chi)
                eps = A.norm(A.apply(diff))
                if eps > 0 and zeta > 0:
                    with warnings.catch_warnings():
                        warnings.simplefilter("ignore", UnverifiedBoundWarning)
                        bound = error_bound(self.Psi, eps, zeta, strict=False)
                    regime = "interp"
            return RateRow(delta, choice.alpha, res.residual, err, zeta, bound, regime, nn, degenerate=choice.degenerate)
        except (VarscaleError, ArithmeticError, ValueError) as exc:
            return _failed(delta, exc)

    def run(self, deltas: np.ndarray, streams: list[np.random.Generator]) -> list[RateRow]:
        jobs = [(float(d), streams[i + 1]) for i, d in enumerate(deltas)]
        if self.cfg.workers > 1:
            with ThreadPoolExecutor(self.cfg.workers) as ex:
                return list(ex.map(lambda j: self.row(*j), jobs))
        return [self.row(*j) for j in jobs]


def _finish(name: str, rows: list[RateRow], cfg: ExperimentConfig, theory: float | None,
            prob: _Problem, **meta) -> RateReport:
    rep = RateReport(name, rows, theory_slope=theory, tolerance=cfg.slope_tol, trimmed=cfg.trim,
                     meta={"seed": cfg.seed, **meta})
    ok_rows = [r for r in rep.rows if r.failure is None]
    fit_rows = ok_rows[cfg.trim:]
    try:
        rep.slope, rep.fit_residual = fit_rate_exponent(fit_rows)
    except ValueError as exc:
        rep.notes.append(f"no fit: {exc}")
        if theory is not None:
            rep.checks["fit"] = False
    if cfg.trim:
        rep.notes.append(f"trimmed {cfg.trim} largest-delta row(s) from the fit")
    for r in rep.failures:
        rep.notes.append(f"row delta={r.delta:.3e} aborted: {r.failure}")
    if rep.failures:
        rep.checks["rows"] = False
    if not prob.exact:
        rep.checks["noise_exact"] = all(
            abs(r.noise_norm - r.delta) <= NOISE_RTOL * r.delta for r in ok_rows
        )
    if isinstance(prob.rule, Discrepancy) and not prob.exact:
        target = prob.rule.C_dis
        live = [r for r in ok_rows if not r.degenerate]
        rep.checks["discrepancy"] = all(
            abs(r.residual - target * r.delta) <= DIS_RTOL * target * r.delta for r in live
        )
        if len(live) < len(ok_rows):
            rep.notes.append(f"{len(ok_rows) - len(live)} row(s) with ||g_delta|| <= C_dis delta: alpha set to its maximum")
    bounded = [r for r in ok_rows if r.bound is not None]
    if bounded and prob.bound_fn is None:
        verified = concavity_verified(prob.Psi)
        rep.meta["bound_verified"] = verified
        if verified:
            rep.checks["bound"] = all(r.error <= r.bound * (1 + BOUND_SLACK) for r in bounded)
    return rep


def _source_vector(A: SpectralOperator, src: SourceSpec, rng: np.random.Generator) -> np.ndarray:
    w = _octave_weight(A.grid) if src.colour == "octave" else None
    return _unit(A, _shaped(A, rng, w), src.R1)


# ---------------------------------------------------------------- rates


def run_rate_experiment(config: ExperimentConfig | None = None) -> RateReport:
    """Spectral source ``f = psi_bar(A*A) v`` with ``||v|| = R1``.

    Rows record the error and the interpolation bound
    ``error_bound(Psi, ||A(f - f_alpha)||, ||f - f_alpha||_chi)``.  With
    ``config.noiseless`` the data are exact and ``alpha`` follows the rule's
    schedule; the report then checks that the errors decrease.
    """
    cfg = config or ExperimentConfig()
    src = cfg.source
    if src.kind not in ("monomial", "psi_bar"):
        raise ConfigError("rate experiments need a monomial or psi_bar source")
    A = cfg.build_operator()
    deltas = cfg.deltas.values()
    streams = _streams(cfg.seed, deltas.size)
    v = _source_vector(A, src, streams[0])
    f = A.apply_fn(src.psi_bar_fn(), v)
    g = A.apply(f)
    prob = _Problem(A, f, g, cfg, Psi=src.Psi_fn(), exact=cfg.noiseless)
    rows = prob.run(deltas, streams)
    theory = None
    if src.kind == "monomial" and not cfg.noiseless:
        if cfg.scheme != "tikhonov" or src.mu <= 0.5:
            theory = 2 * src.mu / (2 * src.mu + 1)
    rep = _finish("rates", rows, cfg, theory, prob, operator=repr(A), source=src.kind)
    if src.kind == "monomial" and src.mu > 0.5 and cfg.scheme == "tikhonov":
        rep.notes.append("mu > 1/2 exceeds Tikhonov saturation; no theory slope")
    if cfg.noiseless:
        errs = [r.error for r in rep.rows]
        rep.checks["errors_decrease"] = all(b < a for a, b in zip(errs, errs[1:]))
    return rep


# ---------------------------------------------------------------- deblurring


def deblur_config(**overrides) -> ExperimentConfig:
    """Default deblurring setup: partial blur on ``N=4096``, ``L=20``."""
    base = ExperimentConfig(
        operator=OperatorSpec(kind="partial_blur", N=4096, L=20.0),
        source=SourceSpec(kind="sobolev", colour="octave"),
        noise=NoiseSpec("white"),
        deltas=DeltaGrid(1e-1, 1e-5, 9),
        choice={"rule": "cheng_yamamoto", "c_lo": 1.0, "c_hi": 1.0},
    )
    return replace(base, **overrides)


def run_deblur_experiment(l: int, config: ExperimentConfig | None = None) -> RateReport:
    """Penalised Tikhonov ``f_alpha = G (G A*A G + alpha)^{-1} G A* g_delta``.

    ``G`` is the Sobolev penalty of order ``l`` and the source is ``f = G w``
    normalised to ``||f|| = R1``.  Theory slope ``2l/(2l+3)``; ``l = 0`` is
    the vacuous case ``G = I`` with no claimed rate.
    """
    if not (isinstance(l, int) and l >= 0):
        raise ConfigError("Sobolev order l must be a nonnegative integer")
    cfg = config or deblur_config()
    A = cfg.build_operator()
    if A.grid is None:
        raise ConfigError("deblurring needs a Fourier operator")
    G = sobolev_G(A.grid, l) if l > 0 else identity_G(A)
    deltas = cfg.deltas.values()
    streams = _streams(cfg.seed, deltas.size)
    w = _octave_weight(A.grid) if cfg.source.colour == "octave" else (np.abs(A.grid.omega) > 0).astype(float)
    W = np.fft.fft(_white(A, streams[0])) * w
    f = _unit(A, np.fft.ifft(G.spectrum * W).real, cfg.source.R1)
    g = A.apply(f)
    # ||x|| <= ||Ax||**kappa ||x||_chi**(1-kappa) with chi(1/|k|**2) = |w|**(2l)
    Psi = Power(3.0 / (2 * l + 3)) if l > 0 else None
    prob = _Problem(A, f, g, cfg, G=G, Psi=Psi)
    rows = prob.run(deltas, streams)
    theory = 2 * l / (2 * l + 3) if l > 0 else None
    rep = _finish(f"deblur(l={l})", rows, cfg, theory, prob, operator=repr(A), l=l, no_theory=l == 0)
    if l == 0:
        rep.notes.append("l = 0: G = I, no smoothness, no theory slope")
    return rep


# ---------------------------------------------------------------- Eddington


def eddington_config(**overrides) -> ExperimentConfig:
    """Default Eddington setup: ``N=4096``, ``L=200``, discrepancy ``C_dis=1.5``."""
    base = ExperimentConfig(
        operator=OperatorSpec(kind="eddington", N=4096, L=200.0),
        source=SourceSpec(kind="gaussian"),
        noise=NoiseSpec("gaussian"),
        deltas=DeltaGrid(1e-1, 1e-7, 13),
        choice={"rule": "discrepancy", "C_dis": 1.5},
    )
    return replace(base, **overrides)


def eddington_bound(delta: float, eta: float) -> tuple[float, str]:
    """``delta (1 + log(eta/delta))`` for ``delta < eta``, else ``eta``."""
    if delta < eta:
        return delta * (1.0 + math.log(eta / delta)), "log"
    return eta, "const"


def norm_equivalence_check(grid: FourierGrid, rng: np.random.Generator, count: int = 100,
                           tol: float = EQUIV_TOL) -> tuple[bool, float, float]:
    """``||f||_2 / 2 <= ||L f|| <= ||f||_2`` on ``count`` random grid functions.

    ``||.||_2`` is the Sobolev norm with weight ``1 + w**2 + w**4``.  Half the
    samples are white, half Gaussian-smoothed.  Returns the verdict and the
    extreme ratios ``||L f|| / ||f||_2``.
    """
    Lop = eddington_L(grid)
    nu2 = SobolevPoly(2)
    smooth = np.exp(-0.5 * grid.omega**2)
    lo, hi = math.inf, 0.0
    for k in range(count):
        x = rng.standard_normal(grid.N)
        if k % 2:
            x = np.fft.ifft(np.fft.fft(x) * smooth).real
        r = Lop.norm(Lop.apply(x)) / hilbert_norm(x, nu2, grid)
        lo, hi = min(lo, r), max(hi, r)
    return bool(lo >= 0.5 * (1 - tol) and hi <= 1 + tol), lo, hi


def eddington_precondition_check(n: int = 7001) -> dict[str, bool]:
    """``phi(lam) <= Psi(exp(lam))`` on ``[0, 700]`` for both readings of ``phi``."""
    lam = np.linspace(0.0, 700.0, n)
    rhs = eddington_Psi()(np.exp(lam))
    out = {}
    for name, phi in (("phi_linear", 1 + lam / 2), ("phi_square", (1 + lam / 2) ** 2)):
        out[name] = bool(np.all(phi <= rhs * (1 + 1e-12)))
    return out


def run_eddington_experiment(config: ExperimentConfig | None = None) -> RateReport:
    """Gaussian-spectrum data ``g_hat = exp(-w**2/2) v_hat`` with ``||v|| = 1``.

    ``f = L g`` is recovered by Tikhonov on the Eddington forward operator.
    Each row is compared with ``delta (1 + log(eta/delta))`` (``regime="log"``)
    or with ``eta`` when ``delta >= eta`` (``regime="const"``), where
    ``eta = ||g||_exp`` is computed spectrally with ``config.eta_cap``.
    """
    cfg = config or eddington_config()
    A = cfg.build_operator()
    grid = A.grid
    if grid is None:
        raise ConfigError("Eddington experiment needs a Fourier operator")
    deltas = cfg.deltas.values()
    streams = _streams(cfg.seed, deltas.size)
    v = _unit(A, _white(A, streams[0]), cfg.source.R1)
    G_hat = np.exp(-0.5 * grid.omega**2) * np.fft.fft(v)
    g = np.fft.ifft(G_hat).real
    f = np.fft.ifft(G_hat / A.multiplier).real
    eta = hilbert_norm(G_hat, Exp(), grid, cap=cfg.eta_cap, spectral=True)
    prob = _Problem(A, f, g, cfg, bound_fn=lambda d: eddington_bound(d, eta))
    rows = prob.run(deltas, streams)
    rep = _finish("eddington", rows, cfg, None, prob, operator=repr(A), eta=eta, eta_cap=cfg.eta_cap)
    ok = [r for r in rep.rows if r.failure is None]
    rep.checks["log_bound"] = all(r.error <= r.bound for r in ok if r.regime == "log")
    const = [r for r in ok if r.regime == "const"]
    if const:
        rep.checks["const_bound"] = all(r.error <= r.bound for r in const)
    eq, lo, hi = norm_equivalence_check(grid, streams[-1])
    rep.checks["norm_equivalence"] = eq
    rep.meta["equivalence_ratios"] = (lo, hi)
    rep.checks.update(eddington_precondition_check())
    return rep
