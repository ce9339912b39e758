"""The ten acceptance criteria as runnable checks.

Each check returns a :class:`CriterionResult`; a criterion passes when its
numerical claim holds and it finishes within its runtime limit.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..bounds import (
    check_coincidence,
    interpolation_check,
    modulus_bound_direct,
    modulus_bound_nested,
    modulus_brute_force,
)
from ..indexfn import (
    CONCAVE_FAMILY,
    Power,
    chi_from_Psi,
    eddington_Psi,
    involution_S,
    log_capped,
    over_log_capped,
    psi_bar_from_Psi,
)
from ..operators import (
    DiagonalOperator,
    FourierGrid,
    chi_is_unbounded,
    make_kernel,
    partial_blur_symbol,
    range_inclusion_check,
    sobolev_G,
)
from ..regularize import TIKHONOV, APriori, gamma_bound_check, qualification_constant
from .config import DeltaGrid, ExperimentConfig, SourceSpec
from .experiments import deblur_config, eddington_config, run_deblur_experiment, run_eddington_experiment, run_rate_experiment

__all__ = ["CriterionResult", "CRITERIA", "run_criterion", "run_all"]


@dataclass
class CriterionResult:
    """Outcome of one acceptance criterion."""

    number: int
    title: str
    ok: bool
    detail: str
    runtime: float = 0.0
    limit: float = math.inf
    data: dict = field(default_factory=dict)

    @property
    def in_time(self) -> bool:
        return self.runtime < self.limit

    @property
    def passed(self) -> bool:
        return self.ok and self.in_time

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        timing = f"{self.runtime:.2f}s/{self.limit:g}s"
        if not self.in_time:
            timing += " (over time)"
        return f"[{verdict}] criterion {self.number:2d} {self.title}: {self.detail} [{timing}]"


def _involution(seed: int):
    grid = np.geomspace(1e-8, 1e8, 128)
    family = {
        "pow0.25": Power(0.25),
        "pow0.5": Power(0.5),
        "pow0.75": Power(0.75),
        "overlogcap": over_log_capped(),
        "logcap": log_capped(),
        "eddington": eddington_Psi(),
    }
    devs = {}
    for name, psi in family.items():
        ss = involution_S(involution_S(psi, simplify=False), simplify=False)
        ref = np.asarray(psi(grid))
        devs[name] = float(np.max(np.abs(np.asarray(ss(grid)) - ref) / np.abs(ref)))
    worst = max(devs.values())
    return worst <= 1e-12, f"max rel |S(S(Psi)) - Psi| = {worst:.2e} (tol 1e-12)", devs


def _coincidence(seed: int):
    worst = 0.0
    for k in (0.25, 0.5, 0.75):
        for R in (0.1, 1.0, 10.0):
            rep = check_coincidence(Power(k), R, R * np.geomspace(1e-6, 1.0, 25))
            worst = max(worst, rep.max_dev)
    return worst <= 1e-8, f"max rel deviation direct vs nested = {worst:.2e} (tol 1e-8)", {"max_dev": worst}


def _random_samples(rng: np.random.Generator, sigma: np.ndarray, count: int) -> np.ndarray:
    # dense, spectrally decaying and sparse elements in equal parts
    n = sigma.size
    F = rng.standard_normal((count, n))
    third = count // 3
    p = rng.uniform(0.0, 3.0, size=(third, 1))
    F[third:2 * third] *= sigma[None, :] ** p
    for row in F[2 * third:]:
        keep = rng.choice(n, size=rng.integers(1, 4), replace=False)
        mask = np.zeros(n, dtype=bool)
        mask[keep] = True
        row[~mask] = 0.0
    return F


def _interpolation(seed: int):
    rng = np.random.default_rng(seed)
    ops = {"power": DiagonalOperator.power_decay(32), "exponential": DiagonalOperator.exponential_decay(32)}
    bad, worst, total = 0, 0.0, 0
    for A in ops.values():
        F = _random_samples(rng, A.sigma, 1000)
        for make in CONCAVE_FAMILY.values():
            psi = make()
            rep = interpolation_check(A, psi, chi_from_Psi(psi), F, slack=1e-10)
            bad += rep.violations
            total += rep.n_samples
            worst = max(worst, rep.max_ratio)
    return bad == 0, f"{bad} violations in {total} samples, max lhs/rhs = {worst:.12f}", {"violations": bad}


def _modulus(seed: int):
    rng = np.random.default_rng(seed)
    names = list(CONCAVE_FAMILY)
    worst, bad, coin = 0.0, 0, 0.0
    for _ in range(50):
        n = int(rng.integers(1, 5))
        sigma = np.sort(rng.uniform(0.01, 1.0, n))[::-1]
        psi = CONCAVE_FAMILY[names[int(rng.integers(len(names)))]]()
        R = float(10 ** rng.uniform(-1, 1))
        delta = float(R * 10 ** rng.uniform(-4, 0))
        brute = modulus_brute_force(DiagonalOperator(sigma), chi_from_Psi(psi), R, delta)
        direct = modulus_bound_direct(psi, R, delta)
        nested = modulus_bound_nested(psi_bar_from_Psi(psi), R, delta)
        ratio = brute / direct
        worst = max(worst, ratio)
        bad += ratio > 1 + 1e-8
        coin = max(coin, abs(direct - nested) / direct)
    ok = bad == 0 and coin <= 1e-8
    return ok, f"max brute/direct = {worst:.6f}, {bad} violations, direct vs nested {coin:.1e}", {"violations": bad}


def _holder(seed: int):
    parts, ok, data = [], True, {}
    for mu in (0.25, 0.5):
        rep = run_rate_experiment(ExperimentConfig(source=SourceSpec(mu=mu), seed=seed))
        good = rep.slope_ok is True
        ok &= good
        smin2 = 1.0 / 400**2
        inner = [r for r in rep.rows if r.failure is None and r.alpha >= smin2]
        diag = ""
        if len(inner) >= 2:
            # diagnostic only: rows with alpha >= sigma_min**2, no row minimum
            s_in = np.polyfit(np.log([r.delta for r in inner]), np.log([r.error for r in inner]), 1)[0]
            diag = f" (diagnostic, {len(inner)} rows with alpha >= sigma_min^2: {s_in:.3f})"
        parts.append(f"mu={mu}: slope {rep.slope:.3f} vs {rep.theory_slope:.3f}{diag}")
        data[mu] = rep.slope
    return ok, "; ".join(parts), data


def _discrepancy(seed: int):
    choice = {"rule": "discrepancy", "C_dis": 1.5}
    worst, degenerate, slope = 0.0, 0, None
    ok = True
    for mu in (0.25, 0.5):
        rep = run_rate_experiment(ExperimentConfig(source=SourceSpec(mu=mu), choice=choice, seed=seed))
        rows = [r for r in rep.rows if r.failure is None]
        ok &= len(rows) == len(rep.rows)
        degenerate += sum(r.degenerate for r in rows)
        worst = max([worst] + [abs(r.residual / (1.5 * r.delta) - 1) for r in rows])
        if mu == 0.5:
            slope = rep.slope
    ok = ok and degenerate == 0 and worst <= 1e-8 and abs(slope - 0.5) <= 0.1
    return ok, f"max |residual/(C delta) - 1| = {worst:.1e}, degenerate rows {degenerate}, mu=0.5 slope {slope:.3f}", {"slope": slope}


def _qualification(seed: int):
    t = np.geomspace(1e-12, 1.0, 400)
    est = {}
    ok = True
    for nu in (0.25, 0.5, 1.0):
        q = qualification_constant(TIKHONOV, Power(nu), t, t)
        est[nu] = q.refined
        ok &= q.finite and q.refined <= 1 + 1e-6
    q2 = qualification_constant(TIKHONOV, Power(2.0), t, t)
    mu = 0.75
    gam = gamma_bound_check(TIKHONOV, Power(mu), APriori(Power(mu)), np.geomspace(1e-2, 1e-6, 9))
    ok = ok and not q2.finite and q2.witness_alpha is not None and not gam.finite and gam.witness is not None
    shown = ", ".join(f"nu={k:g}: {v:.6f}" for k, v in est.items())
    return ok, f"{shown}; nu=2 witness alpha={q2.witness_alpha}; Gamma mu=0.75 witness={gam.witness is not None}", est


def _deblur(seed: int):
    parts, ok = [], True
    for l in (1, 2):
        rep = run_deblur_experiment(l, deblur_config(seed=seed))
        ok &= rep.slope_ok is True
        parts.append(f"l={l}: slope {rep.slope:.3f} vs {rep.theory_slope:.3f}")
        grid = FourierGrid(4096, 20.0)
        G = sobolev_G(grid, l)
        edge = 2 * l / 3
        below = range_inclusion_check(partial_blur_symbol, G, Power(0.99 * edge))
        above = range_inclusion_check(partial_blur_symbol, G, Power(1.01 * edge))
        ok &= below.bounded and not above.bounded and above.witness is not None
        parts.append(f"kappa 0.99*{edge:.3f} bounded={below.bounded}, 1.01*{edge:.3f} witness={above.witness}")
    return ok, "; ".join(parts), {}


def _eddington(seed: int):
    rep = run_eddington_experiment(eddington_config(seed=seed))
    rows = [r for r in rep.rows if r.regime == "log"]
    worst = max(r.error / r.bound for r in rows)
    lo, hi = rep.meta["equivalence_ratios"]
    ok = bool(rep.checks.get("log_bound") and rep.checks.get("norm_equivalence")) and not rep.failures
    return ok, (f"{len(rows)} log rows, max error/bound {worst:.3f}, eta={rep.meta['eta']:.4f}; "
                f"||Lf||/||f||_2 in [{lo:.4f}, {hi:.4f}]"), {"worst": worst}


def _out_of_focus(seed: int):
    A = make_kernel("out_of_focus", N=4096, L=200.0)
    witnesses, ok, tested = {}, True, 0
    for name, make in CONCAVE_FAMILY.items():
        chi = chi_from_Psi(make())
        if not chi_is_unbounded(chi):
            continue
        tested += 1
        res = range_inclusion_check(A, None, chi)
        witnesses[name] = res.witness
        ok &= (not res.bounded) and res.witness is not None
    ok &= tested > 0
    shown = ", ".join(f"{k}@{v:.4f}" for k, v in witnesses.items() if v is not None)
    return ok, f"{tested} unbounded chi, witnesses: {shown}", witnesses


CRITERIA: dict[int, tuple[str, float, Callable]] = {
    1: ("involution", 1.0, _involution),
    2: ("coincidence", 1.0, _coincidence),
    3: ("interpolation inequality", 5.0, _interpolation),
    4: ("modulus oracle", 10.0, _modulus),
    5: ("Tikhonov Holder rates", 5.0, _holder),
    6: ("discrepancy principle", 10.0, _discrepancy),
    7: ("qualification", 2.0, _qualification),
    8: ("deblurring rates", 30.0, _deblur),
    9: ("Eddington bound", 10.0, _eddington),
    10: ("out-of-focus range", 1.0, _out_of_focus),
}


def run_criterion(number: int, seed: int = 42) -> CriterionResult:
    """Run one criterion; exceptions count as failure."""
    title, limit, fn = CRITERIA[number]
    t0 = time.perf_counter()
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            ok, detail, data = fn(seed)
    except Exception as exc:  # reported, never raised
        ok, detail, data = False, f"error: {type(exc).__name__}: {exc}", {}
    return CriterionResult(number, title, bool(ok), detail, time.perf_counter() - t0, limit, data)


def run_all(seed: int = 42, numbers=None) -> list[CriterionResult]:
    return [run_criterion(n, seed) for n in (numbers or sorted(CRITERIA))]
