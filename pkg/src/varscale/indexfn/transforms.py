"""Transformations of index functions: inverses, extensions, the involution S
and the chain Psi -> psi_bar -> Theta, Psi -> chi."""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from ..exceptions import BracketError, PreconditionError
from .expr import (
    Compose,
    Const,
    IndexFn,
    LinearCap,
    NumericInverse,
    Power,
    Product,
    Quotient,
    Reciprocal,
    Scale,
)
from .props import Verdict, concavity_verdict, default_grid, monotone_verdict, verify_props

__all__ = [
    "WIDE_BRACKET",
    "inverse",
    "concave_linear_extension",
    "involution_S",
    "psi_bar_from_Psi",
    "theta_fn",
    "theta_inverse",
    "chi_from_Psi",
    "sqrt_square",
    "safe_bracket",
    "support_grid",
]

WIDE_BRACKET = (1e-300, 1e300)
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_TOUCH_NUDGE = 1e-6


def inverse(f: IndexFn, bracket: tuple[float, float], *, n: int = 256) -> NumericInverse:
    """Numerical inverse of ``f`` on ``bracket``.

    Raises
    ------
    PreconditionError
        If ``f`` is not verified increasing on geometric samples of the bracket.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    x = np.geomspace(lo, hi, n)
    verdict, witness = monotone_verdict(x, np.asarray(f(x), dtype=float), strict=True)
    if not verdict.ok:
        raise PreconditionError(f"{f} is not verified increasing on [{lo:g}, {hi:g}] {witness}")
    return NumericInverse(f, lo, hi)


def safe_bracket(f: IndexFn, fallback=WIDE_BRACKET) -> tuple[float, float]:
    """Closed sub-interval of ``f``'s support, clipped to ``fallback``."""
    lo, hi = f.support()
    lo = max(lo * (1 + 1e-9), fallback[0]) if lo > 0 else fallback[0]
    hi = min(hi * (1 - 1e-9), fallback[1])
    if not lo < hi:
        raise BracketError(f"empty support for {f}")
    return lo, hi


def _ratio(theta: IndexFn, lam):
    return np.asarray(theta(lam), dtype=float) / lam


def concave_linear_extension(theta: IndexFn, lam0: float, *, top: float = 1e8) -> IndexFn:
    """Concave index function equal to ``theta`` beyond the touch point.

    The least line ``a * lam`` majorising ``theta`` on ``[lam0, inf)`` touches
    it at ``lam1``; the result is that line on ``(0, lam1]`` and ``theta``
    above.

    Raises
    ------
    PreconditionError
        If ``theta`` is not verified concave and increasing on ``[lam0, inf)``.
    BracketError
        If the maximiser of ``theta(lam)/lam`` sits at the top of the search range.
    """
    lam0 = float(lam0)
    top = max(top, lam0 * 1e6)
    x = np.geomspace(lam0, top, 256)
    v = np.asarray(theta(x), dtype=float)
    conc, w, _ = concavity_verdict(x, v)
    mono, _ = monotone_verdict(x, v)
    if not (conc.ok and mono.ok and np.all(v > 0)):
        raise PreconditionError(f"{theta} not verified concave increasing on [{lam0:g}, inf): {w}")

    scan = np.geomspace(lam0, top, 2049)
    r = _ratio(theta, scan)
    i = int(np.argmax(r >= r.max() * (1 - 1e-13)))
    if i == scan.size - 1:
        raise BracketError("touch point not found below the search limit")
    a, b = math.log(scan[max(i - 1, 0)]), math.log(scan[i + 1])
    c, d = b - _GOLDEN * (b - a), a + _GOLDEN * (b - a)
    rc, rd = _ratio(theta, math.exp(c)), _ratio(theta, math.exp(d))
    while b - a > 1e-12:
        if rc >= rd:
            b, d, rd = d, c, rc
            c = b - _GOLDEN * (b - a)
            rc = _ratio(theta, math.exp(c))
        else:
            a, c, rc = c, d, rd
            d = a + _GOLDEN * (b - a)
            rd = _ratio(theta, math.exp(d))
    best = math.exp(0.5 * (a + b))
    r0 = float(_ratio(theta, lam0))
    if r0 >= float(_ratio(theta, best)) * (1 - 1e-13):
        lam1 = lam0
    else:
        lam1 = best * (1 + _TOUCH_NUDGE)
    slope = float(theta(lam1)) / lam1
    psi = LinearCap(lam1, slope, theta)
    vg = np.asarray(psi(default_grid()), dtype=float)
    if not concavity_verdict(default_grid(), vg)[0].ok:
        raise PreconditionError("extension failed the concavity check on (0, inf)")
    return psi


def involution_S(psi: IndexFn, *, simplify: bool = True) -> IndexFn:
    """``Phi(mu) = mu * Psi(1/mu)``; applying it twice gives back ``Psi``.

    With ``simplify`` closed forms are returned for constants, powers and
    scaled functions.
    """
    if simplify:
        if isinstance(psi, Const):
            return Power(1.0) if psi.c == 1.0 else Scale(psi.c, Power(1.0))
        if isinstance(psi, Power):
            k = 1.0 - psi.kappa
            return Const(1.0) if k == 0.0 else Power(k)
        if isinstance(psi, Scale):
            return Scale(psi.gamma, involution_S(psi.f))
    return Product(Power(1.0), Compose(psi, Power(-1.0)))


def _require(cond: bool, what: str, psi: IndexFn, props) -> None:
    if not cond:
        raise PreconditionError(f"{psi}: {what} not verified (witnesses {props.witnesses})")


@lru_cache(maxsize=256)
def psi_bar_from_Psi(psi: IndexFn) -> IndexFn:
    """``psi_bar(t) = 1 / sqrt(t * Psi^{-1}(1/t))``.

    Raises
    ------
    PreconditionError
        Unless ``Psi`` is verified concave, strictly increasing, with limit 0
        at 0 and tending to infinity.
    """
    p = verify_props(psi)
    _require(p.concave.ok, "concavity", psi, p)
    _require(p.strictly_increasing.ok, "strict increase", psi, p)
    _require(p.is_rate_function.ok, "limit 0 at 0", psi, p)
    _require(p.tends_to_infinity.ok, "divergence at infinity", psi, p)
    inv = inverse(psi, WIDE_BRACKET)
    inner = Product(Power(1.0), Compose(inv, Power(-1.0)))
    out = Reciprocal(Compose(Power(0.5), inner))
    # psi_bar(t)**2 = 1/chi(1/t), so Psi(lam)/lam -> 0 certifies the limit
    # when psi_bar decays too slowly (logarithmically) for the sampled test
    q = verify_props(out, support_grid(out))
    limit_ok = q.is_rate_function.ok or (p.sublinear.ok and q.is_rate_function is Verdict.UNKNOWN)
    if not (q.monotone_increasing.ok and q.positive.ok and limit_ok):
        raise PreconditionError(f"derived psi_bar is not a rate function: {q.witnesses}")
    return out


def support_grid(f: IndexFn, lo=1e-8, hi=1e8, n=256) -> np.ndarray:
    """Geometric grid over ``[lo, hi]`` clipped to the support of ``f``."""
    slo, shi = f.support()
    a = max(lo, slo * (1 + 1e-6)) if slo > 0 else lo
    b = min(hi, shi * (1 - 1e-6))
    return np.geomspace(a, b, n)


def theta_fn(psi_bar: IndexFn) -> IndexFn:
    """``Theta(t) = sqrt(t) * psi_bar(t)``, checked strictly increasing."""
    theta = Product(Power(0.5), psi_bar)
    x = support_grid(theta)
    verdict, w = monotone_verdict(x, np.asarray(theta(x), dtype=float), strict=True)
    if not verdict.ok:
        raise PreconditionError(f"Theta not strictly increasing: {w}")
    return theta


def theta_inverse(psi_bar: IndexFn) -> NumericInverse:
    """``Theta^{-1}`` on the widest safe bracket of Theta's support."""
    theta = theta_fn(psi_bar)
    return NumericInverse(theta, *safe_bracket(theta))


@lru_cache(maxsize=256)
def chi_from_Psi(psi: IndexFn) -> IndexFn:
    """``chi(lam) = Psi^{-1}(lam) / lam``, checked increasing and unbounded."""
    chi = Quotient(inverse(psi, WIDE_BRACKET), Power(1.0))
    x = support_grid(chi)
    p = verify_props(chi, x)
    if not (p.monotone_increasing.ok and p.tends_to_infinity is not Verdict.REFUTED):
        raise PreconditionError(f"chi not verified increasing and unbounded: {p.witnesses}")
    return chi


def sqrt_square(psi: IndexFn) -> IndexFn:
    """``t -> psi(sqrt(t))**2``."""
    return Compose(Power(2.0), Compose(psi, Power(0.5)))
