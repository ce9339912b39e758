"""Bessel function of the first kind, order one.

Ascending power series for ``|z| < 12`` and the Hankel asymptotic expansion
beyond; absolute accuracy better than 1e-12 on both branches.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["bessel_j1", "bessel_j1_zero", "SERIES_CUTOFF"]

SERIES_CUTOFF = 12.0


def _series(z: np.ndarray) -> np.ndarray:
    # sum_k (-1)^k (z/2)^(2k+1) / (k! (k+1)!)
    h = 0.5 * z
    q = -h * h
    term = h.copy()
    total = term.copy()
    for k in range(1, 80):
        term = term * q / (k * (k + 1))
        total += term
        if np.all(np.abs(term) <= 1e-17 * np.maximum(np.abs(total), 1e-300)):
            break
    return total


def _asymptotic(z: np.ndarray) -> np.ndarray:
    # J1(z) ~ sqrt(2/(pi z)) (P cos(chi) - Q sin(chi)),  chi = z - 3 pi / 4
    mu = 4.0
    p = np.ones_like(z)
    q = np.zeros_like(z)
    term = np.ones_like(z)
    last = np.full_like(z, np.inf)
    active = np.ones(z.shape, dtype=bool)
    for k in range(1, 40):
        term = term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * z)
        mag = np.abs(term)
        active &= mag < last  # stop each entry at its smallest term
        last = np.where(active, mag, last)
        contrib = np.where(active, term, 0.0)
        r = k % 4
        if r == 1:
            q += contrib
        elif r == 2:
            p -= contrib
        elif r == 3:
            q -= contrib
        else:
            p += contrib
        if not np.any(active & (mag > 1e-17)):
            break
    chi = z - 0.75 * math.pi
    return np.sqrt(2.0 / (math.pi * z)) * (p * np.cos(chi) - q * np.sin(chi))


def bessel_j1(z):
    """``J_1(z)`` for real ``z`` (odd function).

    Examples
    --------
    >>> round(float(bessel_j1(1.0)), 12)
    0.440050585745
    """
    arr = np.asarray(z, dtype=float)
    a = np.abs(arr)
    out = np.empty_like(a)
    small = a < SERIES_CUTOFF
    if np.any(small):
        out[small] = _series(a[small])
    if np.any(~small):
        out[~small] = _asymptotic(a[~small])
    out = np.sign(arr) * out
    return float(out) if out.ndim == 0 else out


def bessel_j1_zero(k: int = 1) -> float:
    """``k``-th positive zero of ``J_1`` by bisection on a sign change."""
    if k < 1:
        raise ValueError("k must be >= 1")
    # zeros lie near (k + 1/4) pi; bracket between consecutive quarter points
    a, b = (k + 0.25) * math.pi - 0.8, (k + 0.25) * math.pi + 0.8
    fa = bessel_j1(a)
    if fa * bessel_j1(b) > 0:
        raise ArithmeticError("zero bracket lost")
    for _ in range(200):
        m = 0.5 * (a + b)
        fm = bessel_j1(m)
        if fm == 0.0:
            return m
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b = m
        if b - a <= 1e-15 * m:
            break
    return 0.5 * (a + b)
