"""Least-squares convergence-rate fits."""

from __future__ import annotations

import math
import warnings
from typing import Iterable

import numpy as np

__all__ = ["fit_rate_exponent", "RateFitWarning", "MIN_FIT_ROWS"]

MIN_FIT_ROWS = 6


class RateFitWarning(UserWarning):
    """Rows were dropped from a rate fit."""


def _pairs(rows) -> tuple[np.ndarray, np.ndarray]:
    d, e = [], []
    for r in rows:
        if hasattr(r, "delta"):
            d.append(r.delta)
            e.append(r.error)
        else:
            d.append(r[0])
            e.append(r[1])
    return np.asarray(d, dtype=float), np.asarray(e, dtype=float)


def fit_rate_exponent(rows: Iterable) -> tuple[float, float]:
    """Slope of ``log error`` against ``log delta`` by ordinary least squares.

    Parameters
    ----------
    rows : iterable
        ``(delta, error)`` pairs or objects with ``delta`` and ``error``.

    Returns
    -------
    slope : float
    residual : float
        RMS of the fit residuals in log space.

    Raises
    ------
    ValueError
        With fewer than six usable rows.

    Examples
    --------
    >>> d = np.geomspace(1e-1, 1e-6, 8)
    >>> s, r = fit_rate_exponent(zip(d, 2 * d**0.4))
    >>> round(s, 12), r < 1e-12
    (0.4, True)
    """
    d, e = _pairs(rows)
    good = np.isfinite(d) & np.isfinite(e) & (d > 0) & (e > 0)
    if not np.all(good):
        warnings.warn(f"excluded {int(np.sum(~good))} row(s) with nonpositive or missing error", RateFitWarning, stacklevel=2)
    if int(np.sum(good)) < MIN_FIT_ROWS:
        raise ValueError(f"need at least {MIN_FIT_ROWS} rows with positive error, got {int(np.sum(good))}")
    x, y = np.log(d[good]), np.log(e[good])
    X = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ coef
    return float(coef[0]), math.sqrt(float(np.mean(resid**2)))
