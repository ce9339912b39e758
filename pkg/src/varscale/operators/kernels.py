"""Fourier-multiplier kernels of the deblurring and spectroscopy examples."""

from __future__ import annotations

import math
from typing import Any, Mapping

import numpy as np

from ..exceptions import ConfigError
from .bessel import bessel_j1
from .spectral import FourierGrid, FourierMultiplier

__all__ = [
    "out_of_focus_symbol",
    "partial_blur_symbol",
    "gaussian_symbol",
    "eddington_symbol",
    "make_kernel",
    "eddington_L",
    "KERNELS",
]


def out_of_focus_symbol(D: float = 1.0):
    """``2 J1(D|w|) / (D|w|)`` with value 1 at ``w = 0``."""

    def k(w):
        z = D * np.abs(np.asarray(w, dtype=float))
        safe = np.where(z > 0, z, 1.0)
        return np.where(z > 0, 2.0 * bessel_j1(safe) / safe, 1.0)

    return k


def partial_blur_symbol(w):
    """``|w|**-1.5`` (infinite at ``w = 0``)."""
    a = np.abs(np.asarray(w, dtype=float))
    with np.errstate(divide="ignore"):
        return a**-1.5


def gaussian_symbol(w):
    """``exp(-w**2 / 2)``."""
    return np.exp(-0.5 * np.asarray(w, dtype=float) ** 2)


def eddington_symbol(w):
    """``1 / (1 + w**2 / 2)``, transform of ``exp(-sqrt(2)|t|)/sqrt(2)``."""
    return 1.0 / (1.0 + 0.5 * np.asarray(w, dtype=float) ** 2)


def _out_of_focus(grid: FourierGrid, D: float = 1.0) -> FourierMultiplier:
    if not D > 0:
        raise ConfigError("out_of_focus needs D > 0")
    sym = out_of_focus_symbol(D)
    return FourierMultiplier(grid, sym(grid.omega), symbol=sym, name=f"out_of_focus(D={D:g})")


def _partial_blur(grid: FourierGrid) -> FourierMultiplier:
    w = np.abs(grid.omega)
    m = partial_blur_symbol(np.where(w > 0, w, 1.0))
    m[w == 0] = (2.0 * math.pi / grid.L) ** -1.5  # DC clamped to the first nonzero frequency
    return FourierMultiplier(grid, m, symbol=partial_blur_symbol, name="partial_blur")


def _gaussian(grid: FourierGrid) -> FourierMultiplier:
    return FourierMultiplier.from_symbol(grid, gaussian_symbol, name="gaussian_broadening")


def _eddington(grid: FourierGrid) -> FourierMultiplier:
    return FourierMultiplier.from_symbol(grid, eddington_symbol, name="eddington_forward")


KERNELS = {
    "out_of_focus": _out_of_focus,
    "partial_blur": _partial_blur,
    "gaussian_broadening": _gaussian,
    "gaussian": _gaussian,
    "eddington_forward": _eddington,
    "eddington": _eddington,
}


def make_kernel(spec: str | Mapping[str, Any], **params) -> FourierMultiplier:
    """Build a kernel operator from a name or a JSON-style mapping.

    Examples
    --------
    >>> A = make_kernel({"kernel": "eddington", "N": 4096, "L": 200.0})
    >>> float(A.multiplier[0])
    1.0
    """
    if isinstance(spec, Mapping):
        opts = dict(spec)
        opts.update(params)
        name = opts.pop("kernel", None)
    else:
        name, opts = spec, dict(params)
    if name not in KERNELS:
        raise ConfigError(f"unknown kernel {name!r}; choose from {sorted(KERNELS)}")
    try:
        grid = FourierGrid(opts.pop("N"), opts.pop("L"))
    except KeyError as exc:
        raise ConfigError(f"kernel config missing {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid grid: {exc}") from None
    try:
        return KERNELS[name](grid, **opts)
    except TypeError as exc:
        raise ConfigError(f"invalid parameters for {name}: {exc}") from None


def eddington_L(grid: FourierGrid) -> FourierMultiplier:
    """``L f = f - f''/2``, the inverse of the Eddington forward operator."""
    return FourierMultiplier.from_symbol(grid, lambda w: 1.0 + 0.5 * np.asarray(w) ** 2, name="eddington_L")
