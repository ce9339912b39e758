"""Spectral forward operators: diagonal singular systems and periodic
Fourier multipliers, with functional calculus of ``A*A``."""

from __future__ import annotations

import abc
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np

from ..exceptions import SpectrumError
from ..indexfn import IndexFn, SobolevPoly

__all__ = [
    "FourierGrid",
    "SpectralOperator",
    "DiagonalOperator",
    "FourierMultiplier",
    "GOperator",
    "sobolev_G",
    "identity_G",
    "eval_fn",
    "eval_clipped",
]


def eval_clipped(f: IndexFn, x: np.ndarray) -> np.ndarray:
    """Evaluate an increasing index function, returning ``inf`` above its support."""
    x = np.asarray(x, dtype=float)
    lo, hi = f.support()
    out = np.full(x.shape, np.inf)
    inside = x < hi
    if np.any(inside):
        xi = np.maximum(x[inside], lo * (1 + 1e-12)) if lo > 0 else x[inside]
        out[inside] = f(xi)
    return out


def eval_fn(h, t: np.ndarray) -> np.ndarray:
    """Evaluate an index function or plain callable on spectral values ``t``."""
    if isinstance(h, (int, float)):
        return np.full(t.shape, float(h))
    if isinstance(h, IndexFn):
        tt = np.where(t > 0, t, np.finfo(float).tiny)
        return np.asarray(h(tt), dtype=float)
    return np.asarray(h(t))


@dataclass(frozen=True)
class FourierGrid:
    """Periodic grid of ``N`` samples on a domain of length ``L``.

    Angular frequencies are ``2*pi*fftfreq(N, L/N)``; the L2 norm is the
    Riemann sum ``sqrt(dx * sum |x|**2)``.
    """

    N: int
    L: float

    def __post_init__(self):
        n = int(self.N)
        if n != self.N or n < 2 or n & (n - 1):
            raise ValueError("N must be a power of two >= 2")
        if not (self.L > 0 and math.isfinite(self.L)):
            raise ValueError("L must be positive and finite")
        object.__setattr__(self, "N", n)
        object.__setattr__(self, "L", float(self.L))

    @property
    def dx(self) -> float:
        return self.L / self.N

    @cached_property
    def omega(self) -> np.ndarray:
        w = 2.0 * np.pi * np.fft.fftfreq(self.N, d=self.dx)
        w.setflags(write=False)
        return w

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.N) * self.dx

    @property
    def spectral_weight(self) -> float:
        """Factor turning ``sum |fft(x)|**2`` into the squared L2 norm."""
        return self.dx / self.N


class SpectralOperator(abc.ABC):
    """Operator diagonal in a fixed spectral basis.

    Subclasses supply the transform pair and the spectral values ``s`` so
    that ``A x = from_spectral(s * to_spectral(x))``.
    """

    @property
    @abc.abstractmethod
    def spectrum(self) -> np.ndarray:
        """Spectral values (singular values or multiplier samples)."""

    @property
    @abc.abstractmethod
    def size(self) -> int: ...

    @property
    @abc.abstractmethod
    def weight(self) -> float:
        """Factor in ``||x||**2 = weight * sum |to_spectral(x)|**2``."""

    @abc.abstractmethod
    def to_spectral(self, x: np.ndarray) -> np.ndarray: ...

    @abc.abstractmethod
    def from_spectral(self, c: np.ndarray, real: bool) -> np.ndarray: ...

    @property
    def grid(self) -> FourierGrid | None:
        return None

    @property
    def injective(self) -> bool:
        return bool(np.all(self.spectrum != 0))

    @property
    def gram(self) -> np.ndarray:
        """Spectrum of ``A*A``: ``|s|**2``."""
        return np.abs(self.spectrum) ** 2

    @property
    def norm_sq(self) -> float:
        """``||A||**2``."""
        return float(np.max(self.gram))

    @property
    def hermitian(self) -> bool:
        return True

    @property
    def gram_even(self) -> bool:
        """Whether ``|s|**2`` maps real inputs to real outputs."""
        return True

    def _check(self, x) -> np.ndarray:
        arr = np.asarray(x)
        if arr.shape != (self.size,):
            raise ValueError(f"expected shape ({self.size},), got {arr.shape}")
        return arr

    def _real_out(self, x: np.ndarray, multiplier_real_even: bool) -> bool:
        return bool(np.isrealobj(x) and multiplier_real_even)

    def apply(self, x) -> np.ndarray:
        x = self._check(x)
        c = self.spectrum * self.to_spectral(x)
        return self.from_spectral(c, self._real_out(x, self.hermitian))

    def apply_adjoint(self, y) -> np.ndarray:
        y = self._check(y)
        c = np.conj(self.spectrum) * self.to_spectral(y)
        return self.from_spectral(c, self._real_out(y, self.hermitian))

    def apply_fn(self, h, x) -> np.ndarray:
        """``h(A*A) x`` for an index function, callable or scalar ``h``."""
        x = self._check(x)
        hv = eval_fn(h, self.gram)
        real = np.isrealobj(hv) and self._real_out(x, self.gram_even)
        return self.from_spectral(hv * self.to_spectral(x), real)

    def norm(self, x) -> float:
        return self.spectral_norm(self.to_spectral(self._check(x)))

    def spectral_norm(self, c: np.ndarray, weights: np.ndarray | None = None) -> float:
        """Norm from spectral coefficients, optionally weighted."""
        a2 = np.abs(c) ** 2
        if weights is not None:
            a2 = weights * a2
        return math.sqrt(self.weight * float(np.sum(a2)))

    def inner(self, x, y) -> complex:
        """``(x, y)`` linear in the first argument."""
        x, y = self._check(x), self._check(y)
        return self._inner(x, y)

    @abc.abstractmethod
    def _inner(self, x: np.ndarray, y: np.ndarray) -> complex: ...

    def chi_weights(self, chi) -> np.ndarray:
        """``chi(1/|s|**2)``: the spectral weights of ``||.||_chi`` with ``T = (A*A)^{-1}``."""
        g = self.gram
        if np.any(g == 0):
            raise SpectrumError("chi norms need an injective operator")
        if isinstance(chi, IndexFn):
            return eval_clipped(chi, 1.0 / g)
        return eval_fn(chi, 1.0 / g)

    def chi_norm(self, x, chi) -> float:
        """``||x||_chi`` computed spectrally; ``inf`` when ``x`` is outside ``X_chi``."""
        x = self._check(x)
        return self.spectral_norm(self.to_spectral(x), self.chi_weights(chi))


class DiagonalOperator(SpectralOperator):
    """Singular-system operator ``x -> sigma * x`` with descending ``sigma > 0``."""

    def __init__(self, sigma):
        s = np.array(sigma, dtype=float, ndmin=1)
        if s.ndim != 1 or s.size == 0:
            raise ValueError("sigma must be a non-empty 1-D array")
        if not np.all(np.isfinite(s)) or not np.all(s > 0):
            raise SpectrumError("singular values must be finite and strictly positive")
        if np.any(np.diff(s) > 0):
            raise ValueError("singular values must be stored in descending order")
        s.setflags(write=False)
        self._sigma = s

    def __repr__(self) -> str:
        return f"DiagonalOperator(n={self.size})"

    @property
    def sigma(self) -> np.ndarray:
        return self._sigma

    @property
    def spectrum(self):
        return self._sigma

    @property
    def size(self):
        return self._sigma.size

    @property
    def weight(self):
        return 1.0

    def to_spectral(self, x):
        return np.asarray(x)

    def from_spectral(self, c, real):
        return np.real(c) if real else c

    def _inner(self, x, y):
        return complex(np.sum(x * np.conj(y)))

    @classmethod
    def power_decay(cls, n: int, p: float = 1.0) -> "DiagonalOperator":
        """``sigma_i = i**-p`` for ``i = 1..n``."""
        return cls(np.arange(1, n + 1, dtype=float) ** (-p))

    @classmethod
    def exponential_decay(cls, n: int, rate: float = 1.0) -> "DiagonalOperator":
        """``sigma_i = exp(-rate * i)`` for ``i = 1..n``."""
        return cls(np.exp(-rate * np.arange(1, n + 1, dtype=float)))


class FourierMultiplier(SpectralOperator):
    """Periodic convolution given by multiplier samples on a FourierGrid.

    Parameters
    ----------
    grid : FourierGrid
    multiplier : array_like
        Samples ``k(omega_j)`` in ``fftfreq`` order.
    symbol : callable, optional
        Continuous symbol ``omega -> k(omega)`` used by range checks.
    name : str
    """

    def __init__(self, grid: FourierGrid, multiplier, symbol: Callable | None = None, name: str = ""):
        m = np.array(multiplier)
        if m.shape != (grid.N,):
            raise ValueError(f"multiplier must have shape ({grid.N},)")
        if not np.all(np.isfinite(m)):
            raise ValueError("multiplier values must be finite")
        if np.iscomplexobj(m) and np.all(m.imag == 0):
            m = m.real
        m.setflags(write=False)
        self._grid = grid
        self._m = m
        self.symbol = symbol
        self.name = name
        rev = np.conj(np.roll(m[::-1], 1))
        self._hermitian = bool(np.allclose(m, rev, rtol=1e-14, atol=0.0))
        self._gram_even = bool(np.allclose(np.abs(m), np.abs(rev), rtol=1e-14, atol=0.0))

    def __repr__(self) -> str:
        return f"FourierMultiplier({self.name or 'custom'}, N={self._grid.N}, L={self._grid.L})"

    @classmethod
    def from_symbol(cls, grid: FourierGrid, symbol: Callable, name: str = "") -> "FourierMultiplier":
        return cls(grid, symbol(grid.omega), symbol=symbol, name=name)

    @property
    def grid(self):
        return self._grid

    @property
    def spectrum(self):
        return self._m

    @property
    def multiplier(self) -> np.ndarray:
        return self._m

    @property
    def size(self):
        return self._grid.N

    @property
    def weight(self):
        return self._grid.spectral_weight

    @property
    def hermitian(self):
        return self._hermitian

    @property
    def gram_even(self):
        return self._gram_even

    @property
    def has_zeros(self) -> bool:
        """Exact zeros or sign changes between adjacent positive frequencies."""
        if np.any(self._m == 0):
            return True
        if np.iscomplexobj(self._m):
            return False
        w = self._grid.omega
        pos = np.argsort(w)
        m = self._m[pos][w[pos] > 0]
        return bool(np.any(np.sign(m[:-1]) != np.sign(m[1:])))

    @property
    def injective(self):
        return not self.has_zeros

    def to_spectral(self, x):
        return np.fft.fft(x)

    def from_spectral(self, c, real):
        out = np.fft.ifft(c)
        return out.real if real else out

    def _inner(self, x, y):
        return complex(self._grid.dx * np.sum(x * np.conj(y)))


class GOperator(SpectralOperator):
    """Self-adjoint positive definite penalty operator with real positive spectrum.

    Parameters
    ----------
    values : array_like
        Spectral values, all > 0.
    grid : FourierGrid, optional
        Omit for a diagonal G.
    squared_symbol : callable, optional
        ``omega -> g(omega)**2`` for range-inclusion checks.
    """

    def __init__(self, values, grid: FourierGrid | None = None, squared_symbol: Callable | None = None):
        v = np.array(values, dtype=float, ndmin=1)
        if not np.all(np.isfinite(v)) or not np.all(v > 0):
            raise SpectrumError("G needs finite, strictly positive spectral values")
        if grid is not None and v.shape != (grid.N,):
            raise ValueError("G values must match the grid size")
        v.setflags(write=False)
        self._v = v
        self._grid = grid
        self.squared_symbol = squared_symbol

    def __repr__(self) -> str:
        return f"GOperator(n={self.size}, fourier={self._grid is not None})"

    @property
    def grid(self):
        return self._grid

    @property
    def spectrum(self):
        return self._v

    @property
    def size(self):
        return self._v.size

    @property
    def weight(self):
        return 1.0 if self._grid is None else self._grid.spectral_weight

    def to_spectral(self, x):
        return np.asarray(x) if self._grid is None else np.fft.fft(x)

    def from_spectral(self, c, real):
        out = c if self._grid is None else np.fft.ifft(c)
        return np.real(out) if real else out

    def _inner(self, x, y):
        dx = 1.0 if self._grid is None else self._grid.dx
        return complex(dx * np.sum(x * np.conj(y)))

    def compatible(self, A: SpectralOperator) -> bool:
        """Same spectral basis as ``A`` (same grid or same diagonal size)."""
        if self._grid is None:
            return isinstance(A, DiagonalOperator) and A.size == self.size
        return A.grid == self._grid


def identity_G(A: SpectralOperator) -> GOperator:
    """``G = I`` in the spectral basis of ``A``."""
    return GOperator(np.ones(A.size), A.grid, squared_symbol=lambda w: np.ones_like(w))


def sobolev_G(grid: FourierGrid, l: int) -> GOperator:
    """Penalty of Sobolev order ``l``: multiplier ``nu_l(omega**2)**-1/2``."""
    nu = SobolevPoly(l)

    def sq(w):
        return 1.0 / eval_fn(nu, np.asarray(w, dtype=float) ** 2)

    return GOperator(np.sqrt(sq(grid.omega)), grid, squared_symbol=sq)
