"""Forward operators, penalty operators, Hilbert-scale norms and range tests."""

from .bessel import bessel_j1, bessel_j1_zero
from .gridio import read_grid_function, write_grid_function
from .kernels import (
    KERNELS,
    eddington_L,
    eddington_symbol,
    gaussian_symbol,
    make_kernel,
    out_of_focus_symbol,
    partial_blur_symbol,
)
from .ranges import (
    HSResult,
    RangeInclusion,
    chi_is_unbounded,
    hilbert_norm,
    hs_range_test,
    range_inclusion_check,
)
from .spectral import (
    DiagonalOperator,
    FourierGrid,
    FourierMultiplier,
    GOperator,
    SpectralOperator,
    eval_clipped,
    eval_fn,
    identity_G,
    sobolev_G,
)

__all__ = [name for name in dir() if not name.startswith("_")]
