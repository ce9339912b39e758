"""Index functions: expression trees, sampled property checks and transforms."""

from .expr import (
    Compose,
    Const,
    Exp,
    IndexFn,
    LinearCap,
    Log,
    Log1p,
    Max,
    Min,
    NumericInverse,
    Power,
    Product,
    Quotient,
    Reciprocal,
    Restrict,
    Scale,
    SobolevPoly,
    Sum,
    identity,
    parse,
)
from .family import (
    CONCAVE_FAMILY,
    FAMILY,
    NAMED,
    eddington_Psi,
    log_capped,
    over_log,
    over_log_capped,
)
from .props import (
    FnProps,
    GridWarning,
    Verdict,
    concave_by_divided_differences,
    default_grid,
    verify_props,
)
from .transforms import (
    WIDE_BRACKET,
    chi_from_Psi,
    concave_linear_extension,
    involution_S,
    inverse,
    psi_bar_from_Psi,
    safe_bracket,
    sqrt_square,
    support_grid,
    theta_fn,
    theta_inverse,
)

__all__ = [name for name in dir() if not name.startswith("_")]
