"""Built-in index functions with hand-declared properties.

The declarations act as self-tests for the sampled verifier.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .expr import (
    Compose,
    Const,
    Exp,
    IndexFn,
    LinearCap,
    Log,
    Log1p,
    Power,
    Quotient,
    Scale,
    SobolevPoly,
    Sum,
)

__all__ = [
    "eddington_Psi",
    "log_capped",
    "over_log_capped",
    "over_log",
    "Member",
    "FAMILY",
    "CONCAVE_FAMILY",
    "NAMED",
]


def eddington_Psi() -> IndexFn:
    """``lam`` on (0, 1], ``(1 + log(lam)/2)**2`` above."""
    return LinearCap(1.0, 1.0, Compose(Power(2.0), Sum(Const(1.0), Scale(0.5, Log()))))


def log_capped() -> IndexFn:
    """``log(lam)`` above ``e`` with the tangent line ``lam/e`` below."""
    return LinearCap(math.e, 1.0 / math.e, Log())


def over_log() -> IndexFn:
    """``lam / log(lam)``, concave only for ``lam >= e**2``."""
    return Quotient(Power(1.0), Log())


def over_log_capped() -> IndexFn:
    """``lam/log(lam)`` above ``e**2`` with the tangent line ``lam/2`` below."""
    return LinearCap(math.e**2, 0.5, over_log())


@dataclass(frozen=True)
class Member:
    """Family entry: constructor, declared properties and a grid to check them on."""

    make: Callable[[], IndexFn]
    monotone: bool
    concave: bool
    rate: bool
    grid: tuple[float, float] = (1e-8, 1e8)
    concave_from: float | None = None
    extra: dict = field(default_factory=dict)

    def sample_grid(self, n: int = 256) -> np.ndarray:
        return np.geomspace(*self.grid, n)


FAMILY: dict[str, Member] = {
    "pow0.25": Member(lambda: Power(0.25), True, True, True),
    "pow0.5": Member(lambda: Power(0.5), True, True, True),
    "pow0.75": Member(lambda: Power(0.75), True, True, True),
    "id": Member(lambda: Power(1.0), True, True, True),
    "pow2": Member(lambda: Power(2.0), True, False, True, grid=(1e-4, 1e4)),
    "recip": Member(lambda: Power(-1.0), False, False, False),
    "log1p": Member(Log1p, True, True, True),
    "logcap": Member(log_capped, True, True, True),
    "overlogcap": Member(over_log_capped, True, True, True),
    "overlog": Member(over_log, False, False, False, grid=(1e-4, 1e8), concave_from=math.e**2),
    "eddington": Member(eddington_Psi, True, True, True),
    "exp": Member(Exp, True, False, False, grid=(1e-4, 1e2)),
    "sob1": Member(lambda: SobolevPoly(1), True, True, False),
    "sob2": Member(lambda: SobolevPoly(2), True, False, False, grid=(1e-4, 1e4)),
    "const": Member(lambda: Const(2.0), True, True, False),
}

CONCAVE_FAMILY: dict[str, Callable[[], IndexFn]] = {
    "pow0.25": lambda: Power(0.25),
    "pow0.5": lambda: Power(0.5),
    "pow0.75": lambda: Power(0.75),
    "overlogcap": over_log_capped,
    "logcap": log_capped,
    "eddington": eddington_Psi,
}

NAMED: dict[str, Callable[[], IndexFn]] = {
    "eddington": eddington_Psi,
    "logcap": log_capped,
    "overlog": over_log_capped,
}
