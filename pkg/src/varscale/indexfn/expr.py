"""Expression trees for index functions on (0, inf).

Every node is an immutable dataclass.  Evaluation is vectorised over numpy
arrays; scalar input gives a Python float back.
"""

from __future__ import annotations

import abc
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..exceptions import BracketError, DomainError, ExprSyntaxError

__all__ = [
    "IndexFn",
    "Const",
    "Power",
    "Log",
    "Log1p",
    "Exp",
    "SobolevPoly",
    "Sum",
    "Product",
    "Quotient",
    "Compose",
    "Max",
    "Min",
    "Scale",
    "Reciprocal",
    "LinearCap",
    "NumericInverse",
    "Restrict",
    "identity",
    "parse",
    "INVERSE_RTOL",
    "INVERSE_MAXITER",
]

INVERSE_RTOL = 1e-12
INVERSE_MAXITER = 200

Interval = tuple[float, float]


def _as_array(lam) -> np.ndarray:
    return np.asarray(lam, dtype=float)


def _fmt(x: float) -> str:
    return repr(float(x))


def _intersect(a: Interval, b: Interval) -> Interval:
    return (max(a[0], b[0]), min(a[1], b[1]))


class IndexFn(abc.ABC):
    """Continuous positive function on (0, inf), stored as an expression tree.

    Calling an instance evaluates it.  Arithmetic operators build new trees:
    ``f + g``, ``f * g``, ``f / g``, ``c * f`` and ``f @ g`` (composition
    ``f(g(lam))``).
    """

    def __call__(self, lam):
        arr = _as_array(lam)
        if not np.all(arr > 0):
            raise DomainError("index functions are evaluated at positive arguments only")
        with np.errstate(over="ignore", divide="ignore", invalid="ignore", under="ignore"):
            out = np.asarray(self._eval(arr), dtype=float)
        return float(out) if out.ndim == 0 else out

    def log_value(self, lam) -> np.ndarray:
        """Natural log of the function value, computed without overflow where possible."""
        arr = _as_array(lam)
        if not np.all(arr > 0):
            raise DomainError("index functions are evaluated at positive arguments only")
        with np.errstate(over="ignore", divide="ignore", invalid="ignore", under="ignore"):
            return self._log_eval(arr)

    @abc.abstractmethod
    def _eval(self, lam: np.ndarray) -> np.ndarray: ...

    def _log_eval(self, lam: np.ndarray) -> np.ndarray:
        return np.log(self._eval(lam))

    def children(self) -> tuple["IndexFn", ...]:
        return ()

    def support(self) -> Interval:
        """Open interval of arguments on which evaluation is well defined."""
        lo, hi = 0.0, math.inf
        for c in self.children():
            lo, hi = _intersect((lo, hi), c.support())
        return lo, hi

    def _preimage(self, lo: float, hi: float) -> Interval | None:
        """Arguments mapped into [lo, hi]; ``None`` when not tracked."""
        return None

    @abc.abstractmethod
    def to_expr(self) -> str:
        """Prefix-notation serialisation accepted by :func:`parse`."""

    def __str__(self) -> str:
        return self.to_expr()

    def __add__(self, other):
        if isinstance(other, IndexFn):
            return Sum(self, other)
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, IndexFn):
            return Product(self, other)
        if isinstance(other, (int, float)):
            return Scale(float(other), self)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, IndexFn):
            return Quotient(self, other)
        if isinstance(other, (int, float)):
            return Scale(1.0 / float(other), self)
        return NotImplemented

    def __matmul__(self, other):
        if isinstance(other, IndexFn):
            return Compose(self, other)
        return NotImplemented


def _wrap(child: IndexFn) -> str:
    s = child.to_expr()
    return s if " " not in s else f"({s})"


def _check_child(*nodes) -> None:
    for n in nodes:
        if not isinstance(n, IndexFn):
            raise TypeError(f"expected IndexFn child, got {type(n).__name__}")


# ---------------------------------------------------------------- leaves


@dataclass(frozen=True, eq=True)
class Const(IndexFn):
    c: float

    def __post_init__(self):
        if not (self.c > 0 and math.isfinite(self.c)):
            raise ValueError("Const requires a finite c > 0")

    def _eval(self, lam):
        return np.full_like(lam, self.c)

    def _log_eval(self, lam):
        return np.full_like(lam, math.log(self.c))

    def to_expr(self):
        return f"const {_fmt(self.c)}"


@dataclass(frozen=True, eq=True)
class Power(IndexFn):
    kappa: float

    def __post_init__(self):
        if not math.isfinite(self.kappa):
            raise ValueError("Power requires a finite exponent")

    def _eval(self, lam):
        if self.kappa == 1.0:
            return lam.copy()
        return lam**self.kappa

    def _log_eval(self, lam):
        return self.kappa * np.log(lam)

    def _preimage(self, lo, hi):
        k = self.kappa
        if k == 0:
            return (0.0, math.inf) if lo <= 1.0 <= hi else (math.inf, math.inf)
        # numpy scalars saturate to inf where python floats raise
        with np.errstate(over="ignore", divide="ignore", under="ignore"):
            a = np.float64(lo) ** (1.0 / k) if lo > 0 else (0.0 if k > 0 else math.inf)
            b = np.float64(hi) ** (1.0 / k) if math.isfinite(hi) else (math.inf if k > 0 else 0.0)
        return (float(a), float(b)) if k > 0 else (float(b), float(a))

    def to_expr(self):
        return "id" if self.kappa == 1.0 else f"pow {_fmt(self.kappa)}"


def identity() -> Power:
    """The identity index function ``lam -> lam``."""
    return Power(1.0)


@dataclass(frozen=True, eq=True)
class Log(IndexFn):
    def _eval(self, lam):
        return np.log(lam)

    def to_expr(self):
        return "log"


@dataclass(frozen=True, eq=True)
class Log1p(IndexFn):
    def _eval(self, lam):
        return np.log1p(lam)

    def to_expr(self):
        return "log1p"


@dataclass(frozen=True, eq=True)
class Exp(IndexFn):
    def _eval(self, lam):
        return np.exp(lam)

    def _log_eval(self, lam):
        return lam.copy()

    def support(self):
        return (0.0, 709.0)

    def to_expr(self):
        return "exp"


@dataclass(frozen=True, eq=True)
class SobolevPoly(IndexFn):
    """``nu_k(lam) = 1 + lam + ... + lam**k``."""

    k: int

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 0:
            raise ValueError("SobolevPoly requires an integer k >= 0")
        object.__setattr__(self, "k", int(self.k))

    def _eval(self, lam):
        out = np.ones_like(lam)
        for _ in range(self.k):
            out = out * lam + 1.0
        return out

    def to_expr(self):
        return f"sob {self.k}"


# ---------------------------------------------------------------- binary


@dataclass(frozen=True, eq=True)
class _Binary(IndexFn):
    a: IndexFn
    b: IndexFn
    _token = ""

    def __post_init__(self):
        _check_child(self.a, self.b)

    def children(self):
        return (self.a, self.b)

    def to_expr(self):
        return f"{self._token} {_wrap(self.a)} {_wrap(self.b)}"


@dataclass(frozen=True, eq=True)
class Sum(_Binary):
    _token = "sum"

    def _eval(self, lam):
        return self.a._eval(lam) + self.b._eval(lam)


@dataclass(frozen=True, eq=True)
class Product(_Binary):
    _token = "prod"

    def _eval(self, lam):
        return self.a._eval(lam) * self.b._eval(lam)

    def _log_eval(self, lam):
        return self.a._log_eval(lam) + self.b._log_eval(lam)


@dataclass(frozen=True, eq=True)
class Quotient(_Binary):
    _token = "quot"

    def _eval(self, lam):
        return self.a._eval(lam) / self.b._eval(lam)

    def _log_eval(self, lam):
        return self.a._log_eval(lam) - self.b._log_eval(lam)


@dataclass(frozen=True, eq=True)
class Max(_Binary):
    _token = "max"

    def _eval(self, lam):
        return np.maximum(self.a._eval(lam), self.b._eval(lam))


@dataclass(frozen=True, eq=True)
class Min(_Binary):
    _token = "min"

    def _eval(self, lam):
        return np.minimum(self.a._eval(lam), self.b._eval(lam))


@dataclass(frozen=True, eq=True)
class Compose(IndexFn):
    """``outer(inner(lam))``."""

    outer: IndexFn
    inner: IndexFn

    def __post_init__(self):
        _check_child(self.outer, self.inner)

    def children(self):
        return (self.outer, self.inner)

    def _eval(self, lam):
        return self.outer._eval(self.inner._eval(lam))

    def _log_eval(self, lam):
        return self.outer._log_eval(self.inner._eval(lam))

    def support(self):
        inner = self.inner.support()
        olo, ohi = self.outer.support()
        if olo <= 0.0 and ohi == math.inf:
            return inner
        pre = self.inner._preimage(olo, ohi)
        return inner if pre is None else _intersect(inner, pre)

    def _preimage(self, lo, hi):
        pre = self.outer._preimage(lo, hi)
        if pre is None:
            return None
        return self.inner._preimage(*pre)

    def to_expr(self):
        return f"comp {_wrap(self.outer)} {_wrap(self.inner)}"


# ---------------------------------------------------------------- unary


@dataclass(frozen=True, eq=True)
class Scale(IndexFn):
    gamma: float
    f: IndexFn

    def __post_init__(self):
        if not (self.gamma > 0 and math.isfinite(self.gamma)):
            raise ValueError("Scale requires a finite gamma > 0")
        _check_child(self.f)

    def children(self):
        return (self.f,)

    def _eval(self, lam):
        return self.gamma * self.f._eval(lam)

    def _log_eval(self, lam):
        return math.log(self.gamma) + self.f._log_eval(lam)

    def _preimage(self, lo, hi):
        return self.f._preimage(lo / self.gamma, hi / self.gamma)

    def to_expr(self):
        return f"scale {_fmt(self.gamma)} {_wrap(self.f)}"


@dataclass(frozen=True, eq=True)
class Reciprocal(IndexFn):
    f: IndexFn

    def __post_init__(self):
        _check_child(self.f)

    def children(self):
        return (self.f,)

    def _eval(self, lam):
        return 1.0 / self.f._eval(lam)

    def _log_eval(self, lam):
        return -self.f._log_eval(lam)

    def to_expr(self):
        return f"recip {_wrap(self.f)}"


@dataclass(frozen=True, eq=True)
class LinearCap(IndexFn):
    """``slope * lam`` for ``lam <= knot`` and ``f(lam)`` above the knot."""

    knot: float
    slope: float
    f: IndexFn

    def __post_init__(self):
        if not (self.knot > 0 and self.slope > 0):
            raise ValueError("LinearCap requires knot > 0 and slope > 0")
        _check_child(self.f)

    def children(self):
        return (self.f,)

    def _eval(self, lam):
        out = self.slope * lam
        hi = lam > self.knot
        if np.any(hi):
            out = np.array(out, dtype=float, copy=True)
            out[hi] = self.f._eval(lam[hi])
        return out

    def support(self):
        lo, hi = self.f.support()
        return (0.0 if lo <= self.knot else lo, hi)

    def to_expr(self):
        return f"lincap {_fmt(self.knot)} {_fmt(self.slope)} {_wrap(self.f)}"


@dataclass(frozen=True, eq=True)
class Restrict(IndexFn):
    """``f`` with a declared evaluation floor; smaller arguments raise."""

    floor: float
    f: IndexFn

    def __post_init__(self):
        if not self.floor > 0:
            raise ValueError("Restrict requires floor > 0")
        _check_child(self.f)

    def children(self):
        return (self.f,)

    def _eval(self, lam):
        if np.any(lam < self.floor):
            raise DomainError(f"argument below the evaluation floor {self.floor!r}")
        return self.f._eval(lam)

    def _log_eval(self, lam):
        if np.any(lam < self.floor):
            raise DomainError(f"argument below the evaluation floor {self.floor!r}")
        return self.f._log_eval(lam)

    def support(self):
        lo, hi = self.f.support()
        return (max(lo, self.floor), hi)

    def to_expr(self):
        return f"floor {_fmt(self.floor)} {_wrap(self.f)}"


@dataclass(frozen=True, eq=True)
class NumericInverse(IndexFn):
    """Inverse of an increasing ``f`` on ``[lo, hi]`` by log-space bisection."""

    f: IndexFn
    lo: float
    hi: float
    rtol: float = field(default=INVERSE_RTOL, compare=False)
    maxiter: int = field(default=INVERSE_MAXITER, compare=False)

    def __post_init__(self):
        _check_child(self.f)
        if not (0 < self.lo < self.hi < math.inf):
            raise ValueError("NumericInverse requires 0 < lo < hi < inf")

    def children(self):
        return (self.f,)

    def _ends(self) -> tuple[float, float]:
        with np.errstate(over="ignore"):  # an infinite end is a valid image bound
            ends = self.f._eval(np.array([self.lo, self.hi]))
        return float(ends[0]), float(ends[1])

    def _eval(self, y):
        flo, fhi = self._ends()
        slack = 4 * np.finfo(float).eps
        outside = (y < flo * (1 - slack)) | (y > fhi * (1 + slack)) | ~np.isfinite(y)
        if np.any(outside):
            bad = y[outside].flat[0]
            raise BracketError(
                f"target {bad!r} outside the bracket image [{flo!r}, {fhi!r}]"
            )
        a = np.full(y.shape, math.log(self.lo))
        b = np.full(y.shape, math.log(self.hi))
        for _ in range(self.maxiter):
            m = 0.5 * (a + b)
            up = self.f._eval(np.exp(m)) < y
            a = np.where(up, m, a)
            b = np.where(up, b, m)
            if np.all(b - a <= self.rtol):
                return np.exp(0.5 * (a + b))
        raise BracketError("bisection did not reach the requested tolerance")

    def support(self):
        flo, fhi = self._ends()
        return (flo, fhi)

    def _preimage(self, lo, hi):
        a, b = max(lo, self.lo), min(hi, self.hi)
        if a > b:
            return (math.inf, math.inf)
        v = self.f._eval(np.array([a, b]))
        return (float(v[0]), float(v[1]))

    def to_expr(self):
        return f"inv {_fmt(self.lo)} {_fmt(self.hi)} {_wrap(self.f)}"


# ---------------------------------------------------------------- parser

_LEAVES: dict[str, Callable[[], IndexFn]] = {
    "id": identity,
    "log": Log,
    "log1p": Log1p,
    "exp": Exp,
}
_BINARY = {
    "sum": Sum,
    "prod": Product,
    "quot": Quotient,
    "comp": Compose,
    "max": Max,
    "min": Min,
}


def _tokens(text: str) -> list[str]:
    return text.replace("(", " ( ").replace(")", " ) ").split()


def parse(text: str) -> IndexFn:
    """Parse the prefix-notation serialisation produced by ``to_expr``.

    Grammar (parentheses are optional grouping)::

        expr := '(' expr ')' | 'id' | 'log' | 'log1p' | 'exp'
              | 'const' c | 'pow' k | 'sob' k
              | ('sum'|'prod'|'quot'|'comp'|'max'|'min') expr expr
              | 'scale' g expr | 'recip' expr | 'lincap' knot slope expr
              | 'inv' lo hi expr | 'floor' m expr
              | 'eddington' | 'logcap' | 'overlog'

    Examples
    --------
    >>> parse("quot id log")(100.0) == 100.0 / np.log(100.0)
    True
    """
    from .family import NAMED  # late import: family builds on this module

    toks = _tokens(text)
    pos = 0

    def need() -> str:
        nonlocal pos
        if pos >= len(toks):
            raise ExprSyntaxError(f"unexpected end of expression in {text!r}")
        tok = toks[pos]
        pos += 1
        return tok

    def number() -> float:
        tok = need()
        try:
            return float(tok)
        except ValueError:
            raise ExprSyntaxError(f"expected a number, got {tok!r}") from None

    def expr() -> IndexFn:
        tok = need()
        try:
            if tok == "(":
                node = expr()
                if need() != ")":
                    raise ExprSyntaxError("missing ')'")
                return node
            if tok in _LEAVES:
                return _LEAVES[tok]()
            if tok in NAMED:
                return NAMED[tok]()
            if tok == "const":
                return Const(number())
            if tok == "pow":
                return Power(number())
            if tok == "sob":
                return SobolevPoly(number())
            if tok in _BINARY:
                return _BINARY[tok](expr(), expr())
            if tok == "scale":
                g = number()
                return Scale(g, expr())
            if tok == "recip":
                return Reciprocal(expr())
            if tok == "lincap":
                knot, slope = number(), number()
                return LinearCap(knot, slope, expr())
            if tok == "inv":
                lo, hi = number(), number()
                return NumericInverse(expr(), lo, hi)
            if tok == "floor":
                m = number()
                return Restrict(m, expr())
        except (ValueError, TypeError) as exc:
            if isinstance(exc, ExprSyntaxError):
                raise
            raise ExprSyntaxError(f"invalid node {tok!r}: {exc}") from None
        raise ExprSyntaxError(f"unknown token {tok!r}")

    node = expr()
    if pos != len(toks):
        raise ExprSyntaxError(f"trailing tokens {toks[pos:]!r}")
    return node
