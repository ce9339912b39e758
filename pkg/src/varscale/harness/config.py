"""Experiment configuration loaded from JSON."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from ..exceptions import ConfigError, ExprSyntaxError
from ..indexfn import IndexFn, Power, parse
from ..operators import KERNELS, DiagonalOperator, SpectralOperator, make_kernel
from ..regularize import SCHEMES, APriori, ChengYamamoto, Discrepancy, ParamChoice, RegScheme

__all__ = [
    "OperatorSpec",
    "SourceSpec",
    "NoiseSpec",
    "DeltaGrid",
    "ExperimentConfig",
    "load_config",
    "read_json",
    "ModcontConfig",
    "SEED_MAX",
]

SEED_MAX = 2**64 - 1
MIN_DELTAS = 8


def _take(d: Mapping[str, Any], cls, what: str):
    if not isinstance(d, Mapping):
        raise ConfigError(f"{what} must be a JSON object")
    names = set(cls.__dataclass_fields__)
    extra = set(d) - names
    if extra:
        raise ConfigError(f"unknown {what} field(s): {sorted(extra)}")
    try:
        return cls(**d)
    except TypeError as exc:
        raise ConfigError(f"invalid {what}: {exc}") from None


@dataclass(frozen=True)
class OperatorSpec:
    """Forward operator.

    ``kind="diagonal"`` builds ``sigma_i = i**-p`` (``decay="power"``) or
    ``exp(-p i)`` (``decay="exponential"``) with ``n`` entries; any kernel
    name builds a Fourier multiplier on an ``N``-point grid of length ``L``.
    """

    kind: str = "diagonal"
    n: int = 400
    decay: str = "power"
    p: float = 1.0
    N: int = 4096
    L: float = 20.0
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind == "diagonal":
            if not (isinstance(self.n, int) and self.n >= 1):
                raise ConfigError("diagonal operator needs integer n >= 1")
            if self.decay not in ("power", "exponential"):
                raise ConfigError("decay must be 'power' or 'exponential'")
            if not self.p > 0:
                raise ConfigError("decay exponent p must be positive")
        elif self.kind not in KERNELS:
            raise ConfigError(f"unknown operator kind {self.kind!r}; choose 'diagonal' or one of {sorted(KERNELS)}")

    def build(self) -> SpectralOperator:
        if self.kind == "diagonal":
            if self.decay == "power":
                return DiagonalOperator.power_decay(self.n, self.p)
            return DiagonalOperator.exponential_decay(self.n, self.p)
        return make_kernel({"kernel": self.kind, "N": self.N, "L": self.L, **self.params})


@dataclass(frozen=True)
class SourceSpec:
    """Exact solution.

    kind : {"monomial", "psi_bar", "sobolev", "gaussian"}
        ``monomial``: ``f = (A*A)**mu v``; ``psi_bar``: ``f = psi_bar(A*A) v``
        for an expression ``psi_bar`` (optionally with its ``Psi`` for the
        bound column); ``sobolev``: ``f = G w`` for the penalty ``G``;
        ``gaussian``: Gaussian-spectrum data ``g_hat = exp(-w**2/2) v_hat``.
    colour : {"white", "octave"}
        Spectrum of ``v`` (``octave``: amplitude ``|w|**-1/2``, zero mean).
    """

    kind: str = "monomial"
    mu: float = 0.5
    psi_bar: str | None = None
    Psi: str | None = None
    R1: float = 1.0
    colour: str = "white"

    def __post_init__(self):
        if self.kind not in ("monomial", "psi_bar", "sobolev", "gaussian"):
            raise ConfigError(f"unknown source kind {self.kind!r}")
        if self.kind == "monomial" and not self.mu > 0:
            raise ConfigError("monomial source needs mu > 0")
        if self.kind == "psi_bar" and not self.psi_bar:
            raise ConfigError("psi_bar source needs an expression")
        if not self.R1 > 0:
            raise ConfigError("R1 must be positive")
        if self.colour not in ("white", "octave"):
            raise ConfigError("colour must be 'white' or 'octave'")
        for expr in (self.psi_bar, self.Psi):
            if expr is not None:
                _parse(expr)

    def psi_bar_fn(self) -> IndexFn | None:
        if self.kind == "monomial":
            return Power(self.mu)
        if self.kind == "psi_bar":
            return _parse(self.psi_bar)
        return None

    def Psi_fn(self) -> IndexFn | None:
        if self.Psi is not None:
            return _parse(self.Psi)
        if self.kind == "monomial":
            return Power(1.0 / (2.0 * self.mu + 1.0))
        return None


def _parse(text: str) -> IndexFn:
    try:
        return parse(text)
    except ExprSyntaxError as exc:
        raise ConfigError(f"bad expression {text!r}: {exc}") from None


@dataclass(frozen=True)
class NoiseSpec:
    """Noise direction model; every direction is rescaled to norm ``delta``.

    model : {"white", "gaussian"}
        ``gaussian`` broadens white noise by ``exp(-w**2/2)`` (Fourier grids).
    """

    model: str = "white"

    def __post_init__(self):
        if self.model not in ("white", "gaussian"):
            raise ConfigError(f"unknown noise model {self.model!r}")


@dataclass(frozen=True)
class DeltaGrid:
    """Geometric noise levels from ``start`` down to ``stop``."""

    start: float = 1e-2
    stop: float = 1e-6
    count: int = 9

    def __post_init__(self):
        if not (isinstance(self.count, int) and self.count >= MIN_DELTAS):
            raise ConfigError(f"delta grid needs an integer count >= {MIN_DELTAS}")
        if not (0 < self.stop < self.start and math.isfinite(self.start)):
            raise ConfigError("delta grid must be strictly decreasing and positive")

    def values(self) -> np.ndarray:
        return np.geomspace(self.start, self.stop, self.count)


_RULES = {"apriori": APriori, "cheng_yamamoto": ChengYamamoto, "discrepancy": Discrepancy}


@dataclass(frozen=True)
class ExperimentConfig:
    """Complete description of one rate experiment."""

    operator: OperatorSpec = field(default_factory=OperatorSpec)
    source: SourceSpec = field(default_factory=SourceSpec)
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    deltas: DeltaGrid = field(default_factory=DeltaGrid)
    scheme: str = "tikhonov"
    choice: dict = field(default_factory=lambda: {"rule": "apriori"})
    seed: int = 42
    out: str | None = None
    trim: int = 0
    slope_tol: float = 0.1
    noiseless: bool = False
    eta_cap: float = 1e-300
    workers: int = 1

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}; choose from {sorted(SCHEMES)}")
        if not (isinstance(self.seed, int) and not isinstance(self.seed, bool) and 0 <= self.seed <= SEED_MAX):
            raise ConfigError("seed must be an integer in [0, 2**64)")
        if not (isinstance(self.trim, int) and 0 <= self.trim <= 2):
            raise ConfigError("trim must be 0, 1 or 2 (largest-delta rows only)")
        if not self.slope_tol > 0:
            raise ConfigError("slope_tol must be positive")
        if not (isinstance(self.workers, int) and self.workers >= 1):
            raise ConfigError("workers must be a positive integer")
        self.rule()  # validate eagerly

    @classmethod
    def from_dict(cls, d: Mapping[str, Any], base: "ExperimentConfig | None" = None) -> "ExperimentConfig":
        """Build from a mapping; with ``base`` the mapping overrides its fields."""
        if not isinstance(d, Mapping):
            raise ConfigError("config must be a JSON object")
        d = _merge(base.to_dict(), d) if base is not None else dict(d)
        parts = {
            "operator": OperatorSpec,
            "source": SourceSpec,
            "noise": NoiseSpec,
            "deltas": DeltaGrid,
        }
        for key, cls_ in parts.items():
            if key in d:
                d[key] = _take(d[key], cls_, key)
        return _take(d, cls, "config")

    @classmethod
    def from_json(cls, path: str | Path, base: "ExperimentConfig | None" = None) -> "ExperimentConfig":
        return load_config(path, base)

    def to_dict(self) -> dict:
        return asdict(self)

    def with_overrides(self, **kw) -> "ExperimentConfig":
        """Copy with the non-``None`` keyword values replaced."""
        return replace(self, **{k: v for k, v in kw.items() if v is not None})

    def build_operator(self) -> SpectralOperator:
        return self.operator.build()

    def build_scheme(self) -> RegScheme:
        return SCHEMES[self.scheme]

    def rule(self) -> ParamChoice:
        """Parameter choice rule; ``apriori`` defaults to the source's ``psi_bar``."""
        c = dict(self.choice)
        name = c.pop("rule", None)
        if name not in _RULES:
            raise ConfigError(f"unknown choice rule {name!r}; choose from {sorted(_RULES)}")
        if name == "apriori":
            expr = c.pop("psi_bar", None)
            if c:
                raise ConfigError(f"unknown apriori field(s): {sorted(c)}")
            pb = _parse(expr) if expr is not None else self.source.psi_bar_fn()
            if pb is None:
                raise ConfigError("apriori rule needs psi_bar for this source")
            return APriori(pb)
        try:
            return _RULES[name](**c)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid {name} parameters: {exc}") from None


def _merge(base: dict, over: Mapping[str, Any]) -> dict:
    out = dict(base)
    for k, v in over.items():
        if isinstance(v, Mapping) and isinstance(out.get(k), dict) and k != "choice":
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def read_json(path: str | Path) -> Any:
    """Parse a JSON file, mapping I/O and syntax problems to :class:`ConfigError`."""
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None


def load_config(path: str | Path, base: ExperimentConfig | None = None) -> ExperimentConfig:
    """Read an :class:`ExperimentConfig` from a JSON file."""
    return ExperimentConfig.from_dict(read_json(path), base)


@dataclass(frozen=True)
class ModcontConfig:
    """Modulus-of-continuity comparison: both bounds for each ``R`` over a delta grid."""

    psi: str = "pow 0.5"
    R: tuple = (1.0,)
    deltas: DeltaGrid = field(default_factory=lambda: DeltaGrid(1.0, 1e-6, 25))
    relative: bool = True
    tol: float = 1e-8

    def __post_init__(self):
        _parse(self.psi)
        r = (self.R,) if isinstance(self.R, (int, float)) else tuple(self.R)
        if not r or not all(isinstance(x, (int, float)) and x > 0 for x in r):
            raise ConfigError("R must be a positive number or a list of them")
        object.__setattr__(self, "R", tuple(float(x) for x in r))
        if not self.tol > 0:
            raise ConfigError("tol must be positive")

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "ModcontConfig":
        if not isinstance(d, Mapping):
            raise ConfigError("config must be a JSON object")
        d = dict(d)
        if "deltas" in d:
            d["deltas"] = _take(d["deltas"], DeltaGrid, "deltas")
        return _take(d, cls, "modcont config")

    def psi_fn(self) -> IndexFn:
        return _parse(self.psi)
