"""Exception hierarchy shared by all modules."""


class VarscaleError(Exception):
    """Base class for package errors."""


class DomainError(VarscaleError, ValueError):
    """Argument outside the evaluation domain of an index function."""


class BracketError(VarscaleError, ArithmeticError):
    """A bracketed search could not straddle or reach its target."""


class PreconditionError(VarscaleError, ValueError):
    """A sampled analytic precondition (monotonicity, concavity, ...) failed."""


class SpectrumError(VarscaleError, ValueError):
    """Operator spectrum unsuitable for the requested computation."""


class ConfigError(VarscaleError, ValueError):
    """Invalid experiment configuration."""


class ExprSyntaxError(VarscaleError, ValueError):
    """Malformed textual index-function expression."""
