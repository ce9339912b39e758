"""Variable Hilbert scale error analysis for linear ill-posed problems."""

__version__ = "0.1.0"
