"""Synthetic experiments, rate fits, reports, acceptance checks and the CLI."""

from .checks import CRITERIA, CriterionResult, run_all, run_criterion
from .config import (
    DeltaGrid,
    ExperimentConfig,
    ModcontConfig,
    NoiseSpec,
    OperatorSpec,
    SourceSpec,
    load_config,
)
from .experiments import (
    deblur_config,
    eddington_bound,
    eddington_config,
    eddington_precondition_check,
    norm_equivalence_check,
    run_deblur_experiment,
    run_eddington_experiment,
    run_rate_experiment,
)
from .fitting import RateFitWarning, fit_rate_exponent
from .reports import CSV_COLUMNS, RateReport, RateRow

__all__ = [name for name in dir() if not name.startswith("_")]
