"""Structural smooth-transition VAR toolkit.

Simulation, penalized maximum-likelihood estimation via a three-step
procedure, identification normalization with restriction-based filtering,
joint-spectral-radius stationarity verification, Monte Carlo impulse
responses, and residual diagnostics.
"""

from .errors import (
    ConfigError,
    DomainError,
    EmptySelectionError,
    NumericError,
    ParameterError,
    ShapeError,
    SingularMatrixError,
    StvarError,
)
from .model import Dataset, ModelSpec, ParamVector, SimulationResult, residuals, simulate
from .skewt import SkewTParams
from .weights import Exogenous, Logistic, Threshold, WeightSpec
from .likelihood import PenaltyConfig, loglik, pen_loglik, penalty
from .estimate import (
    CrossSignRestriction,
    DominanceRestriction,
    GaConfig,
    NlsConfig,
    RestrictionSet,
    SignRestriction,
    Solution,
    SolutionSet,
    filter_solutions,
    normalize_solution,
    run_three_step,
)
from .stationarity import JsrBound, ergodic_report, jsr_bounds, stability_check
from .girf import GirfRequest, GirfResult, girf_run, select_histories
from .diagnostics import CorrReport, acf_ccf, qq_data
from .harness import LSTVAR1, LSTVAR2, McDesign, run_mc

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "CorrReport",
    "CrossSignRestriction",
    "Dataset",
    "DomainError",
    "DominanceRestriction",
    "EmptySelectionError",
    "Exogenous",
    "GaConfig",
    "GirfRequest",
    "GirfResult",
    "JsrBound",
    "LSTVAR1",
    "LSTVAR2",
    "Logistic",
    "McDesign",
    "ModelSpec",
    "NlsConfig",
    "NumericError",
    "ParamVector",
    "ParameterError",
    "PenaltyConfig",
    "RestrictionSet",
    "ShapeError",
    "SignRestriction",
    "SimulationResult",
    "SingularMatrixError",
    "SkewTParams",
    "Solution",
    "SolutionSet",
    "StvarError",
    "Threshold",
    "WeightSpec",
    "acf_ccf",
    "ergodic_report",
    "filter_solutions",
    "girf_run",
    "jsr_bounds",
    "loglik",
    "normalize_solution",
    "pen_loglik",
    "penalty",
    "qq_data",
    "residuals",
    "run_mc",
    "run_three_step",
    "select_histories",
    "simulate",
    "stability_check",
]
