"""Log-periodic critical-time analysis of financial time series.

A price approaching a regime change often oscillates with a period that
is constant in the logarithm of the distance to a critical time tc: each
successive swing is a fixed factor (the scaling ratio, close to 2)
shorter than the one before.  This package fits that structure

    phi(t) = x**alpha * (A + B * cos(omega * ln x + phi)),
    x = |t - tc|,   omega = 2 * pi / ln(lambda),

to a series by exact linear least squares nested inside a grid scan over
the nonlinear parameters, estimates tc with an uncertainty band, emits
forward scenarios, and generates synthetic series for verification.
"""

from .errors import (
    DegenerateDesignError,
    DomainError,
    DuplicateTimestampError,
    EmptyInputError,
    FormatError,
    InsufficientDataError,
    LogPeriodicError,
    NoFitError,
    PhaseDomainError,
    SingularityGuardError,
)
from .estimator import LogPeriodicRegressor
from .fit import (
    ConsistencyThresholds,
    FitConfig,
    FitResult,
    GridCell,
    LambdaMode,
    ScanReport,
    consistency_gate,
    default_tc_range,
    fit_series,
    linear_subfit,
    refine,
    scan,
    window_candidates,
)
from .model import (
    X_MIN,
    Extremum,
    LogPeriodicParams,
    ModelCurve,
    Phase,
    canonical_phase,
    distance,
    evaluate,
    extrema_schedule,
    oscillatory_factor,
    sample_curve,
)
from .scenario import ComparisonReport, Scenario, build_scenario, compare_to_actual
from .svgchart import render_chart
from .series import (
    ParseResult,
    TimePoint,
    TimeSeries,
    Window,
    day_offset,
    log_transform,
    offset_date,
    parse_csv,
    parse_time,
)
from .synth import SynthConfig, SynthResult, generate, sample_times

__version__ = "0.1.0"

__all__ = [
    "ComparisonReport",
    "ConsistencyThresholds",
    "DegenerateDesignError",
    "DomainError",
    "DuplicateTimestampError",
    "EmptyInputError",
    "Extremum",
    "FitConfig",
    "FitResult",
    "FormatError",
    "GridCell",
    "InsufficientDataError",
    "LambdaMode",
    "LogPeriodicError",
    "LogPeriodicParams",
    "LogPeriodicRegressor",
    "ModelCurve",
    "NoFitError",
    "ParseResult",
    "Phase",
    "PhaseDomainError",
    "ScanReport",
    "Scenario",
    "SingularityGuardError",
    "SynthConfig",
    "SynthResult",
    "TimePoint",
    "TimeSeries",
    "Window",
    "X_MIN",
    "build_scenario",
    "canonical_phase",
    "compare_to_actual",
    "consistency_gate",
    "day_offset",
    "default_tc_range",
    "distance",
    "evaluate",
    "extrema_schedule",
    "fit_series",
    "generate",
    "linear_subfit",
    "log_transform",
    "offset_date",
    "oscillatory_factor",
    "parse_csv",
    "parse_time",
    "render_chart",
    "refine",
    "sample_curve",
    "sample_times",
    "scan",
    "window_candidates",
    "__version__",
]
