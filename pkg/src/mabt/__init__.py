"""Lower confidence bounds for the performance of models picked by data-driven selection."""

from .baselines import cp_lower, delong_lower, hm_lower, sidak_adjust, wald_lower, wilson_lower
from .bounds import BoundReport, MethodSpec, compute_bound
from .estimators import PerformanceLowerBound
from .exceptions import CalibrationFailure, DegenerateTilt
from .measures import EvaluationTable, MeasureKind
from .multiplicity import mabt_lower_bound, simultaneous_bounds
from .resample import bootstrap_performance, draw_resamples
from .tilting import bt_lower_bound

__version__ = "0.1.0"

__all__ = [
    "BoundReport",
    "CalibrationFailure",
    "DegenerateTilt",
    "EvaluationTable",
    "MeasureKind",
    "MethodSpec",
    "PerformanceLowerBound",
    "bootstrap_performance",
    "bt_lower_bound",
    "compute_bound",
    "cp_lower",
    "delong_lower",
    "draw_resamples",
    "hm_lower",
    "mabt_lower_bound",
    "sidak_adjust",
    "simultaneous_bounds",
    "wald_lower",
    "wilson_lower",
]
