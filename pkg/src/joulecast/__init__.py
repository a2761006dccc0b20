"""joulecast: GPU power-trace analysis and program energy prediction.

The pipeline mirrors a bench measurement workflow on synthetic data:
generate or ingest a power trace, approximate it by a step function,
derive per-element cost metrics, fit inverse-power models to them, and
combine the fitted models with a workload decomposition to predict total
execution time and energy.
"""

from .errors import (
    ConfigError,
    DomainError,
    IllConditionedError,
    IncompleteModelError,
    InsufficientDataError,
    JoulecastError,
    LabelingError,
    NonUniformSamplingError,
    NumericalError,
    ResolutionError,
    TimestampOrderError,
    TraceCSVError,
    TraceRangeError,
    UnderdeterminedError,
)
from .predictor import (
    ComparisonReport,
    OperationKind,
    PhaseBudget,
    Prediction,
    PredictionTerm,
    UnitaryModelSet,
    WorkloadSpec,
    compare_prediction,
    load_workload,
    predict,
    predict_energy,
    predict_time,
)
from .regression import (
    ConfidenceDomain,
    FitResult,
    build_design_matrix,
    confidence_box_radius,
    confidence_domain,
    evaluate_fit,
    fit_inverse_power,
    select_degree,
)
from .segmentation import (
    SIX_LEVEL_SEQUENCE,
    PhaseLabel,
    SegmentationConfig,
    StepSegment,
    UnitaryMetrics,
    detect_steps,
    label_phases,
    segments_to_csv,
    step_function_trace,
    unitary_metrics,
)
from .synthgen import (
    PhaseSchedule,
    SchedulePhase,
    SyntheticTrace,
    generate_trace,
    schedule_from_workload,
    six_level_schedule,
)
from .trace import (
    ClampCalibration,
    PowerTrace,
    RawTrace,
    calibrate,
    integrate_energy,
    load_calibration,
    parse_trace_csv,
    power_trace_to_csv,
    serialize_trace_csv,
)

__version__ = "0.1.0"

_LAZY_ESTIMATORS = ("InversePowerRegression", "StepSegmenter")


def __getattr__(name):
    # the estimator layer pulls in scikit-learn, which is slow to import
    # and unused by the CLI, so load it only on first access
    if name in _LAZY_ESTIMATORS:
        from . import estimators

        return getattr(estimators, name)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")


__all__ = [
    "ClampCalibration",
    "ComparisonReport",
    "ConfidenceDomain",
    "ConfigError",
    "DomainError",
    "FitResult",
    "IllConditionedError",
    "IncompleteModelError",
    "InsufficientDataError",
    "InversePowerRegression",
    "JoulecastError",
    "LabelingError",
    "NonUniformSamplingError",
    "NumericalError",
    "OperationKind",
    "PhaseBudget",
    "PhaseLabel",
    "PhaseSchedule",
    "PowerTrace",
    "Prediction",
    "PredictionTerm",
    "RawTrace",
    "ResolutionError",
    "SIX_LEVEL_SEQUENCE",
    "SchedulePhase",
    "SegmentationConfig",
    "StepSegment",
    "StepSegmenter",
    "SyntheticTrace",
    "TimestampOrderError",
    "TraceCSVError",
    "TraceRangeError",
    "UnderdeterminedError",
    "UnitaryMetrics",
    "UnitaryModelSet",
    "WorkloadSpec",
    "build_design_matrix",
    "calibrate",
    "compare_prediction",
    "confidence_box_radius",
    "confidence_domain",
    "detect_steps",
    "evaluate_fit",
    "fit_inverse_power",
    "generate_trace",
    "integrate_energy",
    "label_phases",
    "load_calibration",
    "load_workload",
    "parse_trace_csv",
    "power_trace_to_csv",
    "predict",
    "predict_energy",
    "predict_time",
    "schedule_from_workload",
    "segments_to_csv",
    "select_degree",
    "serialize_trace_csv",
    "six_level_schedule",
    "step_function_trace",
    "unitary_metrics",
]
