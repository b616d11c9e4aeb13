"""Sleep-aware, age-normalized HRV glucose prediction toolkit (C++ core)."""

from ._core import (
    EcgRecord,
    FeatureMatrix,
    HrvMetrics,
    ModelFit,
    RidgeHyperparams,
    RrSeries,
    SleephrvError,
    Stage,
    age_normalize,
    back_transform,
    detect_r_peaks,
    fit,
    hrv_metrics,
    load_ecg,
    load_rr_series,
    log_glucose,
    paired_t_test,
    peaks_to_rr,
    pearson,
    predict,
    regression_metrics,
    remove_artifacts,
    run_ablation,
    run_cv,
    select_features,
    stratified_kfold,
    student_t_cdf,
    tolerance_analysis,
    validate_amplitude,
)

__all__ = [
    "EcgRecord",
    "FeatureMatrix",
    "HrvMetrics",
    "ModelFit",
    "RidgeHyperparams",
    "RrSeries",
    "SleephrvError",
    "Stage",
    "age_normalize",
    "back_transform",
    "detect_r_peaks",
    "fit",
    "hrv_metrics",
    "load_ecg",
    "load_rr_series",
    "log_glucose",
    "paired_t_test",
    "peaks_to_rr",
    "pearson",
    "predict",
    "regression_metrics",
    "remove_artifacts",
    "run_ablation",
    "run_cv",
    "select_features",
    "stratified_kfold",
    "student_t_cdf",
    "tolerance_analysis",
    "validate_amplitude",
]
