"""Discharge-coefficient prediction for streamlined weirs."""

from ._core import (
    MODELS,
    WeirflowError,
    __version__,
    cd_bagheri,
    cd_carollo,
    cd_from_discharge,
    classical_fit_predict,
    cli,
    compute_metric,
    compute_report,
    deep_fit_predict,
    discharge_from_cd,
    generate_synthetic,
    hybrid_average,
    load_csv,
    make_folds,
    run_experiment,
    stage_discharge_A,
    stage_variable_A,
    synthetic_csv,
    total_head,
)

__all__ = [
    "MODELS",
    "WeirflowError",
    "__version__",
    "cd_bagheri",
    "cd_carollo",
    "cd_from_discharge",
    "classical_fit_predict",
    "cli",
    "compute_metric",
    "compute_report",
    "deep_fit_predict",
    "discharge_from_cd",
    "generate_synthetic",
    "hybrid_average",
    "load_csv",
    "make_folds",
    "run_experiment",
    "stage_discharge_A",
    "stage_variable_A",
    "synthetic_csv",
    "total_head",
]
