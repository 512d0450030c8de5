"""Surrogate modeling with sparse PCE, universal Kriging, and PC-Kriging."""

from .bench import (
    BenchmarkFunction,
    get_function,
    relative_generalization_error,
)
from .doe import (
    ExperimentalDesign,
    Gaussian,
    InputModel,
    Uniform,
    lhs_sample,
    mc_sample,
    standardize,
)
from .kriging import (
    CalibrationConfig,
    Kernel,
    KrigingModel,
    TrendBasis,
    calibrate,
    cv_objective,
    fit_blue,
    kernel_eval,
    loo_kriging,
    neg_log_ml,
    predict,
)
from .metrics import BenchResult, BoxplotSummary, summarize
from .modelio import load_model, save_model
from .orthopoly import IndexSet, PolyBasis, build_index_set, eval_basis, eval_univariate
from .pce import (
    LarPath,
    PceConfig,
    PceModel,
    fit_lar,
    fit_lar_adaptive,
    fit_ols,
    loo_pce,
    predict_pce,
)
from .pck import OpcConfig, PckModel, fit_opc, fit_spc, predict_pck

__version__ = "0.1.0"

__all__ = [
    "BenchResult",
    "BenchmarkFunction",
    "BoxplotSummary",
    "CalibrationConfig",
    "ExperimentalDesign",
    "Gaussian",
    "IndexSet",
    "InputModel",
    "Kernel",
    "KrigingModel",
    "LarPath",
    "OpcConfig",
    "PceConfig",
    "PceModel",
    "PckModel",
    "PolyBasis",
    "TrendBasis",
    "Uniform",
    "build_index_set",
    "calibrate",
    "cv_objective",
    "eval_basis",
    "eval_univariate",
    "fit_blue",
    "fit_lar",
    "fit_lar_adaptive",
    "fit_ols",
    "fit_opc",
    "fit_spc",
    "get_function",
    "kernel_eval",
    "lhs_sample",
    "load_model",
    "loo_kriging",
    "loo_pce",
    "mc_sample",
    "neg_log_ml",
    "predict",
    "predict_pce",
    "predict_pck",
    "relative_generalization_error",
    "save_model",
    "standardize",
    "summarize",
]
