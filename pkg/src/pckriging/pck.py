"""PC-Kriging: sparse polynomial trends inside universal Kriging.

Two fusion variants share the same LAR ranking of candidate polynomials:
the sequential variant installs the LOO-optimal sparse set as the trend
and calibrates once; the optimal variant grows the trend one ranked
polynomial at a time, recalibrates at every size, and keeps the size
with the smallest Kriging leave-one-out error.
"""

from dataclasses import dataclass, replace

import numpy as np

from .doe import ExperimentalDesign, InputModel
from .exceptions import (
    ConditioningError,
    DataError,
    NumericalError,
    SingularTrendError,
)
from .kriging import (
    MATERN52,
    CalibrationConfig,
    KrigingModel,
    TrendBasis,
    calibrate,
    loo_kriging,
    predict,
)
from .orthopoly import PolyBasis
from .pce import LarPath, PceConfig, fit_lar_adaptive

SPC = "spc"
OPC = "opc"


@dataclass(frozen=True)
class OpcConfig:
    """Trend-growth settings for the optimal variant."""

    # bound on trend sizes tried; the iterative recalibration is what makes
    # this variant ~2 orders of magnitude more expensive than plain PCE
    max_prefixes: int = 128
    # seed each prefix's optimizer with the previous optimum (fewer fresh
    # starts); disable for strictly independent prefix calibrations
    warm_start: bool = True
    warm_fresh_starts: int = 4


@dataclass
class PckModel:
    """Fitted PC-Kriging model: a universal Kriging core plus its selection path."""

    variant: str
    model: KrigingModel
    lar_path: LarPath
    selected_size: int
    loo: float
    loo_curve: np.ndarray | None = None
    prefix_models: list | None = None

    @property
    def trend_indices(self) -> tuple[tuple[int, ...], ...]:
        return self.model.trend.basis.index_set.indices


def _trend_for_prefix(
    input_model: InputModel, path: LarPath, size: int, reference: PolyBasis
) -> TrendBasis:
    sub = reference.index_set.subset(path.ranked_indices[:size])
    return TrendBasis.polynomials(PolyBasis.for_input(input_model, sub))


def fit_spc(
    design: ExperimentalDesign,
    input_model: InputModel,
    kind: str = MATERN52,
    nu: float | None = None,
    pce_config: PceConfig | None = None,
    krig_config: CalibrationConfig | None = None,
) -> PckModel:
    """Sequential PC-Kriging: LAR-selected trend, one calibration.

    The sparse set minimizing the PCE leave-one-out error becomes the
    universal Kriging trend as-is; hyperparameters are then calibrated
    once on that trend.
    """
    if design.n < 3:
        raise DataError("fit_spc needs at least 3 design points")
    pce_model, path = fit_lar_adaptive(design, input_model, pce_config or PceConfig())
    trend = TrendBasis.polynomials(pce_model.basis)
    model = calibrate(trend, design, kind=kind, nu=nu, config=krig_config)
    return PckModel(
        variant=SPC,
        model=model,
        lar_path=path,
        selected_size=len(pce_model.basis),
        loo=loo_kriging(model),
    )


def fit_opc(
    design: ExperimentalDesign,
    input_model: InputModel,
    kind: str = MATERN52,
    nu: float | None = None,
    pce_config: PceConfig | None = None,
    krig_config: CalibrationConfig | None = None,
    opc_config: OpcConfig | None = None,
    keep_prefix_models: bool = False,
) -> PckModel:
    """Optimal PC-Kriging: grow the trend along the LAR ranking.

    For every prefix size Q (constant term first) a universal Kriging
    model is calibrated and its analytic LOO recorded; the model with the
    smallest LOO is returned. Prefixes whose calibration fails are marked
    NaN in the curve and skipped.
    """
    if design.n < 3:
        raise DataError("fit_opc needs at least 3 design points")
    opc = opc_config or OpcConfig()
    base_cfg = krig_config or CalibrationConfig()
    pce_model, path = fit_lar_adaptive(design, input_model, pce_config or PceConfig())
    reference = pce_model.basis

    max_q = min(len(path.ranked_indices), design.n - 2, opc.max_prefixes)
    if max_q < 1:
        raise DataError("design too small for any trend prefix")

    loo_curve = np.full(max_q, np.nan)
    best: tuple[float, KrigingModel, int] | None = None
    kept = [] if keep_prefix_models else None
    warm_ls = None
    for q in range(1, max_q + 1):
        trend = _trend_for_prefix(input_model, path, q, reference)
        cfg = base_cfg
        extra = None
        if opc.warm_start and warm_ls is not None:
            cfg = replace(base_cfg, n_starts=min(base_cfg.n_starts, opc.warm_fresh_starts))
            extra = [warm_ls]
        try:
            model = calibrate(trend, design, kind=kind, nu=nu, config=cfg, extra_starts=extra)
            loo = loo_kriging(model)
        except (ConditioningError, SingularTrendError, NumericalError, DataError):
            if kept is not None:
                kept.append(None)
            continue
        loo_curve[q - 1] = loo
        if opc.warm_start:
            warm_ls = model.kernel.lengthscales
        if kept is not None:
            kept.append(model)
        if best is None or loo < best[0]:
            best = (loo, model, q)
    if best is None:
        raise ConditioningError("every OPC trend prefix failed to calibrate")

    finite = loo_curve[np.isfinite(loo_curve)]
    assert best[0] == float(np.min(finite))
    return PckModel(
        variant=OPC,
        model=best[1],
        lar_path=path,
        selected_size=best[2],
        loo=best[0],
        loo_curve=loo_curve,
        prefix_models=kept,
    )


def predict_pck(pck: PckModel, points: np.ndarray):
    """Prediction mean and variance; delegates to the Kriging core."""
    return predict(pck.model, points)
