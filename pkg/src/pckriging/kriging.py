"""Universal Kriging: kernels, BLUE trend, ML/CV calibration, prediction.

All linear algebra goes through a Cholesky factorization of the
correlation matrix (with an adaptive nugget ladder) followed by a QR
decomposition of the decorrelated trend matrix; the correlation inverse
is never formed for fitting or prediction. The analytic leave-one-out
error uses the bordered-matrix identity, which only needs the diagonal
of the trend-projected inverse.
"""

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.optimize import minimize
from scipy.special import gammaln, kv

from ._blas import single_thread_blas

from .doe import ExperimentalDesign, InputModel, Uniform, lhs_sample
from .exceptions import (
    ConditioningError,
    DataError,
    SingularTrendError,
)
from .orthopoly import PolyBasis

MATERN32 = "matern32"
MATERN52 = "matern52"
MATERN = "matern"
GAUSSIAN = "gaussian"
EXPONENTIAL = "exponential"
# Dirac correlation makes R the identity: universal Kriging collapses to
# ordinary least squares on the trend, which the equivalence tests rely on.
DIRAC = "dirac"

KERNEL_KINDS = (MATERN32, MATERN52, MATERN, GAUSSIAN, EXPONENTIAL, DIRAC)

DEFAULT_NUGGET_LADDER = tuple(10.0**k for k in range(-12, -5))

_PENALTY = 1e20


@dataclass(frozen=True)
class Kernel:
    """Stationary product-form correlation with one lengthscale per dimension."""

    kind: str
    lengthscales: tuple[float, ...]
    nu: float | None = None

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise DataError(f"unknown kernel kind {self.kind!r}")
        ls = tuple(float(v) for v in np.atleast_1d(self.lengthscales))
        if any(v <= 0 for v in ls):
            raise DataError("lengthscales must be positive")
        object.__setattr__(self, "lengthscales", ls)
        if self.kind == MATERN:
            if self.nu is None or self.nu < 0.5:
                raise DataError("general Matern kernel needs nu >= 1/2")

    @property
    def dim(self) -> int:
        return len(self.lengthscales)


def _corr1d(kind: str, nu: float | None, t: np.ndarray) -> np.ndarray:
    """1-d correlation at scaled distances t = |dx| / lengthscale >= 0."""
    if kind == MATERN32:
        s = math.sqrt(3.0) * t
        return (1.0 + s) * np.exp(-s)
    if kind == MATERN52:
        s = math.sqrt(5.0) * t
        return (1.0 + s + s * s / 3.0) * np.exp(-s)
    if kind == GAUSSIAN:
        return np.exp(-0.5 * t * t)
    if kind == EXPONENTIAL:
        return np.exp(-t)
    if kind == DIRAC:
        return np.where(t == 0.0, 1.0, 0.0)
    if kind == MATERN:
        s = math.sqrt(2.0 * nu) * t
        s_safe = np.where(s > 0, s, 1.0)
        log_coef = (1.0 - nu) * math.log(2.0) - gammaln(nu)
        with np.errstate(invalid="ignore", over="ignore", under="ignore"):
            val = np.exp(log_coef + nu * np.log(s_safe)) * kv(nu, s_safe)
        return np.where(s > 0, val, 1.0)
    raise DataError(f"unknown kernel kind {kind!r}")


def _corr_from_absdiff(kernel: Kernel, absdiff: np.ndarray) -> np.ndarray:
    """Product over dimensions; absdiff has shape (..., M)."""
    ls = np.asarray(kernel.lengthscales)
    t = absdiff / ls
    out = np.ones(absdiff.shape[:-1])
    for j in range(absdiff.shape[-1]):
        out *= _corr1d(kernel.kind, kernel.nu, t[..., j])
    return out


def kernel_eval(kernel: Kernel, x, y) -> float:
    """Correlation between two points."""
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.shape != y.shape or x.shape[0] != kernel.dim:
        raise DataError("point dimensions do not match the kernel")
    return float(_corr_from_absdiff(kernel, np.abs(x - y)[None, :])[0])


def pairwise_absdiff(X: np.ndarray) -> np.ndarray:
    X = np.atleast_2d(X)
    return np.abs(X[:, None, :] - X[None, :, :])


def corr_matrix(kernel: Kernel, X: np.ndarray) -> np.ndarray:
    return _corr_from_absdiff(kernel, pairwise_absdiff(X))


def cross_corr(kernel: Kernel, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    A, B = np.atleast_2d(A), np.atleast_2d(B)
    return _corr_from_absdiff(kernel, np.abs(A[:, None, :] - B[None, :, :]))


@dataclass(frozen=True)
class TrendBasis:
    """Kriging trend: constant (ordinary Kriging) or a polynomial set."""

    kind: str
    basis: PolyBasis | None = None

    CONSTANT = "constant"
    POLYNOMIALS = "polynomials"

    @classmethod
    def constant(cls) -> "TrendBasis":
        return cls(cls.CONSTANT, None)

    @classmethod
    def polynomials(cls, basis: PolyBasis) -> "TrendBasis":
        return cls(cls.POLYNOMIALS, basis)

    def __post_init__(self):
        if self.kind not in (self.CONSTANT, self.POLYNOMIALS):
            raise DataError(f"unknown trend kind {self.kind!r}")
        if self.kind == self.POLYNOMIALS and self.basis is None:
            raise DataError("polynomial trend needs a basis")

    @property
    def size(self) -> int:
        return 1 if self.kind == self.CONSTANT else len(self.basis)

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        if self.kind == self.CONSTANT:
            return np.ones((points.shape[0], 1))
        return self.basis.evaluate(points)


def cholesky_with_nugget(R: np.ndarray, ladder=DEFAULT_NUGGET_LADDER):
    """Lower Cholesky factor of R + nugget*I, escalating the nugget.

    Returns (C, nugget). Raises ConditioningError with a condition-number
    estimate when even the largest nugget fails.
    """
    n = R.shape[0]
    eye = np.eye(n)
    for nugget in ladder:
        try:
            C = scipy.linalg.cholesky(R + nugget * eye, lower=True)
            return C, float(nugget)
        except scipy.linalg.LinAlgError:
            continue
    cond = float(np.linalg.cond(R + ladder[-1] * eye))
    raise ConditioningError(
        f"correlation matrix not positive definite within nugget ladder "
        f"(max nugget {ladder[-1]:g}, cond ~ {cond:.3e})"
    )


def _gls(C: np.ndarray, F: np.ndarray, y: np.ndarray, sigma2_floor: float):
    """BLUE at fixed correlation: solves through C and a QR of C^-1 F."""
    n, p = F.shape
    if n <= p:
        raise DataError(f"BLUE needs N > P, got N={n}, P={p}")
    Ft = scipy.linalg.solve_triangular(C, F, lower=True)
    yt = scipy.linalg.solve_triangular(C, y, lower=True)
    Q, G = np.linalg.qr(Ft, mode="reduced")
    gdiag = np.abs(np.diag(G))
    if np.min(gdiag) <= 1e-10 * max(np.max(gdiag), 1.0):
        raise SingularTrendError(
            f"trend matrix is rank deficient (P={p}, N={n})"
        )
    beta = scipy.linalg.solve_triangular(G, Q.T @ yt, lower=False)
    rho = yt - Ft @ beta
    sigma2 = max(float(rho @ rho) / n, sigma2_floor)
    return beta, sigma2, Ft, G, rho


@dataclass
class KrigingModel:
    """Calibrated Gaussian-process model with cached factorization."""

    trend: TrendBasis
    kernel: Kernel
    beta: np.ndarray
    sigma2: float
    design: ExperimentalDesign
    nugget: float
    calibration: dict = field(default_factory=dict)
    # cached solves, all derived from (kernel, design)
    _chol: np.ndarray = field(default=None, repr=False)
    _Ft: np.ndarray = field(default=None, repr=False)
    _G: np.ndarray = field(default=None, repr=False)
    _gamma: np.ndarray = field(default=None, repr=False)

    @property
    def trend_size(self) -> int:
        return self.trend.size


def fit_blue(
    trend: TrendBasis,
    kernel: Kernel,
    design: ExperimentalDesign,
    ladder=DEFAULT_NUGGET_LADDER,
) -> KrigingModel:
    """Generalized least squares at fixed hyperparameters.

    Estimates the trend coefficients and the process variance (1/N
    convention) and caches the factorization used by prediction and the
    analytic LOO.
    """
    y = _responses(design)
    with single_thread_blas():
        F = trend.evaluate(design.points)
        R = corr_matrix(kernel, design.points)
        C, nugget = cholesky_with_nugget(R, ladder)
        beta, sigma2, Ft, G, rho = _gls(C, F, y, sigma2_floor=nugget)
        gamma = scipy.linalg.solve_triangular(C.T, rho, lower=False)
    return KrigingModel(
        trend=trend,
        kernel=kernel,
        beta=beta,
        sigma2=sigma2,
        design=design,
        nugget=nugget,
        _chol=C,
        _Ft=Ft,
        _G=G,
        _gamma=gamma,
    )


def _objective_parts(
    lengthscales,
    trend: TrendBasis,
    design: ExperimentalDesign,
    kind: str,
    nu: float | None,
    ladder,
    F: np.ndarray | None = None,
    absdiff: np.ndarray | None = None,
):
    kernel = Kernel(kind, tuple(np.atleast_1d(lengthscales)), nu)
    if F is None:
        F = trend.evaluate(design.points)
    if absdiff is None:
        absdiff = pairwise_absdiff(design.points)
    R = _corr_from_absdiff(kernel, absdiff)
    C, nugget = cholesky_with_nugget(R, ladder)
    y = _responses(design)
    beta, sigma2, Ft, G, rho = _gls(C, F, y, sigma2_floor=nugget)
    return C, beta, sigma2, Ft, G, rho, nugget


def neg_log_ml(
    lengthscales,
    trend: TrendBasis,
    design: ExperimentalDesign,
    kind: str = MATERN52,
    nu: float | None = None,
    ladder=DEFAULT_NUGGET_LADDER,
) -> float:
    """Maximum-likelihood objective in log form.

    log sigma_y^2(theta) + logdet(R)/N: a monotone transform of the
    product sigma_y^2 * det(R)^(1/N), so the minimizer is unchanged while
    the evaluation stays stable for large N.
    """
    C, _, sigma2, *_ = _objective_parts(lengthscales, trend, design, kind, nu, ladder)
    logdet = 2.0 * float(np.sum(np.log(np.diag(C))))
    return math.log(sigma2) + logdet / design.n


def cv_objective(
    lengthscales,
    trend: TrendBasis,
    design: ExperimentalDesign,
    kind: str = MATERN52,
    nu: float | None = None,
    ladder=DEFAULT_NUGGET_LADDER,
) -> float:
    """Leave-one-out cross-validation criterion on the correlation matrix.

    Computes Y' R^-1 diag(R^-1)^-2 R^-1 Y through triangular solves.
    """
    kernel = Kernel(kind, tuple(np.atleast_1d(lengthscales)), nu)
    R = corr_matrix(kernel, design.points)
    C, _ = cholesky_with_nugget(R, ladder)
    y = _responses(design)
    W = scipy.linalg.solve_triangular(C, np.eye(design.n), lower=True)
    Rinv = W.T @ W
    u = Rinv @ y
    d = np.diag(Rinv)
    return float(np.sum((u / d) ** 2))


@dataclass(frozen=True)
class CalibrationConfig:
    """Multi-start bounded optimization settings for hyperparameters."""

    objective: str = "ml"
    n_starts: int = 8
    # lengthscale bounds as multiples of the per-dimension input range
    bound_factors: tuple[float, float] = (1e-2, 10.0)
    maxiter: int = 60
    start_seed: int = 1729
    isotropic: bool = False
    nugget_ladder: tuple = DEFAULT_NUGGET_LADDER


def _start_points(log_lo, log_hi, n_starts, seed):
    """Space-filling starts in log-lengthscale space."""
    margs = tuple(Uniform(lo, hi) for lo, hi in zip(log_lo, log_hi))
    design = lhs_sample(InputModel(margs), n_starts, seed)
    return design.points


def calibrate(
    trend: TrendBasis,
    design: ExperimentalDesign,
    kind: str = MATERN52,
    nu: float | None = None,
    config: CalibrationConfig | None = None,
    extra_starts=None,
) -> KrigingModel:
    """Fit hyperparameters by multi-start bounded quasi-Newton descent.

    Minimizes the ML (default) or CV objective over log-lengthscales with
    numerically differentiated L-BFGS-B from space-filling start points.
    The returned model records the starts, per-start iteration counts and
    the final gradient norm.
    """
    if config is None:
        config = CalibrationConfig()
    if config.objective not in ("ml", "cv"):
        raise DataError(f"unknown calibration objective {config.objective!r}")
    y = _responses(design)
    n, m = design.points.shape
    if n < trend.size + 2:
        raise DataError(f"calibration needs N >= P + 2 (N={n}, P={trend.size})")

    ranges = np.ptp(design.points, axis=0)
    ranges[ranges == 0.0] = 1.0
    if config.isotropic:
        span = float(np.max(ranges))
        log_lo = np.array([math.log(config.bound_factors[0] * span)])
        log_hi = np.array([math.log(config.bound_factors[1] * span)])
    else:
        log_lo = np.log(config.bound_factors[0] * ranges)
        log_hi = np.log(config.bound_factors[1] * ranges)

    F = trend.evaluate(design.points)
    absdiff = pairwise_absdiff(design.points)

    def expand(z):
        ls = np.exp(z)
        return np.full(m, ls[0]) if config.isotropic else ls

    def objective(z):
        try:
            C, beta, sigma2, Ft, G, rho, nugget = _objective_parts(
                expand(z), trend, design, kind, nu, config.nugget_ladder,
                F=F, absdiff=absdiff,
            )
        except (ConditioningError, SingularTrendError):
            return _PENALTY
        if config.objective == "ml":
            logdet = 2.0 * float(np.sum(np.log(np.diag(C))))
            return math.log(sigma2) + logdet / n
        W = scipy.linalg.solve_triangular(C, np.eye(n), lower=True)
        Rinv = W.T @ W
        u = Rinv @ y
        return float(np.sum((u / np.diag(Rinv)) ** 2))

    starts = (
        list(_start_points(log_lo, log_hi, config.n_starts, config.start_seed))
        if config.n_starts > 0
        else []
    )
    if extra_starts is not None:
        for ls in extra_starts:
            ls = np.atleast_1d(np.asarray(ls, dtype=float))
            z = np.log(ls[:1]) if config.isotropic else np.log(ls)
            starts.append(np.clip(z, log_lo, log_hi))

    if not starts:
        raise DataError("calibration needs at least one start point")
    bounds = list(zip(log_lo, log_hi))
    best = None
    records = []
    with single_thread_blas():
        for i, z0 in enumerate(starts):
            res = minimize(
                objective,
                np.asarray(z0, dtype=float),
                method="L-BFGS-B",
                bounds=bounds,
                options={"maxiter": config.maxiter},
            )
            grad_norm = float(np.max(np.abs(res.jac))) if res.jac is not None else np.nan
            records.append(
                {
                    "start": [float(v) for v in z0],
                    "fun": float(res.fun),
                    "iterations": int(res.nit),
                    "grad_norm": grad_norm,
                }
            )
            if res.fun < _PENALTY and (best is None or res.fun < best[0]):
                best = (float(res.fun), np.asarray(res.x), i)
        if best is None:
            raise ConditioningError("every calibration start failed to factorize")

        kernel = Kernel(kind, tuple(expand(best[1])), nu)
        model = fit_blue(trend, kernel, design, ladder=config.nugget_ladder)
    model.calibration = {
        "objective": config.objective,
        "starts": records,
        "best_start": best[2],
        "fun": best[0],
        "rng": "philox",
        "start_seed": config.start_seed,
    }
    return model


def predict(model: KrigingModel, points: np.ndarray):
    """Prediction mean and variance at new points.

    The variance solves the bordered system through the cached Cholesky/QR
    factors and is clamped at zero from below; at design points the mean
    reproduces the responses and the variance vanishes (to nugget order).
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[1] != model.design.dim:
        raise DataError(
            f"points have {points.shape[1]} columns, design has {model.design.dim}"
        )
    Fs = model.trend.evaluate(points)
    r = cross_corr(model.kernel, points, model.design.points)
    mean = Fs @ model.beta + r @ model._gamma
    rt = scipy.linalg.solve_triangular(model._chol, r.T, lower=True)
    u = model._Ft.T @ rt - Fs.T
    v = scipy.linalg.solve_triangular(model._G.T, u, lower=True)
    var = model.sigma2 * (1.0 - np.sum(rt * rt, axis=0) + np.sum(v * v, axis=0))
    return mean, np.maximum(var, 0.0)


def loo_kriging(model: KrigingModel, details: bool = False):
    """Analytic leave-one-out error without refitting N models.

    Uses the bordered-matrix identity: with B the inverse of
    [[sigma^2 R, F], [F', 0]], the deleted-point means are
    -sum_{j != i} (B_ij / B_ii) Y_j and the deleted variances 1 / B_ii.
    Returns the mean squared deleted residual; with details=True also the
    per-point deleted means and variances.
    """
    y = _responses(model.design)
    n = model.design.n
    C = model._chol
    with single_thread_blas():
        W = scipy.linalg.solve_triangular(C, np.eye(n), lower=True)
        Rinv_diag = np.sum(W * W, axis=0)
        RinvF = scipy.linalg.solve_triangular(C.T, model._Ft, lower=False)
        T = scipy.linalg.solve_triangular(model._G.T, RinvF.T, lower=True).T
    # sigma^2 * diag(B11); the deleted residual gamma_i / d_i is free of sigma^2
    d = Rinv_diag - np.sum(T * T, axis=1)
    if np.any(d <= 0.0):
        raise ConditioningError(
            "non-positive diagonal in the bordered inverse; correlation too close to singular"
        )
    resid = model._gamma / d
    err = float(np.mean(resid**2))
    if not details:
        return err
    mu_deleted = y - resid
    var_deleted = model.sigma2 / d
    return err, mu_deleted, var_deleted


def _responses(design: ExperimentalDesign) -> np.ndarray:
    if design.responses is None:
        raise DataError("design has no responses")
    return design.responses
