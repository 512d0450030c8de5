"""Least-squares polynomial chaos fitting with LAR-based sparse selection.

Coefficients are always obtained from orthogonal decompositions of the
information matrix (never from explicitly inverted normal equations).
Sparse selection is the hybrid scheme: least-angle regression ranks the
candidate polynomials by correlation with the running residual, then
ordinary least squares is refit on every prefix of the ranking and the
prefix with the smallest analytic leave-one-out error wins.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from ._blas import single_thread_blas
from .doe import ExperimentalDesign, InputModel
from .exceptions import (
    DataError,
    DegenerateLeverageError,
    SingularSystemError,
)
from .orthopoly import IndexSet, PolyBasis, build_index_set

# Leverage this close to 1 means the analytic LOO formula divides by ~0.
LEVERAGE_TOL = 1e-12

_RANK_TOL = 1e-10


@dataclass
class PceModel:
    """Fitted truncated expansion: basis, coefficients, and error estimates.

    loo_error is the absolute analytic leave-one-out error; emp_error is
    the empirical error relative to the response variance.
    """

    basis: PolyBasis
    coeffs: np.ndarray
    loo_error: float
    emp_error: float

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float).ravel()
        if self.coeffs.shape[0] != len(self.basis):
            raise DataError(
                f"{self.coeffs.shape[0]} coefficients for a basis of size {len(self.basis)}"
            )


@dataclass
class LarPath:
    """Candidate ranking (constant term first) with per-prefix LOO errors.

    loo[k] is the analytic LOO of the OLS refit on ranked_indices[:k+1];
    NaN marks prefixes whose refit failed and was skipped.
    """

    ranked_indices: tuple[tuple[int, ...], ...]
    loo: np.ndarray

    def __post_init__(self):
        if len(set(self.ranked_indices)) != len(self.ranked_indices):
            raise DataError("duplicate indices in LAR path")
        self.loo = np.asarray(self.loo, dtype=float)

    def best_prefix(self) -> int:
        """Number of leading indices minimizing the recorded LOO."""
        if np.all(np.isnan(self.loo)):
            raise SingularSystemError("no LAR prefix could be fit")
        return int(np.nanargmin(self.loo)) + 1


@dataclass(frozen=True)
class PceConfig:
    """Defaults of the degree-adaptive sparse fit (all config-exposed)."""

    q: float = 0.75
    p_start: int = 2
    p_max: int = 14
    # retained basis must stay below this fraction of N (overfit guard)
    max_selected_frac: float = 2.0 / 3.0
    # give up escalating p after this many non-improving degrees; single
    # parity stalls (odd/even targets) must not end the escalation
    patience: int = 3


def _leverages_from_q(Q: np.ndarray) -> np.ndarray:
    return np.sum(Q * Q, axis=1)


def _check_full_rank(R: np.ndarray, n_cols: int):
    diag = np.abs(np.diag(R))
    if diag.size < n_cols or np.min(diag) <= _RANK_TOL * max(np.max(diag), 1.0):
        raise SingularSystemError(
            f"information matrix is rank deficient for basis size {n_cols}"
        )


def _ols_qr(F: np.ndarray, y: np.ndarray):
    """Least squares via reduced QR; returns (coeffs, residuals, leverages)."""
    n, m = F.shape
    if n < m:
        raise SingularSystemError(
            f"need at least as many points as basis functions: N={n}, basis size {m}"
        )
    Q, R = np.linalg.qr(F, mode="reduced")
    _check_full_rank(R, m)
    coeffs = scipy.linalg.solve_triangular(R, Q.T @ y, lower=False)
    resid = y - F @ coeffs
    return coeffs, resid, _leverages_from_q(Q)


def _loo_from_parts(resid: np.ndarray, leverages: np.ndarray) -> float:
    one_minus_h = 1.0 - leverages
    if np.any(one_minus_h <= LEVERAGE_TOL):
        raise DegenerateLeverageError(
            "leverage ~ 1: interpolation regime, leave-one-out undefined "
            f"(min 1-h = {np.min(one_minus_h):.3e})"
        )
    return float(np.mean((resid / one_minus_h) ** 2))


def relative_empirical_error(y: np.ndarray, resid: np.ndarray) -> float:
    """Empirical squared error normalized by the response variance."""
    y = np.asarray(y, dtype=float)
    num = float(np.sum(np.asarray(resid) ** 2))
    den = float(np.sum((y - y.mean()) ** 2))
    if den == 0.0:
        return 0.0 if num == 0.0 else np.inf
    return num / den


def fit_ols(basis: PolyBasis, design: ExperimentalDesign) -> PceModel:
    """Ordinary least-squares fit of the expansion on the design.

    Requires N >= basis size and responses on the design. The analytic
    LOO error is computed as part of the fit.
    """
    y = _responses(design)
    F = basis.evaluate(design.points)
    coeffs, resid, lev = _ols_qr(F, y)
    loo = _loo_from_parts(resid, lev)
    emp = relative_empirical_error(y, resid)
    return PceModel(basis, coeffs, loo, emp)


def loo_pce(model: PceModel, design: ExperimentalDesign) -> float:
    """Analytic leave-one-out error of a fitted model on its design.

    Evaluates (1/N) sum ((Y_i - prediction_i) / (1 - h_i))^2 with h the
    diagonal of the hat matrix, equal to the N-fold refit error without
    building N models.
    """
    y = _responses(design)
    F = model.basis.evaluate(design.points)
    Q, R = np.linalg.qr(F, mode="reduced")
    _check_full_rank(R, F.shape[1])
    resid = y - F @ model.coeffs
    return _loo_from_parts(resid, _leverages_from_q(Q))


def predict_pce(model: PceModel, points: np.ndarray) -> np.ndarray:
    """Evaluate the truncated series at physical points."""
    return model.basis.evaluate(points) @ model.coeffs


def _responses(design: ExperimentalDesign) -> np.ndarray:
    if design.responses is None:
        raise DataError("design has no responses")
    return design.responses


def _lar_entry_order(X: np.ndarray, y: np.ndarray, max_entries: int) -> list[int]:
    """Column entry order of least-angle regression.

    X columns must be centered and scaled to unit norm, y centered.
    Only the ranking is used downstream (prefixes are refit by OLS), so
    the path stops early on rank deficiency or a vanishing residual.
    """
    n, m = X.shape
    mu = np.zeros(n)
    active: list[int] = []
    signs: list[float] = []
    inactive = np.ones(m, dtype=bool)
    gram = np.empty((0, 0))
    y_scale = float(np.linalg.norm(y))
    if y_scale == 0.0:
        return []
    for _ in range(max_entries):
        c = X.T @ (y - mu)
        c_masked = np.where(inactive, np.abs(c), -np.inf)
        j_new = int(np.argmax(c_masked))
        if not np.isfinite(c_masked[j_new]) or c_masked[j_new] < 1e-12 * y_scale:
            break
        sign_new = 1.0 if c[j_new] >= 0 else -1.0
        x_new = sign_new * X[:, j_new]
        # grow the Gram matrix of the sign-adjusted active columns by one
        cross = (X[:, active] * np.asarray(signs)).T @ x_new if active else np.empty(0)
        k = len(active)
        grown = np.empty((k + 1, k + 1))
        grown[:k, :k] = gram
        grown[:k, k] = cross
        grown[k, :k] = cross
        grown[k, k] = float(x_new @ x_new)
        active.append(j_new)
        signs.append(sign_new)
        inactive[j_new] = False
        gram = grown

        try:
            w = scipy.linalg.cho_solve(scipy.linalg.cho_factor(gram), np.ones(len(active)))
        except scipy.linalg.LinAlgError:
            active.pop()
            break
        denom = float(np.sum(w))
        if denom <= 0:
            active.pop()
            break
        a_norm = 1.0 / np.sqrt(denom)
        u = (X[:, active] * np.asarray(signs)) @ (a_norm * w)

        # all active columns share the correlation magnitude |c[j_new]|
        cc = float(np.abs(c[j_new]))
        if not np.any(inactive):
            gamma = cc / a_norm
        else:
            a = X.T @ u
            with np.errstate(divide="ignore", invalid="ignore"):
                g1 = (cc - c) / (a_norm - a)
                g2 = (cc + c) / (a_norm + a)
            steps = np.concatenate([g1[inactive], g2[inactive]])
            steps = steps[np.isfinite(steps) & (steps > 1e-15)]
            gamma = min(float(np.min(steps)), cc / a_norm) if steps.size else cc / a_norm
        mu = mu + gamma * u
    return active


def fit_lar(
    candidates: IndexSet,
    design: ExperimentalDesign,
    input_model: InputModel,
    prefix_cap: int | None = None,
) -> tuple[PceModel, LarPath]:
    """Hybrid LAR: rank candidates, refit OLS on each prefix, keep best LOO.

    The constant term is forced to the head of the ranking. Prefix sizes
    are capped at min(N-1, number of candidates, prefix_cap); prefixes
    whose refit degenerates are recorded as NaN and skipped.

    Returns the LOO-optimal model together with the full ranking path.
    """
    y = _responses(design)
    n = design.n
    if n < 2:
        raise DataError("fit_lar needs at least 2 design points")
    if len(candidates) == 0:
        raise DataError("empty candidate set")
    basis_full = PolyBasis.for_input(input_model, candidates)
    F = basis_full.evaluate(design.points)

    const = (0,) * candidates.dim
    nonconst_pos = [i for i, a in enumerate(candidates) if a != const]

    # LAR runs on centered, unit-norm regressors against the centered response.
    Xc = F[:, nonconst_pos] - F[:, nonconst_pos].mean(axis=0)
    norms = np.linalg.norm(Xc, axis=0)
    usable = norms > 1e-13 * np.sqrt(n)
    cols = [nonconst_pos[i] for i in np.nonzero(usable)[0]]
    Xs = Xc[:, usable] / norms[usable]
    yc = y - y.mean()

    cap = min(n - 1, len(candidates))
    if prefix_cap is not None:
        cap = min(cap, prefix_cap)
    with single_thread_blas():
        order_local = _lar_entry_order(Xs, yc, max_entries=max(cap - 1, 0))
    ranked_cols = [cols[i] for i in order_local]

    ranked_indices = [const] + [candidates.indices[i] for i in ranked_cols]
    ranked_indices = ranked_indices[:cap]

    ones = np.ones((n, 1))
    loo = np.full(len(ranked_indices), np.nan)
    best = (np.inf, None)
    Fsel = ones
    with single_thread_blas():
        for k in range(len(ranked_indices)):
            if k > 0:
                Fsel = np.hstack([Fsel, F[:, [ranked_cols[k - 1]]]])
            try:
                coeffs, resid, lev = _ols_qr(Fsel, y)
                loo[k] = _loo_from_parts(resid, lev)
            except (SingularSystemError, DegenerateLeverageError):
                continue
            if loo[k] < best[0]:
                best = (loo[k], (k + 1, coeffs, resid))
    if best[1] is None:
        raise SingularSystemError("no LAR prefix produced a valid least-squares fit")
    size, coeffs, resid = best[1]
    sub = candidates.subset(ranked_indices[:size])
    model = PceModel(
        basis_full.with_index_set(sub),
        coeffs,
        best[0],
        relative_empirical_error(y, resid),
    )
    return model, LarPath(tuple(ranked_indices), loo)


def fit_lar_adaptive(
    design: ExperimentalDesign,
    input_model: InputModel,
    config: PceConfig = PceConfig(),
) -> tuple[PceModel, LarPath]:
    """Degree-adaptive sparse fit: grow p until the LOO stops improving.

    Candidate sets are hyperbolic truncations with the configured q; the
    retained basis (and hence every prefix) is capped at
    max_selected_frac * N. Returns the overall LOO-best model and its path.
    """
    n = design.n
    budget = max(int(config.max_selected_frac * n), 1)
    best: tuple[float, PceModel, LarPath] | None = None
    stale = 0
    for p in range(config.p_start, config.p_max + 1):
        candidates = build_index_set(input_model.dim, p, config.q)
        try:
            model, path = fit_lar(candidates, design, input_model, prefix_cap=budget)
        except (SingularSystemError, DegenerateLeverageError):
            stale += 1
            if stale >= config.patience:
                break
            continue
        if best is None or model.loo_error < best[0] * (1.0 - 1e-12):
            best = (model.loo_error, model, path)
            stale = 0
        else:
            stale += 1
            if stale >= config.patience:
                break
    if best is None:
        raise SingularSystemError("adaptive LAR failed for every degree")
    return best[1], best[2]
