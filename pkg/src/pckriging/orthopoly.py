"""Orthonormal polynomial families, multi-index sets, and basis evaluation.

Univariate families are evaluated through the classical three-term
recurrences and normalized afterwards, which stays stable well past
degree 20 where explicit coefficient expansions would not. Multivariate
polynomials are tensor products over the input dimensions, truncated by
a total-degree bound with an optional hyperbolic q-norm filter.
"""

import math
from dataclasses import dataclass
from itertools import combinations_with_replacement

import numpy as np

from .doe import Gaussian, InputModel, Uniform
from .exceptions import DataError

LEGENDRE = "legendre"
HERMITE = "hermite"

# Ties on the q-norm boundary (float round-off for q < 1) are included.
Q_NORM_TOL = 1e-12


def family_for(marginal) -> str:
    """Orthonormal family matching a marginal distribution."""
    if isinstance(marginal, Uniform):
        return LEGENDRE
    if isinstance(marginal, Gaussian):
        return HERMITE
    raise DataError(f"no polynomial family for marginal {marginal!r}")


def eval_univariate_all(family: str, max_degree: int, x) -> np.ndarray:
    """Evaluate orthonormal polynomials of degree 0..max_degree at x.

    Parameters
    ----------
    family : str
        LEGENDRE (uniform weight on [-1, 1]) or HERMITE (standard normal
        weight, probabilists' convention).
    max_degree : int
        Highest degree to evaluate, >= 0.
    x : array_like
        Evaluation points on the reference support.

    Returns
    -------
    np.ndarray of shape (len(x), max_degree + 1)
    """
    if max_degree < 0:
        raise DataError("max_degree must be >= 0")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = x.shape[0]
    out = np.empty((n, max_degree + 1))
    out[:, 0] = 1.0
    if max_degree >= 1:
        out[:, 1] = x
    if family == LEGENDRE:
        for k in range(1, max_degree):
            out[:, k + 1] = ((2 * k + 1) * x * out[:, k] - k * out[:, k - 1]) / (k + 1)
        norms = np.sqrt(2.0 * np.arange(max_degree + 1) + 1.0)
    elif family == HERMITE:
        for k in range(1, max_degree):
            out[:, k + 1] = x * out[:, k] - k * out[:, k - 1]
        norms = np.array(
            [1.0 / math.sqrt(math.factorial(k)) for k in range(max_degree + 1)]
        )
    else:
        raise DataError(f"unknown polynomial family {family!r}")
    return out * norms


def eval_univariate(family: str, degree: int, x):
    """Single orthonormal polynomial value(s) of the given degree."""
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    vals = eval_univariate_all(family, degree, np.atleast_1d(x))[:, degree]
    return float(vals[0]) if scalar else vals


def q_norm(alpha, q: float) -> float:
    """The q-(quasi)norm (sum alpha_i^q)^(1/q) of a multi-index."""
    a = np.asarray(alpha, dtype=float)
    s = float(np.sum(a**q))
    return s ** (1.0 / q)


@dataclass(frozen=True)
class IndexSet:
    """Ordered set of multi-indices truncated by a hyperbolic q-norm.

    Indices are tuples of non-negative ints, sorted by (total degree,
    lexicographic); this fixed ordering is what ranking algorithms and
    persisted models refer to.
    """

    indices: tuple[tuple[int, ...], ...]
    dim: int
    degree: int
    q: float

    def __post_init__(self):
        if not 0.0 < self.q <= 1.0:
            raise DataError(f"q must be in (0, 1], got {self.q}")
        if len(set(self.indices)) != len(self.indices):
            raise DataError("duplicate multi-indices")
        for a in self.indices:
            if len(a) != self.dim or any(k < 0 for k in a):
                raise DataError(f"bad multi-index {a} for dimension {self.dim}")

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def max_degree_per_dim(self) -> np.ndarray:
        arr = np.asarray(self.indices, dtype=int)
        return arr.max(axis=0)

    def subset(self, indices) -> "IndexSet":
        """Same truncation metadata, restricted to the given indices."""
        return IndexSet(tuple(tuple(a) for a in indices), self.dim, self.degree, self.q)

    def to_list(self) -> list[list[int]]:
        return [list(a) for a in self.indices]


def build_index_set(m_dim: int, p: int, q: float = 1.0) -> IndexSet:
    """All multi-indices alpha with ||alpha||_q <= p (+ boundary tolerance).

    Enumerates the total-degree simplex |alpha| <= p and filters by the
    q-norm, so the result is finite by construction; q = 1 reproduces the
    full total-degree set of cardinality (M+p)! / (M! p!).
    """
    if m_dim < 1:
        raise DataError("m_dim must be >= 1")
    if p < 0:
        raise DataError("p must be >= 0")
    if not 0.0 < q <= 1.0:
        raise DataError(f"q must be in (0, 1], got {q}")
    kept = []
    for total in range(p + 1):
        for combo in combinations_with_replacement(range(m_dim), total):
            alpha = [0] * m_dim
            for d in combo:
                alpha[d] += 1
            alpha = tuple(alpha)
            if q == 1.0 or q_norm(alpha, q) <= p + Q_NORM_TOL:
                kept.append(alpha)
    kept.sort(key=lambda a: (sum(a), a))
    return IndexSet(tuple(kept), m_dim, p, q)


@dataclass(frozen=True)
class PolyBasis:
    """Tensor-product orthonormal basis tied to an input model."""

    input: InputModel
    index_set: IndexSet
    families: tuple[str, ...]

    @classmethod
    def for_input(cls, input_model: InputModel, index_set: IndexSet) -> "PolyBasis":
        if index_set.dim != input_model.dim:
            raise DataError(
                f"index set dimension {index_set.dim} != input dimension {input_model.dim}"
            )
        fams = tuple(family_for(m) for m in input_model.marginals)
        return cls(input_model, index_set, fams)

    def __len__(self) -> int:
        return len(self.index_set)

    def with_index_set(self, index_set: IndexSet) -> "PolyBasis":
        return PolyBasis.for_input(self.input, index_set)

    def evaluate_standardized(self, points_std: np.ndarray) -> np.ndarray:
        """Information matrix F at standardized points, one basis per column."""
        pts = np.atleast_2d(np.asarray(points_std, dtype=float))
        if pts.shape[1] != self.index_set.dim:
            raise DataError(f"points have {pts.shape[1]} columns, basis needs {self.index_set.dim}")
        n = pts.shape[0]
        max_deg = self.index_set.max_degree_per_dim()
        tables = [
            eval_univariate_all(self.families[j], int(max_deg[j]), pts[:, j])
            for j in range(pts.shape[1])
        ]
        F = np.ones((n, len(self.index_set)))
        for col, alpha in enumerate(self.index_set):
            for j, k in enumerate(alpha):
                if k > 0:
                    F[:, col] *= tables[j][:, k]
        return F

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Information matrix F at physical points."""
        return self.evaluate_standardized(self.input.standardize(points))


def eval_basis(basis: PolyBasis, points_std: np.ndarray) -> np.ndarray:
    """Module-level alias: information matrix at standardized points."""
    return basis.evaluate_standardized(points_std)
