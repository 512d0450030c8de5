"""Input distributions, Latin-hypercube designs, and validation sampling.

Inputs are vectors of independent uniform or Gaussian components. Designs
map stratified or i.i.d. uniforms through the marginal inverse CDFs; the
same marginals also define the affine map onto the reference support of
the orthonormal polynomial families (uniform -> [-1, 1], Gaussian ->
standard normal).
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .exceptions import DataError, DomainError

# Counter-based generator so that designs are reproducible across runs and
# platforms for a fixed 64-bit seed.
RNG_NAME = "philox"

_SEED_MASK = (1 << 64) - 1


def rng_from_seed(seed: int) -> np.random.Generator:
    """Return the package-wide counter-based generator for a 64-bit seed."""
    return np.random.Generator(np.random.Philox(key=int(seed) & _SEED_MASK))


@dataclass(frozen=True)
class Uniform:
    """Uniform marginal on [lower, upper]."""

    lower: float
    upper: float

    def __post_init__(self):
        if not self.lower < self.upper:
            raise DataError(f"uniform marginal requires lower < upper, got [{self.lower}, {self.upper}]")

    def ppf(self, p):
        return self.lower + (self.upper - self.lower) * np.asarray(p, dtype=float)

    def in_support(self, x):
        x = np.asarray(x, dtype=float)
        return (x >= self.lower) & (x <= self.upper)

    def standardize(self, x):
        """Affine map onto [-1, 1]."""
        x = np.asarray(x, dtype=float)
        return 2.0 * (x - self.lower) / (self.upper - self.lower) - 1.0

    def destandardize(self, u):
        u = np.asarray(u, dtype=float)
        return self.lower + 0.5 * (u + 1.0) * (self.upper - self.lower)


@dataclass(frozen=True)
class Gaussian:
    """Gaussian marginal with given mean and standard deviation."""

    mean: float
    stddev: float

    def __post_init__(self):
        if not self.stddev > 0:
            raise DataError(f"gaussian marginal requires stddev > 0, got {self.stddev}")

    def ppf(self, p):
        return self.mean + self.stddev * ndtri(np.asarray(p, dtype=float))

    def in_support(self, x):
        x = np.asarray(x, dtype=float)
        return np.isfinite(x)

    def standardize(self, x):
        """Affine map onto the standard normal."""
        x = np.asarray(x, dtype=float)
        return (x - self.mean) / self.stddev

    def destandardize(self, u):
        u = np.asarray(u, dtype=float)
        return self.mean + self.stddev * u


Marginal = Uniform | Gaussian


@dataclass(frozen=True)
class InputModel:
    """Vector of independent marginals; joint PDF is their product."""

    marginals: tuple[Marginal, ...]

    def __post_init__(self):
        if len(self.marginals) < 1:
            raise DataError("input model needs at least one marginal")
        object.__setattr__(self, "marginals", tuple(self.marginals))

    @property
    def dim(self) -> int:
        return len(self.marginals)

    def standardize(self, points: np.ndarray) -> np.ndarray:
        """Map physical points onto the reference support, column by column.

        Raises DomainError if any point falls outside a marginal's support.
        """
        pts = _as_points(points, self.dim)
        out = np.empty_like(pts)
        for j, marg in enumerate(self.marginals):
            inside = marg.in_support(pts[:, j])
            if not np.all(inside):
                bad = int(np.argmin(inside))
                raise DomainError(
                    f"point outside support in column {j + 1}: x={pts[bad, j]!r}"
                )
            out[:, j] = marg.standardize(pts[:, j])
        return out

    def destandardize(self, points_std: np.ndarray) -> np.ndarray:
        pts = _as_points(points_std, self.dim)
        out = np.empty_like(pts)
        for j, marg in enumerate(self.marginals):
            out[:, j] = marg.destandardize(pts[:, j])
        return out

    def to_dict(self) -> dict:
        out = []
        for m in self.marginals:
            if isinstance(m, Uniform):
                out.append({"kind": "uniform", "lower": m.lower, "upper": m.upper})
            else:
                out.append({"kind": "gaussian", "mean": m.mean, "stddev": m.stddev})
        return {"marginals": out}

    @classmethod
    def from_dict(cls, d: dict) -> "InputModel":
        margs = []
        for spec in d["marginals"]:
            kind = spec.get("kind")
            if kind == "uniform":
                margs.append(Uniform(float(spec["lower"]), float(spec["upper"])))
            elif kind == "gaussian":
                margs.append(Gaussian(float(spec["mean"]), float(spec["stddev"])))
            else:
                raise DataError(f"unknown marginal kind: {kind!r}")
        return cls(tuple(margs))


def uniform_box(lower: float, upper: float, dim: int) -> InputModel:
    """M independent Uniform(lower, upper) components."""
    return InputModel(tuple(Uniform(lower, upper) for _ in range(dim)))


def standard_gaussians(dim: int) -> InputModel:
    """M independent standard normal components."""
    return InputModel(tuple(Gaussian(0.0, 1.0) for _ in range(dim)))


@dataclass
class ExperimentalDesign:
    """Input matrix (N x M) with optional responses of length N."""

    points: np.ndarray
    responses: np.ndarray | None = None

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points, dtype=float))
        if self.points.ndim != 2 or self.points.shape[0] < 1:
            raise DataError("design needs an N x M point matrix with N >= 1")
        if self.responses is not None:
            self.responses = np.asarray(self.responses, dtype=float).ravel()
            if self.responses.shape[0] != self.points.shape[0]:
                raise DataError(
                    f"{self.responses.shape[0]} responses for {self.points.shape[0]} points"
                )

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def with_responses(self, responses: np.ndarray) -> "ExperimentalDesign":
        return ExperimentalDesign(self.points, responses)


# Tolerance below which two rows count as the same point (in standardized
# coordinates); duplicates would make the Kriging correlation matrix singular.
DUPLICATE_TOL = 1e-12


def validate_design(input_model: InputModel, design: ExperimentalDesign) -> None:
    """Check support membership and absence of duplicate rows.

    Duplicates are detected on lexicographically sorted standardized rows;
    adjacent rows closer than DUPLICATE_TOL in every column are rejected.
    """
    if design.dim != input_model.dim:
        raise DataError(f"design has {design.dim} columns, input model has {input_model.dim}")
    std = input_model.standardize(design.points)
    if design.n < 2:
        return
    order = np.lexsort(std.T[::-1])
    diffs = np.abs(np.diff(std[order], axis=0))
    dup = np.all(diffs <= DUPLICATE_TOL, axis=1)
    if np.any(dup):
        i = int(np.argmax(dup))
        raise DataError(
            f"duplicate design rows {order[i]} and {order[i + 1]} (tol {DUPLICATE_TOL:g})"
        )


def lhs_sample(input_model: InputModel, n: int, rng_seed: int) -> ExperimentalDesign:
    """Latin-hypercube design with one point per equiprobable stratum.

    Random-permutation LHS: per column, the n strata [k/n, (k+1)/n) are
    jittered uniformly, permuted independently, and mapped through the
    marginal inverse CDF. Deterministic for a fixed seed.
    """
    if n < 1:
        raise DataError("lhs_sample needs n >= 1")
    rng = rng_from_seed(rng_seed)
    m = input_model.dim
    pts = np.empty((n, m))
    strata = np.arange(n, dtype=float)
    for j, marg in enumerate(input_model.marginals):
        u = (strata + rng.random(n)) / n
        # keep the Gaussian ppf finite at the outermost strata
        u = np.clip(u, 1e-15, 1.0 - 1e-15)
        pts[:, j] = marg.ppf(rng.permutation(u))
    design = ExperimentalDesign(pts)
    validate_design(input_model, design)
    return design


def mc_sample(input_model: InputModel, n: int, rng_seed: int) -> ExperimentalDesign:
    """I.i.d. draws from the input model; deterministic for a fixed seed."""
    if n < 1:
        raise DataError("mc_sample needs n >= 1")
    rng = rng_from_seed(rng_seed)
    m = input_model.dim
    u = np.clip(rng.random((n, m)), 1e-15, 1.0 - 1e-15)
    pts = np.empty((n, m))
    for j, marg in enumerate(input_model.marginals):
        pts[:, j] = marg.ppf(u[:, j])
    design = ExperimentalDesign(pts)
    validate_design(input_model, design)
    return design


def standardize(input_model: InputModel, points: np.ndarray) -> np.ndarray:
    """Module-level alias for InputModel.standardize."""
    return input_model.standardize(points)


def _as_points(points, dim: int) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(1, -1) if pts.size == dim else pts.reshape(-1, 1)
    if pts.ndim != 2 or pts.shape[1] != dim:
        raise DataError(f"expected an N x {dim} point matrix, got shape {pts.shape}")
    return pts


def save_design_csv(design: ExperimentalDesign, path) -> None:
    """Write `x1,...,xM[,y]` with full %.17g precision."""
    m = design.dim
    header = [f"x{j + 1}" for j in range(m)]
    cols = [design.points]
    if design.responses is not None:
        header.append("y")
        cols.append(design.responses.reshape(-1, 1))
    data = np.hstack(cols)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in data:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def load_design_csv(path) -> ExperimentalDesign:
    """Read a design written by save_design_csv (trailing `y` optional)."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if not header:
            raise DataError(f"{path}: empty design file")
        names = [c.strip() for c in header.split(",")]
        has_y = names[-1] == "y"
        x_names = names[:-1] if has_y else names
        if x_names != [f"x{j + 1}" for j in range(len(x_names))]:
            raise DataError(f"{path}: expected header x1,...,xM[,y], got {header!r}")
        rows = []
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            vals = line.split(",")
            if len(vals) != len(names):
                raise DataError(f"{path}:{lineno}: expected {len(names)} columns, got {len(vals)}")
            try:
                rows.append([float(v) for v in vals])
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from exc
    if not rows:
        raise DataError(f"{path}: no data rows")
    data = np.asarray(rows)
    if has_y:
        return ExperimentalDesign(data[:, :-1], data[:, -1])
    return ExperimentalDesign(data)
