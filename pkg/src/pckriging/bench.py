"""Analytical benchmark functions and the relative generalization error.

Evaluators take an (n, M) array and return length-n values. They are
written as plain accumulation loops over coordinates so that evaluating
a batch is bitwise identical to evaluating rows one at a time (BLAS
batch kernels do not guarantee that).
"""

import math
from dataclasses import dataclass
from importlib import resources
from typing import Callable

import numpy as np

from .doe import InputModel, standard_gaussians, uniform_box
from .exceptions import ConfigurationError, DataError

ISHIGAMI = "ishigami"
SOBOL = "sobol"
ROSENBROCK = "rosenbrock"
MORRIS = "morris"
RASTRIGIN = "rastrigin"
OHAGAN = "ohagan"

FUNCTION_NAMES = (ISHIGAMI, SOBOL, ROSENBROCK, MORRIS, RASTRIGIN, OHAGAN)

_SOBOL_C = np.array([1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 500.0])


def _check(X, dim) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != dim:
        raise DataError(f"expected {dim} input columns, got {X.shape[1]}")
    return X


def eval_ishigami(X) -> np.ndarray:
    """sin x1 + 7 sin^2 x2 + 0.1 x3^4 sin x1 on (-pi, pi)^3."""
    X = _check(X, 3)
    s1 = np.sin(X[:, 0])
    return s1 + 7.0 * np.sin(X[:, 1]) ** 2 + 0.1 * X[:, 2] ** 4 * s1


def ishigami_variance(a: float = 7.0, b: float = 0.1) -> float:
    """Closed-form output variance under the uniform input model."""
    return (
        a**2 / 8.0
        + b * math.pi**4 / 5.0
        + b**2 * math.pi**8 / 18.0
        + 0.5
    )


def eval_sobol(X) -> np.ndarray:
    """Product of (|4 x_i - 2| + c_i) / (1 + c_i) over eight factors."""
    X = _check(X, 8)
    out = np.ones(X.shape[0])
    for i in range(8):
        out *= (np.abs(4.0 * X[:, i] - 2.0) + _SOBOL_C[i]) / (1.0 + _SOBOL_C[i])
    return out


def eval_rosenbrock(X) -> np.ndarray:
    """100 (x2 - x1^2)^2 + (1 - x1)^2."""
    X = _check(X, 2)
    return 100.0 * (X[:, 1] - X[:, 0] ** 2) ** 2 + (1.0 - X[:, 0]) ** 2


def eval_rastrigin(X) -> np.ndarray:
    """10 - sum_i (x_i^2 - 5 cos(2 pi x_i)) over two factors."""
    X = _check(X, 2)
    out = np.full(X.shape[0], 10.0)
    for i in range(2):
        out -= X[:, i] ** 2 - 5.0 * np.cos(2.0 * math.pi * X[:, i])
    return out


# Morris coefficients: first-order 20 for i <= 10, pairs -15 for i, j <= 6,
# triples -10 for i, j, l <= 5, the remaining first/second order (-1)^i and
# (-1)^(i+j), remaining triples zero; all indices 1-based.
_MORRIS_B1 = np.array(
    [20.0 if i <= 10 else (-1.0) ** i for i in range(1, 21)]
)
_MORRIS_PAIRS = [
    (i, j, -15.0 if (i + 1 <= 6 and j + 1 <= 6) else (-1.0) ** ((i + 1) + (j + 1)))
    for i in range(20)
    for j in range(i + 1, 20)
]
_MORRIS_TRIPLES = [
    (i, j, l)
    for i in range(5)
    for j in range(i + 1, 5)
    for l in range(j + 1, 5)
]
_MORRIS_WARPED = (2, 4, 6)  # i = 3, 5, 7


def eval_morris(X) -> np.ndarray:
    """Morris screening function on [0, 1]^20 with three warped factors."""
    X = _check(X, 20)
    W = 2.0 * (X - 0.5)
    for j in _MORRIS_WARPED:
        W[:, j] = 2.0 * (1.1 * X[:, j] / (X[:, j] + 0.1) - 0.5)
    out = np.zeros(X.shape[0])
    for i in range(20):
        out += _MORRIS_B1[i] * W[:, i]
    for i, j, b in _MORRIS_PAIRS:
        out += b * W[:, i] * W[:, j]
    for i, j, l in _MORRIS_TRIPLES:
        out += -10.0 * W[:, i] * W[:, j] * W[:, l]
    out += 5.0 * W[:, 0] * W[:, 1] * W[:, 2] * W[:, 3]
    return out


@dataclass(frozen=True)
class OHaganParams:
    """Coefficients of the 15-dimensional linear/trig/quadratic test function."""

    a1: np.ndarray
    a2: np.ndarray
    a3: np.ndarray
    Q: np.ndarray


def load_ohagan_params(path) -> OHaganParams:
    """Parse the parameter file: 3 rows of 15 reals, then a 15 x 15 matrix.

    Lines starting with '#' and blank lines are ignored. Raises
    ConfigurationError on a missing or malformed file.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            rows = []
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                rows.append([float(v) for v in line.split()])
    except OSError as exc:
        raise ConfigurationError(f"cannot read O'Hagan parameter file: {exc}") from exc
    except ValueError as exc:
        raise ConfigurationError(f"malformed O'Hagan parameter file {path}: {exc}") from exc
    if len(rows) != 18 or any(len(r) != 15 for r in rows):
        raise ConfigurationError(
            f"O'Hagan parameter file {path} must hold 18 rows of 15 reals, "
            f"got {len(rows)} rows"
        )
    data = np.asarray(rows)
    return OHaganParams(a1=data[0], a2=data[1], a3=data[2], Q=data[3:])


def default_ohagan_params_path():
    """Packaged demo parameter file (see its header for provenance)."""
    return resources.files("pckriging").joinpath("data/ohagan_demo_params.txt")


def eval_ohagan(X, params: OHaganParams) -> np.ndarray:
    """a1'x + a2' sin(x) + a3' cos(x) + x'Qx with externally loaded parameters."""
    X = _check(X, 15)
    n = X.shape[0]
    out = np.zeros(n)
    sx, cx = np.sin(X), np.cos(X)
    for k in range(15):
        out += params.a1[k] * X[:, k]
    for k in range(15):
        out += params.a2[k] * sx[:, k]
    for k in range(15):
        out += params.a3[k] * cx[:, k]
    for j in range(15):
        col = np.zeros(n)
        for k in range(15):
            col += X[:, k] * params.Q[k, j]
        out += X[:, j] * col
    return out


@dataclass(frozen=True)
class BenchmarkFunction:
    """Named deterministic map with its probabilistic input model."""

    name: str
    input: InputModel
    evaluator: Callable[[np.ndarray], np.ndarray]

    @property
    def dim(self) -> int:
        return self.input.dim

    def __call__(self, X) -> np.ndarray:
        return self.evaluator(X)


def get_function(name: str, ohagan_params_path=None) -> BenchmarkFunction:
    """Benchmark function by name; O'Hagan requires its parameter file.

    If no path is given for O'Hagan the packaged demo parameters are used;
    a missing or malformed file raises ConfigurationError rather than
    silently returning zeros.
    """
    name = name.lower()
    if name == ISHIGAMI:
        return BenchmarkFunction(name, uniform_box(-math.pi, math.pi, 3), eval_ishigami)
    if name == SOBOL:
        return BenchmarkFunction(name, uniform_box(0.0, 1.0, 8), eval_sobol)
    if name == ROSENBROCK:
        return BenchmarkFunction(name, uniform_box(-2.0, 2.0, 2), eval_rosenbrock)
    if name == MORRIS:
        return BenchmarkFunction(name, uniform_box(0.0, 1.0, 20), eval_morris)
    if name == RASTRIGIN:
        return BenchmarkFunction(name, standard_gaussians(2), eval_rastrigin)
    if name == OHAGAN:
        path = ohagan_params_path or default_ohagan_params_path()
        params = load_ohagan_params(path)
        return BenchmarkFunction(
            name, standard_gaussians(15), lambda X: eval_ohagan(X, params)
        )
    raise ConfigurationError(
        f"unknown benchmark function {name!r}; choose from {FUNCTION_NAMES}"
    )


def relative_generalization_error(y_pred, y_true) -> float:
    """Validation-set squared error normalized by the validation variance."""
    y_pred = np.asarray(y_pred, dtype=float).ravel()
    y_true = np.asarray(y_true, dtype=float).ravel()
    if y_pred.shape != y_true.shape:
        raise DataError("prediction and truth lengths differ")
    n = y_true.shape[0]
    if n < 2:
        raise DataError("relative generalization error needs n >= 2")
    mu = y_true.mean()
    den = float(np.sum((y_true - mu) ** 2))
    if den == 0.0:
        raise DataError("validation responses have zero variance")
    return float(np.sum((y_true - y_pred) ** 2)) / den
