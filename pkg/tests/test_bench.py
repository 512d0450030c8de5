import math

import numpy as np
import pytest

from pckriging.bench import (
    default_ohagan_params_path,
    eval_ishigami,
    eval_morris,
    eval_ohagan,
    eval_rastrigin,
    eval_rosenbrock,
    eval_sobol,
    get_function,
    ishigami_variance,
    load_ohagan_params,
    relative_generalization_error,
)
from pckriging.doe import Gaussian, Uniform, mc_sample
from pckriging.exceptions import ConfigurationError, DataError


def morris_reference(x):
    """Independent scalar implementation with 1-based index bookkeeping."""

    def w(i):
        if i in (3, 5, 7):
            return 2.0 * (1.1 * x[i - 1] / (x[i - 1] + 0.1) - 0.5)
        return 2.0 * (x[i - 1] - 0.5)

    def b1(i):
        return 20.0 if i <= 10 else (-1.0) ** i

    def b2(i, j):
        return -15.0 if (i <= 6 and j <= 6) else (-1.0) ** (i + j)

    def b3(i, j, l):
        return -10.0 if (i <= 5 and j <= 5 and l <= 5) else 0.0

    total = sum(b1(i) * w(i) for i in range(1, 21))
    total += sum(
        b2(i, j) * w(i) * w(j) for i in range(1, 21) for j in range(i + 1, 21)
    )
    total += sum(
        b3(i, j, l) * w(i) * w(j) * w(l)
        for i in range(1, 21)
        for j in range(i + 1, 21)
        for l in range(j + 1, 21)
    )
    total += 5.0 * w(1) * w(2) * w(3) * w(4)
    return total


class TestIshigami:
    def test_spot_values(self):
        assert eval_ishigami(np.zeros((1, 3)))[0] == 0.0
        assert eval_ishigami(np.array([[math.pi / 2, 0.0, 0.0]]))[0] == pytest.approx(1.0)
        assert eval_ishigami(np.array([[math.pi / 2, math.pi / 2, 1.0]]))[0] == pytest.approx(8.1)

    def test_monte_carlo_variance_matches_analytic(self):
        fn = get_function("ishigami")
        pts = mc_sample(fn.input, 100_000, rng_seed=60).points
        assert float(np.var(fn(pts))) == pytest.approx(ishigami_variance(), abs=0.3)

    def test_input_model(self):
        fn = get_function("ishigami")
        assert fn.dim == 3
        assert all(isinstance(m, Uniform) for m in fn.input.marginals)
        assert fn.input.marginals[0].lower == pytest.approx(-math.pi)


class TestSobol:
    def test_center_point_product(self):
        c = np.array([1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 500.0])
        expected = float(np.prod(c / (1.0 + c)))
        assert eval_sobol(np.full((1, 8), 0.5))[0] == pytest.approx(expected, rel=1e-15)

    def test_origin_product(self):
        c = np.array([1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 500.0])
        expected = float(np.prod((2.0 + c) / (1.0 + c)))
        assert eval_sobol(np.zeros((1, 8)))[0] == pytest.approx(expected, rel=1e-15)

    def test_non_smooth_at_half(self):
        # one-sided slopes across x_1 = 0.5 have opposite signs
        h = 1e-6
        base = np.full((1, 8), 0.3)
        lo, mid, hi = (base.copy() for _ in range(3))
        lo[0, 0], mid[0, 0], hi[0, 0] = 0.5 - h, 0.5, 0.5 + h
        left = (eval_sobol(mid)[0] - eval_sobol(lo)[0]) / h
        right = (eval_sobol(hi)[0] - eval_sobol(mid)[0]) / h
        assert left < 0 < right

    def test_shape_and_input(self):
        fn = get_function("sobol")
        assert fn.dim == 8
        pts = mc_sample(fn.input, 100, rng_seed=1).points
        assert fn(pts).shape == (100,)


class TestRosenbrock:
    def test_spot_values(self):
        assert eval_rosenbrock(np.array([[1.0, 1.0]]))[0] == 0.0
        assert eval_rosenbrock(np.array([[0.0, 0.0]]))[0] == 1.0
        assert eval_rosenbrock(np.array([[-2.0, 2.0]]))[0] == 409.0


class TestRastrigin:
    def test_spot_values(self):
        assert eval_rastrigin(np.zeros((1, 2)))[0] == pytest.approx(20.0)
        assert eval_rastrigin(np.array([[0.5, 0.0]]))[0] == pytest.approx(9.75)

    def test_symmetries(self):
        pts = np.array([[0.7, -1.2]])
        v = eval_rastrigin(pts)[0]
        assert eval_rastrigin(np.array([[-0.7, -1.2]]))[0] == pytest.approx(v)
        assert eval_rastrigin(np.array([[-1.2, 0.7]]))[0] == pytest.approx(v)

    def test_gaussian_inputs(self):
        fn = get_function("rastrigin")
        assert all(isinstance(m, Gaussian) for m in fn.input.marginals)


class TestMorris:
    def test_center_point_closed_form(self):
        # only the three warped factors contribute at x = 0.5
        x = np.full((1, 20), 0.5)
        wv = 2.0 * (1.1 * 0.5 / 0.6 - 0.5)
        expected = 3 * 20.0 * wv + (-15.0 + 1.0 + 1.0) * wv**2
        assert eval_morris(x)[0] == pytest.approx(expected, rel=1e-12)
        assert eval_morris(x)[0] == pytest.approx(morris_reference(x[0]), rel=1e-12)

    def test_against_independent_reference(self):
        rng = np.random.default_rng(123)
        X = rng.uniform(0.0, 1.0, (12, 20))
        vals = eval_morris(X)
        for i in range(12):
            assert vals[i] == pytest.approx(morris_reference(X[i]), rel=1e-11)

    def test_golden_regression_values(self):
        # frozen from the reference implementation above
        X = np.array(
            [
                np.full(20, 0.5),
                np.zeros(20),
                np.ones(20),
                np.linspace(0.0, 1.0, 20),
            ]
        )
        got = eval_morris(X)
        expected = np.array(
            [40.972222222222236, -327.0, -127.0, -75.735491587079665]
        )
        np.testing.assert_allclose(got, expected, rtol=1e-12)

    def test_third_order_needs_three_active_low_dims(self):
        # with at most two of dims 1..5 off-center the triple sum vanishes
        base = np.full(20, 0.5)
        base[0], base[1] = 0.9, 0.2  # two deviations only
        x1 = base.copy()
        direct = eval_morris(x1[None, :])[0]
        no_triples = morris_reference(x1)  # triples are zero here anyway
        assert direct == pytest.approx(no_triples, rel=1e-12)

    def test_shuffling_high_dims_changes_only_sign_pattern_terms(self):
        rng = np.random.default_rng(5)
        x = rng.uniform(0.2, 0.8, 20)
        perm = x.copy()
        perm[10:] = perm[10:][::-1]
        assert eval_morris(x[None, :])[0] == pytest.approx(morris_reference(x), rel=1e-11)
        assert eval_morris(perm[None, :])[0] == pytest.approx(morris_reference(perm), rel=1e-11)


class TestOHagan:
    def test_zero_input_sums_cosine_coefficients(self):
        params = load_ohagan_params(default_ohagan_params_path())
        got = eval_ohagan(np.zeros((1, 15)), params)[0]
        assert got == pytest.approx(float(np.sum(params.a3)), rel=1e-12)

    def test_first_order_taylor(self):
        params = load_ohagan_params(default_ohagan_params_path())
        rng = np.random.default_rng(3)
        direction = rng.normal(size=15)
        direction /= np.linalg.norm(direction)
        eps = 1e-7
        x = (eps * direction)[None, :]
        df = eval_ohagan(x, params)[0] - eval_ohagan(np.zeros((1, 15)), params)[0]
        expected = eps * float((params.a1 + params.a2) @ direction)
        assert df == pytest.approx(expected, abs=1e-10)

    def test_spot_value_against_independent_route(self):
        params = load_ohagan_params(default_ohagan_params_path())
        rng = np.random.default_rng(8)
        x = rng.normal(size=(1, 15))
        direct = eval_ohagan(x, params)[0]
        other = (
            float(params.a1 @ x[0])
            + float(params.a2 @ np.sin(x[0]))
            + float(params.a3 @ np.cos(x[0]))
            + float(x[0] @ params.Q @ x[0])
        )
        assert direct == pytest.approx(other, rel=1e-12)

    def test_missing_file_raises_configuration_error(self, tmp_path):
        with pytest.raises(ConfigurationError):
            load_ohagan_params(tmp_path / "nope.txt")

    def test_malformed_file_raises(self, tmp_path):
        bad = tmp_path / "bad.txt"
        bad.write_text("1 2 3\n")
        with pytest.raises(ConfigurationError, match="18 rows"):
            load_ohagan_params(bad)
        bad.write_text("\n".join("a b c" for _ in range(18)))
        with pytest.raises(ConfigurationError):
            load_ohagan_params(bad)

    def test_registry_uses_packaged_demo_params(self):
        fn = get_function("ohagan")
        assert fn.dim == 15
        assert np.isfinite(fn(np.zeros((1, 15)))[0])


class TestVectorization:
    @pytest.mark.parametrize(
        "name", ["ishigami", "sobol", "rosenbrock", "morris", "rastrigin", "ohagan"]
    )
    def test_batch_equals_rowwise_bitwise(self, name):
        fn = get_function(name)
        pts = mc_sample(fn.input, 17, rng_seed=99).points
        batch = fn(pts)
        rows = np.array([fn(pts[i : i + 1])[0] for i in range(17)])
        np.testing.assert_array_equal(batch, rows)


class TestGeneralizationError:
    def test_perfect_prediction_is_zero(self):
        y = np.array([1.0, 2.0, 3.0, 4.0])
        assert relative_generalization_error(y, y) == 0.0

    def test_mean_prediction_is_one(self):
        y = np.array([1.0, 2.0, 3.0, 4.0])
        pred = np.full(4, y.mean())
        assert relative_generalization_error(pred, y) == pytest.approx(1.0)

    def test_scaled_noise_construction(self):
        rng = np.random.default_rng(11)
        y = rng.normal(size=500)
        noise = rng.normal(size=500)
        target = 0.01 * float(np.sum((y - y.mean()) ** 2))
        noise *= math.sqrt(target / float(np.sum(noise**2)))
        got = relative_generalization_error(y + noise, y)
        assert got == pytest.approx(0.01, rel=1e-12)

    def test_degenerate_inputs_rejected(self):
        with pytest.raises(DataError):
            relative_generalization_error([1.0], [1.0])
        with pytest.raises(DataError):
            relative_generalization_error([1.0, 2.0], [3.0, 3.0])


def test_unknown_function_rejected():
    with pytest.raises(ConfigurationError):
        get_function("ackley")


def test_evaluator_dimension_checked():
    with pytest.raises(DataError):
        eval_ishigami(np.zeros((3, 2)))
