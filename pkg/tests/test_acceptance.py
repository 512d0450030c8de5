"""Acceptance suite: one test per release criterion, in order.

Each test prints a `[acceptance] criterion N` line (run pytest with -s to
stream them). The campaign-scale criteria drive the same code paths as
the CLI `bench` command.
"""

import math
import time

import numpy as np
import pytest
from scipy.stats import spearmanr

from pckriging.bench import get_function, relative_generalization_error
from pckriging.campaign import CampaignConfig, run_campaign
from pckriging.doe import ExperimentalDesign, lhs_sample, mc_sample, uniform_box
from pckriging.kriging import (
    DIRAC,
    MATERN52,
    Kernel,
    TrendBasis,
    calibrate,
    fit_blue,
    loo_kriging,
    predict,
)
from pckriging.metrics import read_results_csv
from pckriging.orthopoly import (
    HERMITE,
    LEGENDRE,
    PolyBasis,
    build_index_set,
    eval_univariate_all,
)
from pckriging.pce import fit_lar_adaptive, fit_ols, loo_pce, predict_pce
from pckriging.pck import fit_opc, fit_spc, predict_pck


def report(criterion, ok, detail):
    status = "PASS" if ok else "FAIL"
    print(f"[acceptance] criterion {criterion}: {status} — {detail}")
    assert ok, f"criterion {criterion}: {detail}"


# ---------------------------------------------------------------- criterion 1


def _brute_pce_loo(basis, design):
    n = design.n
    total = 0.0
    for i in range(n):
        keep = [j for j in range(n) if j != i]
        sub = ExperimentalDesign(design.points[keep], design.responses[keep])
        model = fit_ols(basis, sub)
        total += (design.responses[i] - predict_pce(model, design.points[i : i + 1])[0]) ** 2
    return total / n


def test_criterion_1a_pce_loo_oracle():
    rng = np.random.default_rng(20150921)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(50):
        m = int(rng.integers(1, 3))
        p = int(rng.integers(1, 4))
        size = math.comb(m + p, p)
        n = int(rng.integers(size + 2, 31))
        im = uniform_box(-1.0, 1.0, m)
        design = lhs_sample(im, n, rng_seed=int(rng.integers(1 << 31)))
        y = np.sin(2.0 * design.points[:, 0]) + rng.normal(size=n)
        design = design.with_responses(y)
        basis = PolyBasis.for_input(im, build_index_set(m, p, 1.0))
        model = fit_ols(basis, design)
        analytic = loo_pce(model, design)
        brute = _brute_pce_loo(basis, design)
        worst = max(worst, abs(analytic - brute) / max(1.0, abs(brute)))
    elapsed = time.perf_counter() - t0
    report(
        "1a",
        worst <= 1e-10 and elapsed < 10.0,
        f"50 instances, worst rel diff {worst:.2e}, {elapsed:.1f}s (< 10s)",
    )


def _brute_kriging_loo(trend, kernel, design, nugget):
    n = design.n
    total = 0.0
    for i in range(n):
        keep = [j for j in range(n) if j != i]
        sub = ExperimentalDesign(design.points[keep], design.responses[keep])
        model = fit_blue(trend, kernel, sub, ladder=(nugget,))
        total += (design.responses[i] - predict(model, design.points[i : i + 1])[0][0]) ** 2
    return total / n


def test_criterion_1b_kriging_loo_oracle():
    rng = np.random.default_rng(19772004)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(25):
        m = int(rng.integers(1, 3))
        n = int(rng.integers(8, 16))
        im = uniform_box(0.0, 1.0, m)
        design = lhs_sample(im, n, rng_seed=int(rng.integers(1 << 31)))
        y = np.cos(3.0 * design.points[:, 0]) + 0.5 * rng.normal(size=n)
        design = design.with_responses(y)
        trend = TrendBasis.constant()
        kernel = Kernel(MATERN52, tuple(0.3 + 0.4 * rng.random(m)))
        model = fit_blue(trend, kernel, design, ladder=(1e-10,))
        analytic = loo_kriging(model)
        brute = _brute_kriging_loo(trend, kernel, design, 1e-10)
        worst = max(worst, abs(analytic - brute) / max(1.0, abs(brute)))
    elapsed = time.perf_counter() - t0
    report(
        "1b",
        worst <= 1e-8 and elapsed < 60.0,
        f"25 instances, worst rel diff {worst:.2e}, {elapsed:.1f}s (< 60s)",
    )


def test_criterion_1c_degenerate_kernel_equivalences():
    rng = np.random.default_rng(3401)
    worst_beta = worst_mean = worst_loo = 0.0
    for _ in range(10):
        m = int(rng.integers(1, 3))
        p = int(rng.integers(1, 3))
        size = math.comb(m + p, p)
        n = int(rng.integers(size + 3, 25))
        im = uniform_box(-1.0, 1.0, m)
        design = lhs_sample(im, n, rng_seed=int(rng.integers(1 << 31)))
        design = design.with_responses(rng.normal(size=n))
        basis = PolyBasis.for_input(im, build_index_set(m, p, 1.0))
        pce = fit_ols(basis, design)
        krig = fit_blue(TrendBasis.polynomials(basis), Kernel(DIRAC, (1.0,) * m), design)
        pts = lhs_sample(im, 12, rng_seed=int(rng.integers(1 << 31))).points
        worst_beta = max(worst_beta, float(np.max(np.abs(krig.beta - pce.coeffs))))
        worst_mean = max(
            worst_mean,
            float(np.max(np.abs(predict(krig, pts)[0] - predict_pce(pce, pts)))),
        )
        worst_loo = max(worst_loo, abs(loo_kriging(krig) - loo_pce(pce, design)))
    ok = worst_beta <= 1e-10 and worst_mean <= 1e-10 and worst_loo <= 1e-10
    report(
        "1c",
        ok,
        f"R=I suite: |dbeta| {worst_beta:.1e}, |dmean| {worst_mean:.1e}, |dLOO| {worst_loo:.1e}",
    )


# ---------------------------------------------------------------- criterion 2


def test_criterion_2_orthonormality():
    worst = 0.0
    for family in (LEGENDRE, HERMITE):
        if family == LEGENDRE:
            x, w = np.polynomial.legendre.leggauss(40)
            w = w / 2.0
        else:
            x, w = np.polynomial.hermite_e.hermegauss(60)
            w = w / math.sqrt(2.0 * math.pi)
        V = eval_univariate_all(family, 12, x)
        gram = (V * w[:, None]).T @ V
        worst = max(worst, float(np.max(np.abs(gram - np.eye(13)))))
    report("2", worst <= 1e-10, f"max |<psi_j, psi_k> - delta_jk| = {worst:.2e} (degrees <= 12)")


# ---------------------------------------------------------------- criterion 3


def test_criterion_3_interpolation():
    worst_mean = worst_var = 0.0
    cases = []
    for name, n in (("ishigami", 32), ("rastrigin", 48)):
        fn = get_function(name)
        design = lhs_sample(fn.input, n, rng_seed=60 + n)
        design = design.with_responses(fn(design.points))
        cases.append(("ok", calibrate(TrendBasis.constant(), design), design))
        cases.append(("spc", fit_spc(design, fn.input).model, design))
        cases.append(("opc", fit_opc(design, fn.input).model, design))
    for label, model, design in cases:
        mean, var = predict(model, design.points)
        sd = float(np.std(design.responses))
        worst_mean = max(worst_mean, float(np.max(np.abs(mean - design.responses))) / sd)
        worst_var = max(worst_var, float(np.max(var)) / model.sigma2)
    ok = worst_mean <= 1e-6 and worst_var <= 1e-6
    report(
        "3",
        ok,
        f"{len(cases)} calibrated models: max |mu-Y|/sd = {worst_mean:.1e}, "
        f"max var/sigma2 = {worst_var:.1e} (<= 1e-6)",
    )


# ---------------------------------------------------------------- criterion 4


def test_criterion_4_rosenbrock_exactness():
    t0 = time.perf_counter()
    fn = get_function("rosenbrock")
    val = mc_sample(fn.input, 10_000, rng_seed=1914)
    y_val = fn(val.points)
    eps = {"pce": [], "spc": [], "opc": []}
    for rep in range(10):
        design = lhs_sample(fn.input, 20, rng_seed=5000 + rep)
        design = design.with_responses(fn(design.points))
        pce, _ = fit_lar_adaptive(design, fn.input)
        eps["pce"].append(relative_generalization_error(predict_pce(pce, val.points), y_val))
        spc = fit_spc(design, fn.input)
        eps["spc"].append(
            relative_generalization_error(predict_pck(spc, val.points)[0], y_val)
        )
        opc = fit_opc(design, fn.input)
        eps["opc"].append(
            relative_generalization_error(predict_pck(opc, val.points)[0], y_val)
        )
    medians = {k: float(np.median(v)) for k, v in eps.items()}
    elapsed = time.perf_counter() - t0
    ok = all(v <= 1e-8 for v in medians.values()) and elapsed < 120.0
    report(
        "4",
        ok,
        "N=20, 10 reps, median eps: "
        + ", ".join(f"{k}={v:.1e}" for k, v in medians.items())
        + f"; {elapsed:.0f}s (< 120s)",
    )


# ------------------------------------------------------- criteria 5, 6, 7, 8


@pytest.fixture(scope="module")
def ishigami_campaign(tmp_path_factory):
    out = tmp_path_factory.mktemp("campaign")
    cfg = CampaignConfig(
        functions=["ishigami"],
        methods=["ok", "pce", "spc", "opc"],
        design_sizes=[32, 64, 128],
        replications=15,
        validation_n=10_000,
        base_seed=2015,
        output_dir=str(out),
    )
    t0 = time.perf_counter()
    results_path = run_campaign(cfg, workers=2, log=lambda *a: None)
    elapsed = time.perf_counter() - t0
    return read_results_csv(results_path), elapsed


def test_criterion_5_ishigami_convergence(ishigami_campaign):
    results, elapsed = ishigami_campaign
    medians = {}
    for r in results:
        medians.setdefault((r.method, r.n_design), []).append(r.eps_gen)
    medians = {k: float(np.median(v)) for k, v in medians.items()}
    monotone = all(
        medians[(m, 32)] > medians[(m, 64)] > medians[(m, 128)]
        for m in ("ok", "pce", "spc", "opc")
    )
    opc128 = medians[("opc", 128)]
    floor128 = min(medians[("pce", 128)], medians[("ok", 128)])
    tracking = opc128 <= 1.2 * floor128
    detail = (
        "medians "
        + "; ".join(
            f"{m}: " + "/".join(f"{medians[(m, n)]:.1e}" for n in (32, 64, 128))
            for m in ("ok", "pce", "spc", "opc")
        )
        + f"; opc@128 {opc128:.2e} vs 1.2*min {1.2 * floor128:.2e}; {elapsed / 60:.1f} min (< 30)"
    )
    report("5", monotone and tracking and elapsed < 1800.0, detail)


def test_criterion_6_machine_precision_regime():
    fn = get_function("ishigami")
    design = lhs_sample(fn.input, 256, rng_seed=11235)
    design = design.with_responses(fn(design.points))
    val = mc_sample(fn.input, 10_000, rng_seed=81321)
    y_val = fn(val.points)
    pce, _ = fit_lar_adaptive(design, fn.input)
    eps_pce = relative_generalization_error(predict_pce(pce, val.points), y_val)
    opc = fit_opc(design, fn.input)
    eps_opc = relative_generalization_error(predict_pck(opc, val.points)[0], y_val)
    ok = eps_pce <= 1e-8 and eps_opc <= 1e-8
    report("6", ok, f"N=256: eps(pce)={eps_pce:.1e}, eps(opc)={eps_opc:.1e} (<= 1e-8)")


def test_criterion_7_loo_tracks_generalization():
    fn = get_function("ishigami")
    design = lhs_sample(fn.input, 128, rng_seed=4096)
    design = design.with_responses(fn(design.points))
    val = mc_sample(fn.input, 10_000, rng_seed=8192)
    y_val = fn(val.points)
    opc = fit_opc(design, fn.input, keep_prefix_models=True)

    y = design.responses
    var_n = float(np.mean((y - y.mean()) ** 2))
    rel_loo, gen = [], []
    for q, model in enumerate(opc.prefix_models):
        if model is None or not np.isfinite(opc.loo_curve[q]):
            continue
        rel_loo.append(opc.loo_curve[q] / var_n)
        gen.append(relative_generalization_error(predict(model, val.points)[0], y_val))
    rel_loo, gen = np.asarray(rel_loo), np.asarray(gen)
    rho = float(spearmanr(rel_loo, gen).statistic)
    under = float(np.mean(np.sign(rel_loo - gen)))
    ok = rho >= 0.8 and under <= 0.0
    report(
        "7",
        ok,
        f"{len(gen)} prefixes: spearman(loo, eps)={rho:.3f} (>= 0.8), "
        f"mean sign(loo-eps)={under:+.2f} (<= 0)",
    )


def test_criterion_8_campaign_determinism(tmp_path):
    def run(out_dir):
        cfg = CampaignConfig(
            functions=["rosenbrock"],
            methods=["ok", "pce", "spc", "opc"],
            design_sizes=[16],
            replications=3,
            validation_n=2000,
            base_seed=31337,
            output_dir=str(out_dir),
        )
        return read_results_csv(run_campaign(cfg, workers=1, log=lambda *a: None))

    run1 = {r.key(): r for r in run(tmp_path / "a")}
    run2 = {r.key(): r for r in run(tmp_path / "b")}
    assert set(run1) == set(run2)
    worst_opc = 0.0
    bitwise_ok = True
    for key, r1 in run1.items():
        r2 = run2[key]
        if r1.method in ("pce", "spc", "ok"):
            bitwise_ok &= (r1.eps_gen == r2.eps_gen) and (r1.seed == r2.seed)
        else:
            denom = max(abs(r1.eps_gen), 1e-300)
            worst_opc = max(worst_opc, abs(r1.eps_gen - r2.eps_gen) / denom)
    ok = bitwise_ok and worst_opc <= 1e-8
    report(
        "8",
        ok,
        f"repeated bench: pce/spc/ok bitwise={bitwise_ok}, opc worst rel diff {worst_opc:.1e}",
    )
