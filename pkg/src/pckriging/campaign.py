"""Benchmark campaign driver: seeding, paired designs, resume, workers.

Within one replication every method sees the identical Latin-hypercube
design (paired comparison), so the design seed is derived from
(base seed, function, N, replication) only. Each function gets a single
validation set per campaign. All derived seeds are pure functions of the
written config, which makes interrupted campaigns resumable and repeated
campaigns reproducible.
"""

import functools
import hashlib
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import metrics
from .bench import get_function, relative_generalization_error
from .doe import lhs_sample, mc_sample
from .exceptions import ConfigurationError, PckrigingError
from .kriging import CalibrationConfig, TrendBasis, calibrate, predict
from .metrics import BenchResult
from .pce import PceConfig, fit_lar_adaptive, predict_pce
from .pck import OpcConfig, fit_opc, fit_spc, predict_pck

METHODS = ("ok", "pce", "spc", "opc")

WORKERS_ENV = "PCKRIGING_WORKERS"

_MASK64 = (1 << 64) - 1


def _hash64(*parts) -> int:
    text = "|".join(str(p) for p in parts)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def design_seed(base_seed: int, function: str, n: int, replication: int) -> int:
    return (int(base_seed) ^ _hash64("design", function, n, replication)) & _MASK64


def validation_seed(base_seed: int, function: str) -> int:
    return (int(base_seed) ^ _hash64("validation", function)) & _MASK64


@dataclass
class CampaignConfig:
    """Full campaign description; defaults are materialized when written."""

    functions: list = field(default_factory=lambda: ["ishigami"])
    methods: list = field(default_factory=lambda: list(METHODS))
    design_sizes: list = field(default_factory=lambda: [32, 64, 128])
    replications: int = 50
    validation_n: int = 100_000
    base_seed: int = 101
    pce: PceConfig = field(default_factory=PceConfig)
    kriging: CalibrationConfig = field(default_factory=CalibrationConfig)
    kernel: str = "matern52"
    kernel_nu: float | None = None
    opc: OpcConfig = field(default_factory=OpcConfig)
    ohagan_params: str | None = None
    output_dir: str = "bench_out"

    def __post_init__(self):
        if isinstance(self.pce, dict):
            self.pce = PceConfig(**self.pce)
        if isinstance(self.kriging, dict):
            kw = dict(self.kriging)
            if "bound_factors" in kw:
                kw["bound_factors"] = tuple(kw["bound_factors"])
            if "nugget_ladder" in kw:
                kw["nugget_ladder"] = tuple(kw["nugget_ladder"])
            self.kriging = CalibrationConfig(**kw)
        if isinstance(self.opc, dict):
            self.opc = OpcConfig(**self.opc)
        for m in self.methods:
            if m not in METHODS:
                raise ConfigurationError(f"unknown method {m!r}; choose from {METHODS}")
        if self.replications < 1 or self.validation_n < 1:
            raise ConfigurationError("replications and validation_n must be >= 1")
        if any(n < 1 for n in self.design_sizes):
            raise ConfigurationError("design sizes must be >= 1")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pce"] = asdict(self.pce)
        d["kriging"] = asdict(self.kriging)
        d["kriging"]["bound_factors"] = list(self.kriging.bound_factors)
        d["kriging"]["nugget_ladder"] = list(self.kriging.nugget_ladder)
        d["opc"] = asdict(self.opc)
        d["rng"] = "philox"
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "CampaignConfig":
        d = dict(d)
        d.pop("rng", None)
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ConfigurationError(f"unknown campaign config keys: {sorted(unknown)}")
        return cls(**d)


def config_hash(d: dict) -> str:
    canon = json.dumps(d, sort_keys=True)
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:16]


@functools.lru_cache(maxsize=8)
def _validation_cache(function: str, seed: int, n: int, params_path):
    fn = get_function(function, ohagan_params_path=params_path)
    sample = mc_sample(fn.input, n, seed)
    return sample.points, fn(sample.points)


def fit_method(method: str, design, input_model, cfg: CampaignConfig):
    """Fit one method on a design; returns (model, selected basis size)."""
    if method == "pce":
        model, _ = fit_lar_adaptive(design, input_model, cfg.pce)
        return model, len(model.basis)
    if method == "ok":
        model = calibrate(
            TrendBasis.constant(), design, kind=cfg.kernel, nu=cfg.kernel_nu,
            config=cfg.kriging,
        )
        return model, 1
    if method == "spc":
        model = fit_spc(
            design, input_model, kind=cfg.kernel, nu=cfg.kernel_nu,
            pce_config=cfg.pce, krig_config=cfg.kriging,
        )
        return model, model.selected_size
    if method == "opc":
        model = fit_opc(
            design, input_model, kind=cfg.kernel, nu=cfg.kernel_nu,
            pce_config=cfg.pce, krig_config=cfg.kriging, opc_config=cfg.opc,
        )
        return model, model.selected_size
    raise ConfigurationError(f"unknown method {method!r}")


def predict_mean(model, points):
    """Surrogate prediction mean for any fitted model kind."""
    from .pce import PceModel
    from .pck import PckModel

    if isinstance(model, PceModel):
        return predict_pce(model, points)
    if isinstance(model, PckModel):
        return predict_pck(model, points)[0]
    return predict(model, points)[0]


def run_design_cell(cfg_dict: dict, function: str, n: int, replication: int, methods):
    """All requested methods on one (function, N, replication) design.

    Returns (results, failures); failures are (method, message) pairs. A
    function that cannot even be set up (e.g. missing O'Hagan parameter
    file) fails every requested method instead of aborting the campaign.
    """
    cfg = CampaignConfig.from_dict(cfg_dict)
    try:
        fn = get_function(function, ohagan_params_path=cfg.ohagan_params)
        seed = design_seed(cfg.base_seed, function, n, replication)
        design = lhs_sample(fn.input, n, seed)
        design = design.with_responses(fn(design.points))
        x_val, y_val = _validation_cache(
            function, validation_seed(cfg.base_seed, function), cfg.validation_n,
            cfg.ohagan_params,
        )
    except PckrigingError as exc:
        message = f"{type(exc).__name__}: {exc}"
        return [], [(m, message) for m in methods]
    results, failures = [], []
    for method in methods:
        t0 = time.perf_counter()
        try:
            model, p_star = fit_method(method, design, fn.input, cfg)
            eps = relative_generalization_error(predict_mean(model, x_val), y_val)
        except PckrigingError as exc:
            failures.append((method, f"{type(exc).__name__}: {exc}"))
            continue
        wall_ms = (time.perf_counter() - t0) * 1e3
        results.append(
            BenchResult(
                function=function,
                method=method,
                n_design=n,
                replication=replication,
                seed=seed,
                eps_gen=eps,
                wall_ms=wall_ms,
                p_star=p_star,
            )
        )
    return results, failures


def default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ConfigurationError(f"{WORKERS_ENV} must be an integer, got {env!r}") from exc
    return 1


def run_campaign(cfg: CampaignConfig, workers: int | None = None, log=print) -> Path:
    """Execute (or resume) a campaign; returns the results CSV path.

    Completed (function, method, N, replication) cells found in the
    existing results file are skipped. Per-method failures are written to
    a side log and the campaign continues.
    """
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    results_path = out_dir / "results.csv"
    failures_path = out_dir / "failures.log"

    cfg_dict = cfg.to_dict()
    with open(out_dir / "config.json", "w", encoding="utf-8") as fh:
        json.dump({**cfg_dict, "config_hash": config_hash(cfg_dict)}, fh, indent=2)
        fh.write("\n")

    done = set()
    if results_path.exists():
        for r in metrics.read_results_csv(results_path):
            done.add(r.key())

    tasks = []
    for function in cfg.functions:
        for n in cfg.design_sizes:
            for rep in range(cfg.replications):
                todo = [
                    m for m in cfg.methods if (function, m, n, rep) not in done
                ]
                if todo:
                    tasks.append((function, n, rep, todo))
    if not tasks:
        log("campaign already complete; nothing to do")
        return results_path

    workers = workers or default_workers()
    n_rows = 0
    if workers <= 1:
        outcomes = (
            run_design_cell(cfg_dict, fn, n, rep, todo) for fn, n, rep, todo in tasks
        )
        n_rows = _consume(outcomes, tasks, results_path, failures_path, log)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(run_design_cell, cfg_dict, fn, n, rep, todo)
                for fn, n, rep, todo in tasks
            ]
            outcomes = (f.result() for f in futures)
            n_rows = _consume(outcomes, tasks, results_path, failures_path, log)
    log(f"campaign wrote {n_rows} result rows to {results_path}")
    return results_path


def _consume(outcomes, tasks, results_path, failures_path, log) -> int:
    n_rows = 0
    for (function, n, rep, _), (results, failures) in zip(tasks, outcomes):
        if results:
            metrics.append_results_csv(results_path, results)
            n_rows += len(results)
        for method, message in failures:
            log(f"FAIL {function}/{method}/N={n}/rep={rep}: {message}")
            with open(failures_path, "a", encoding="utf-8") as fh:
                fh.write(f"{function},{method},{n},{rep}: {message}\n")
    return n_rows
