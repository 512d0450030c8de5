"""Command-line front end: fit, predict, bench, summarize.

Exit codes: 0 success, 2 configuration/parse problems, 3 data problems
(shapes, schemas, missing responses), 4 numerical failures.
"""

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import campaign, metrics, modelio
from .bench import get_function
from .campaign import CampaignConfig, config_hash, fit_method
from .doe import InputModel, lhs_sample, load_design_csv, validate_design
from .exceptions import (
    ConfigurationError,
    DataError,
    NumericalError,
    PckrigingError,
)
from .kriging import KrigingModel, loo_kriging, predict as kriging_predict
from .pce import PceModel, predict_pce
from .pck import PckModel, predict_pck

EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4

PREDICT_CHUNK = 4096


def _load_json(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"cannot parse config {path}: {exc}") from exc


def _fit_inputs(cfg: dict, design_override):
    """Resolve (input model, design with responses, seed) from a fit config."""
    function = None
    if "function" in cfg:
        function = get_function(cfg["function"], cfg.get("ohagan_params"))
    if "input" in cfg:
        input_model = InputModel.from_dict(cfg["input"])
    elif function is not None:
        input_model = function.input
    else:
        raise ConfigurationError("fit config needs 'input' marginals or a 'function'")

    design_spec = cfg.get("design", {})
    seed = None
    if design_override is not None:
        design = load_design_csv(design_override)
    elif "csv" in design_spec:
        design = load_design_csv(design_spec["csv"])
    elif "generate" in design_spec:
        gen = design_spec["generate"]
        try:
            n = int(gen["n"])
            seed = int(gen["seed"])
        except KeyError as exc:
            raise ConfigurationError(f"design.generate needs {exc} set") from exc
        gen_fn = get_function(gen["function"], cfg.get("ohagan_params")) if "function" in gen else function
        if gen_fn is None:
            raise ConfigurationError("design.generate needs a function to evaluate")
        input_model = gen_fn.input
        design = lhs_sample(input_model, n, seed)
        design = design.with_responses(gen_fn(design.points))
        return input_model, design, seed
    else:
        raise ConfigurationError("fit config needs design.csv or design.generate")

    validate_design(input_model, design)
    if design.responses is None:
        if function is None:
            raise DataError("design file has no responses and no function is configured")
        design = design.with_responses(function(design.points))
    return input_model, design, seed


def _campaign_from_fit_config(cfg: dict) -> CampaignConfig:
    keys = {"pce", "kriging", "opc", "kernel", "kernel_nu", "ohagan_params"}
    return CampaignConfig(**{k: cfg[k] for k in keys if k in cfg})


def cmd_fit(args) -> int:
    cfg = _load_json(args.config)
    method = cfg.get("method")
    if method not in campaign.METHODS:
        raise ConfigurationError(
            f"fit config needs method, one of {campaign.METHODS}; got {method!r}"
        )
    input_model, design, seed = _fit_inputs(cfg, args.design)
    mcfg = _campaign_from_fit_config(cfg)

    t0 = time.perf_counter()
    model, p_star = fit_method(method, design, input_model, mcfg)
    wall = time.perf_counter() - t0

    meta = {
        "method": method,
        "seed": seed,
        "config_hash": config_hash(cfg),
        "n_design": design.n,
    }
    modelio.save_model(model, args.out, meta=meta)

    lines = [
        f"method: {method}",
        f"design: N={design.n}, M={design.dim}",
        f"selected basis size: {p_star}",
        f"fit wall time: {wall:.3f} s",
    ]
    if isinstance(model, PceModel):
        lines.append(f"loo error: {model.loo_error:.6e}")
        lines.append(f"relative empirical error: {model.emp_error:.6e}")
        lines.append("selected indices: " + str(model.basis.index_set.to_list()))
    if isinstance(model, KrigingModel):
        lines.append(f"kernel: {model.kernel.kind} lengthscales={model.kernel.lengthscales}")
        lines.append(f"sigma2: {model.sigma2:.6e}  nugget: {model.nugget:g}")
        lines.append(f"kriging loo: {loo_kriging(model):.6e}")
    if isinstance(model, PckModel):
        km = model.model
        lines.append(f"kernel: {km.kernel.kind} lengthscales={km.kernel.lengthscales}")
        lines.append(f"sigma2: {km.sigma2:.6e}  nugget: {km.nugget:g}")
        lines.append(f"kriging loo: {model.loo:.6e}")
        if model.loo_curve is not None:
            lines.append("loo curve: " + " ".join(f"{v:.3e}" for v in model.loo_curve))
    report = "\n".join(lines) + "\n"
    if args.report:
        Path(args.report).write_text(report, encoding="utf-8")
    sys.stdout.write(report)
    return 0


def _predict_rows(model, pts: np.ndarray):
    if isinstance(model, PceModel):
        mean = predict_pce(model, pts)
        var = np.zeros_like(mean)
    elif isinstance(model, KrigingModel):
        mean, var = kriging_predict(model, pts)
    else:
        mean, var = predict_pck(model, pts)
    return mean, var


def cmd_predict(args) -> int:
    model = modelio.load_model(args.model)
    if isinstance(model, PceModel):
        dim = model.basis.index_set.dim
    elif isinstance(model, KrigingModel):
        dim = model.design.dim
    else:
        dim = model.model.design.dim

    with open(args.points, "r", encoding="utf-8") as fin, open(
        args.out, "w", encoding="utf-8"
    ) as fout:
        header = fin.readline().strip()
        fout.write("mean,variance\n")
        if not header:
            return 0
        names = [c.strip() for c in header.split(",")]
        expected = [f"x{j + 1}" for j in range(dim)]
        if names != expected:
            raise DataError(
                f"{args.points}: expected header {','.join(expected)}, got {header!r}"
            )
        chunk: list[list[float]] = []

        def flush():
            if not chunk:
                return
            pts = np.asarray(chunk)
            mean, var = _predict_rows(model, pts)
            for mu, v in zip(mean, var):
                fout.write(f"{mu:.17g},{v:.17g}\n")
            chunk.clear()

        for lineno, line in enumerate(fin, start=2):
            line = line.strip()
            if not line:
                continue
            vals = line.split(",")
            if len(vals) != dim:
                raise DataError(f"{args.points}:{lineno}: expected {dim} columns")
            try:
                chunk.append([float(v) for v in vals])
            except ValueError as exc:
                raise DataError(f"{args.points}:{lineno}: {exc}") from exc
            if len(chunk) >= PREDICT_CHUNK:
                flush()
        flush()
    return 0


def cmd_bench(args) -> int:
    raw = _load_json(args.config)
    if args.output_dir:
        raw["output_dir"] = args.output_dir
    try:
        cfg = CampaignConfig.from_dict(raw)
    except TypeError as exc:
        raise ConfigurationError(f"bad campaign config: {exc}") from exc
    results_path = campaign.run_campaign(cfg, workers=args.workers)
    results = metrics.read_results_csv(results_path)
    out_dir = Path(cfg.output_dir)
    metrics.write_summary_json(out_dir / "summary.json", metrics.summarize_results(results))
    metrics.write_plot_tsv(out_dir / "plot_data.tsv", results)
    return 0


def cmd_summarize(args) -> int:
    results = metrics.read_results_csv(args.results)
    out_dir = Path(args.output_dir or Path(args.results).parent)
    out_dir.mkdir(parents=True, exist_ok=True)
    metrics.write_summary_json(out_dir / "summary.json", metrics.summarize_results(results))
    metrics.write_plot_tsv(out_dir / "plot_data.tsv", results)
    print(f"wrote {out_dir / 'summary.json'} and {out_dir / 'plot_data.tsv'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pckriging",
        description="Surrogate modeling with sparse PCE, Kriging, and PC-Kriging",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit a single model from a config")
    p_fit.add_argument("--config", required=True, help="fit config JSON")
    p_fit.add_argument("--design", help="design CSV overriding the config")
    p_fit.add_argument("--out", required=True, help="output model JSON")
    p_fit.add_argument("--report", help="also write the text report here")
    p_fit.set_defaults(func=cmd_fit)

    p_pred = sub.add_parser("predict", help="predict mean/variance at points")
    p_pred.add_argument("--model", required=True)
    p_pred.add_argument("--points", required=True, help="CSV with header x1,...,xM")
    p_pred.add_argument("--out", required=True, help="output CSV (mean, variance)")
    p_pred.set_defaults(func=cmd_predict)

    p_bench = sub.add_parser("bench", help="run or resume a benchmark campaign")
    p_bench.add_argument("--config", required=True, help="campaign config JSON")
    p_bench.add_argument("--output-dir", help="override the config output_dir")
    p_bench.add_argument(
        "--workers",
        type=int,
        help=f"worker processes (default: ${campaign.WORKERS_ENV} or 1)",
    )
    p_bench.set_defaults(func=cmd_bench)

    p_sum = sub.add_parser("summarize", help="summarize an existing results CSV")
    p_sum.add_argument("--results", required=True)
    p_sum.add_argument("--output-dir")
    p_sum.set_defaults(func=cmd_summarize)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except PckrigingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
