"""Replication statistics and result-file I/O for benchmark campaigns."""

import json
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DataError

RESULTS_HEADER = "function,method,n_design,replication,seed,eps_gen,wall_ms,p_star"


@dataclass
class BenchResult:
    """One replication's outcome for a (function, method, N) cell."""

    function: str
    method: str
    n_design: int
    replication: int
    seed: int
    eps_gen: float
    wall_ms: float
    p_star: int
    meta: dict = field(default_factory=dict)

    def key(self) -> tuple:
        return (self.function, self.method, self.n_design, self.replication)


@dataclass
class BoxplotSummary:
    """Five-number summary with 1.5-IQR fences.

    Quartiles use linear interpolation (the type-7 convention); whiskers
    sit on the furthest data inside the fences and everything beyond is
    an outlier.
    """

    median: float
    q25: float
    q75: float
    whisker_low: float
    whisker_high: float
    outliers: list[float]

    def to_dict(self) -> dict:
        return {
            "median": self.median,
            "q25": self.q25,
            "q75": self.q75,
            "whisker_low": self.whisker_low,
            "whisker_high": self.whisker_high,
            "outliers": list(self.outliers),
        }


def summarize(values) -> BoxplotSummary:
    """Boxplot summary of one cell's replication values."""
    vals = np.asarray(values, dtype=float).ravel()
    if vals.size < 1:
        raise DataError("summarize needs at least one value")
    q25, med, q75 = np.quantile(vals, [0.25, 0.5, 0.75])
    iqr = q75 - q25
    lo_fence, hi_fence = q25 - 1.5 * iqr, q75 + 1.5 * iqr
    inside = vals[(vals >= lo_fence) & (vals <= hi_fence)]
    outliers = vals[(vals < lo_fence) | (vals > hi_fence)]
    return BoxplotSummary(
        median=float(med),
        q25=float(q25),
        q75=float(q75),
        whisker_low=float(inside.min()),
        whisker_high=float(inside.max()),
        outliers=sorted(float(v) for v in outliers),
    )


def format_result_row(r: BenchResult) -> str:
    return ",".join(
        [
            r.function,
            r.method,
            str(r.n_design),
            str(r.replication),
            str(r.seed),
            f"{r.eps_gen:.17g}",
            f"{r.wall_ms:.17g}",
            str(r.p_star),
        ]
    )


def parse_result_row(line: str) -> BenchResult:
    parts = line.strip().split(",")
    if len(parts) != 8:
        raise DataError(f"bad results row: {line!r}")
    return BenchResult(
        function=parts[0],
        method=parts[1],
        n_design=int(parts[2]),
        replication=int(parts[3]),
        seed=int(parts[4]),
        eps_gen=float(parts[5]),
        wall_ms=float(parts[6]),
        p_star=int(parts[7]),
    )


def read_results_csv(path) -> list[BenchResult]:
    results = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != RESULTS_HEADER:
            raise DataError(f"{path}: expected header {RESULTS_HEADER!r}, got {header!r}")
        for line in fh:
            if line.strip():
                results.append(parse_result_row(line))
    return results


def append_results_csv(path, results) -> None:
    """Append rows, writing the header when the file does not exist yet."""
    new_file = not path.exists() if hasattr(path, "exists") else False
    try:
        with open(path, "r", encoding="utf-8"):
            pass
    except OSError:
        new_file = True
    with open(path, "a", encoding="utf-8") as fh:
        if new_file:
            fh.write(RESULTS_HEADER + "\n")
        for r in results:
            fh.write(format_result_row(r) + "\n")


def summarize_results(results) -> dict:
    """Group by (function, method, n_design) and summarize eps_gen."""
    cells: dict[tuple, list[float]] = {}
    for r in results:
        cells.setdefault((r.function, r.method, r.n_design), []).append(r.eps_gen)
    out = {}
    for (fn, method, n), vals in sorted(cells.items()):
        out[f"{fn}/{method}/{n}"] = {
            "count": len(vals),
            **summarize(vals).to_dict(),
        }
    return out


def write_summary_json(path, summary: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_plot_tsv(path, results) -> None:
    """Plot-ready table: one row per cell with the boxplot fields."""
    cells: dict[tuple, list[float]] = {}
    for r in results:
        cells.setdefault((r.function, r.method, r.n_design), []).append(r.eps_gen)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(
            "function\tmethod\tn_design\tcount\tmedian\tq25\tq75\twhisker_low\twhisker_high\n"
        )
        for (fn, method, n), vals in sorted(cells.items()):
            s = summarize(vals)
            fh.write(
                f"{fn}\t{method}\t{n}\t{len(vals)}\t{s.median:.17g}\t{s.q25:.17g}"
                f"\t{s.q75:.17g}\t{s.whisker_low:.17g}\t{s.whisker_high:.17g}\n"
            )
