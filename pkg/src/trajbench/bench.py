"""Benchmark orchestration: run the dataset x format x index x operation
matrix, aggregate timing statistics, and derive the format-speedup and
overlap-correlation analyses.

Timings never participate in correctness decisions; result sizes and work
counters are deterministic for a fixed seed, elapsed times are not.
"""

from __future__ import annotations

import csv
import json
import math
import statistics
from dataclasses import dataclass, field
from pathlib import Path

from .backends import Backend, BackendConfig, QueryStats
from .data import Dataset
from .engine import QueryKind, execute, w_delete, w_insert, w_update
from .errors import EmptyGroup, InsufficientPoints
from .workload import MixedPlan, WorkloadBundle, WritePlan

CSV_HEADER = ("dataset,format,index,op_kind,config_id,run_id,elapsed_us,"
              "nodes_visited,ranges_scanned,candidates,exact_tests,"
              "rows_touched,result_size")

READ_OP_KINDS = ("intersection", "contains", "knn", "proximity")


@dataclass
class BenchRecord:
    dataset: str
    format: str
    index: str
    op_kind: str
    config_id: int
    run_id: int
    elapsed_us: float
    stats: QueryStats
    result_size: int

    def as_row(self) -> list[str]:
        s = self.stats
        return [self.dataset, self.format, self.index, self.op_kind,
                str(self.config_id), str(self.run_id), f"{self.elapsed_us:.3f}",
                str(s.nodes_visited), str(s.ranges_scanned),
                str(s.candidates_returned), str(s.exact_tests),
                str(s.rows_touched), str(self.result_size)]


@dataclass
class CellError:
    dataset: str
    cell: str
    op_kind: str
    error: str


@dataclass
class RunResult:
    records: list[BenchRecord]
    errors: list[CellError] = field(default_factory=list)


@dataclass(frozen=True)
class SummaryStat:
    mean: float
    median: float
    p95: float
    ci95_low: float
    ci95_high: float
    count: int


def run_suite(ds: Dataset, cfgs: list[BackendConfig], bundle: WorkloadBundle,
              repetitions: int = 3, warmup: int = 1) -> RunResult:
    """Execute every workload config against every backend config.

    Read cells load once and repeat timed passes over an immutable store.
    Write and mixed cells reload a fresh backend per repetition so
    mutations never compound across runs.
    """
    records: list[BenchRecord] = []
    errors: list[CellError] = []
    for cfg in cfgs:
        fmt = cfg.format.value
        idx = cfg.index.value
        try:
            if bundle.reads:
                _run_read_cell(ds, cfg, bundle, repetitions, warmup, records)
            if bundle.writes:
                _run_write_cell(ds, cfg, bundle.writes, repetitions, warmup, records)
            for ratio in sorted(bundle.mixed):
                _run_mixed_cell(ds, cfg, bundle.mixed[ratio], repetitions,
                                warmup, records)
        except Exception as exc:  # aborted cell: record and continue
            errors.append(CellError(ds.name, cfg.label(), "cell", repr(exc)))
    return RunResult(records, errors)


def _run_read_cell(ds, cfg, bundle, repetitions, warmup, records):
    h = Backend.bulk_load(ds, cfg)
    for _ in range(warmup):
        for specs in bundle.reads.values():
            for qs in specs:
                execute(h, qs)
    for rep in range(repetitions):
        for kind, specs in bundle.reads.items():
            for ci, qs in enumerate(specs):
                res = execute(h, qs)
                records.append(BenchRecord(ds.name, cfg.format.value,
                                           cfg.index.value, kind.value, ci, rep,
                                           res.elapsed_us, res.stats, len(res.ids)))


def _apply_write(h: Backend, kind: str, config) -> tuple:
    if kind.startswith("insert"):
        return w_insert(h, config)
    if kind.startswith("update"):
        return w_update(h, config)
    return w_delete(h, config)


def _run_write_cell(ds, cfg, plan: WritePlan, repetitions, warmup, records):
    groups = plan.groups()
    for _ in range(warmup):
        h = Backend.bulk_load(ds, cfg)
        for kind, configs in groups.items():
            for config in configs:
                _apply_write(h, kind, config)
    for rep in range(repetitions):
        h = Backend.bulk_load(ds, cfg)
        for kind, configs in groups.items():
            for ci, config in enumerate(configs):
                res = _apply_write(h, kind, config)
                records.append(BenchRecord(ds.name, cfg.format.value,
                                           cfg.index.value, kind, ci, rep,
                                           res.elapsed_us, res.stats,
                                           res.trajectories_affected))


def _run_mixed_cell(ds, cfg, plan: MixedPlan, repetitions, warmup, records):
    op_kind = f"mixed_r{plan.read_ratio:g}"

    def one_pass(h, rep, timed):
        for pos, (cat, kind, idx) in enumerate(plan.sequence):
            if cat == "read":
                res = execute(h, plan.read_configs[QueryKind(kind)][idx])
                elapsed, stats, size = res.elapsed_us, res.stats, len(res.ids)
            else:
                if kind == "insert":
                    wr = w_insert(h, [plan.inserts[idx]])
                elif kind == "update":
                    wr = w_update(h, [plan.updates[idx]])
                else:
                    wr = w_delete(h, [plan.deletes[idx]])
                elapsed, stats, size = wr.elapsed_us, wr.stats, wr.trajectories_affected
            if timed:
                records.append(BenchRecord(ds.name, cfg.format.value,
                                           cfg.index.value, op_kind, pos, rep,
                                           elapsed, stats, size))

    for _ in range(warmup):
        one_pass(Backend.bulk_load(ds, cfg), -1, timed=False)
    for rep in range(repetitions):
        one_pass(Backend.bulk_load(ds, cfg), rep, timed=True)


# ---------------------------------------------------------------------------
# aggregation
# ---------------------------------------------------------------------------

def nearest_rank_p95(values: list[float]) -> float:
    s = sorted(values)
    rank = math.ceil(0.95 * len(s))
    return s[max(rank - 1, 0)]


def summary_of(values: list[float]) -> SummaryStat:
    if not values:
        raise EmptyGroup("cannot summarize an empty group")
    n = len(values)
    mean = sum(values) / n
    med = statistics.median(values)
    p95 = nearest_rank_p95(values)
    sd = statistics.stdev(values) if n > 1 else 0.0
    half = 1.96 * sd / math.sqrt(n)
    return SummaryStat(mean, med, p95, mean - half, mean + half, n)


def summarize(records: list[BenchRecord],
              keys: tuple[str, ...]) -> dict[tuple, SummaryStat]:
    """Elapsed-time summary per group of records, grouped by the given
    record fields."""
    if not records:
        raise EmptyGroup("no records to summarize")
    groups: dict[tuple, list[float]] = {}
    for r in records:
        key = tuple(getattr(r, k) for k in keys)
        groups.setdefault(key, []).append(r.elapsed_us)
    return {k: summary_of(v) for k, v in sorted(groups.items())}


def pearson(xs: list[float], ys: list[float]) -> tuple[float, float]:
    """Pearson r and the t statistic r*sqrt((n-2)/(1-r^2))."""
    n = len(xs)
    if n < 3:
        raise InsufficientPoints(f"correlation needs >= 3 points, got {n}")
    mx = sum(xs) / n
    my = sum(ys) / n
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    sxx = sum((x - mx) ** 2 for x in xs)
    syy = sum((y - my) ** 2 for y in ys)
    if sxx == 0.0 or syy == 0.0:
        raise InsufficientPoints("zero variance in correlation input")
    r = sxy / math.sqrt(sxx * syy)
    if abs(r) >= 1.0:
        t = math.inf if r > 0 else -math.inf
    else:
        t = r * math.sqrt((n - 2) / (1.0 - r * r))
    return r, t


@dataclass
class FormatComparison:
    index: str
    speedups: dict[str, float]       # dataset -> mean(segmented)/mean(whole)
    goc: dict[str, float]
    pearson_r: float
    t_stat: float


def compare_formats(records: list[BenchRecord], goc_by_dataset: dict[str, float],
                    index: str = "rtree") -> FormatComparison:
    """Per-dataset speedup of the whole format over the segmented one
    (ratio of mean read latencies, averaged across query kinds), plus the
    Pearson correlation between dataset GOC and speedup."""
    by_cell: dict[tuple, list[float]] = {}
    for r in records:
        if r.index == index and r.op_kind in READ_OP_KINDS:
            by_cell.setdefault((r.dataset, r.format, r.op_kind), []).append(r.elapsed_us)
    datasets = sorted({ds for ds, _, _ in by_cell})
    speedups: dict[str, float] = {}
    for ds in datasets:
        ratios = []
        for kind in READ_OP_KINDS:
            seg = by_cell.get((ds, "segmented", kind))
            whole = by_cell.get((ds, "whole", kind))
            if seg and whole:
                ratios.append((sum(seg) / len(seg)) / (sum(whole) / len(whole)))
        if ratios:
            speedups[ds] = sum(ratios) / len(ratios)
    common = [ds for ds in speedups if ds in goc_by_dataset]
    if len(common) < 3:
        raise InsufficientPoints(
            f"format comparison needs >= 3 datasets with GOC values, got {len(common)}")
    r, t = pearson([goc_by_dataset[ds] for ds in common],
                   [speedups[ds] for ds in common])
    return FormatComparison(index, speedups,
                            {ds: goc_by_dataset[ds] for ds in common}, r, t)


# ---------------------------------------------------------------------------
# report emission
# ---------------------------------------------------------------------------

def write_records_csv(records: list[BenchRecord], path: str | Path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as f:
        f.write(CSV_HEADER + "\n")
        for r in records:
            f.write(",".join(r.as_row()) + "\n")


def read_records_csv(path: str | Path) -> list[BenchRecord]:
    out: list[BenchRecord] = []
    with Path(path).open("r", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader)
        if ",".join(header) != CSV_HEADER:
            raise ValueError(f"unexpected results header in {path}")
        for row in reader:
            stats = QueryStats(nodes_visited=int(row[7]), ranges_scanned=int(row[8]),
                               candidates_returned=int(row[9]), exact_tests=int(row[10]),
                               rows_touched=int(row[11]))
            out.append(BenchRecord(row[0], row[1], row[2], row[3], int(row[4]),
                                   int(row[5]), float(row[6]), stats, int(row[12])))
    return out


def write_metadata(path: str | Path, meta: dict) -> None:
    Path(path).write_text(json.dumps(meta, sort_keys=True, indent=1) + "\n",
                          encoding="utf-8")


def emit_report(records: list[BenchRecord], csv_path: str | Path,
                summary_path: str | Path, metadata: dict,
                comparison: FormatComparison | None = None) -> tuple[Path, Path]:
    """Write the records CSV and a human-readable summary; returns both
    paths."""
    if not records:
        raise EmptyGroup("no records to report")
    csv_path = Path(csv_path)
    summary_path = Path(summary_path)
    write_records_csv(records, csv_path)

    lines: list[str] = ["# Benchmark summary", ""]
    if metadata:
        lines.append("## Run metadata")
        lines.append("")
        lines.append("```json")
        lines.append(json.dumps(metadata, sort_keys=True, indent=1))
        lines.append("```")
        lines.append("")

    cells = summarize(records, ("dataset", "format", "index", "op_kind"))
    lines.append("## Per-cell latency (microseconds)")
    lines.append("")
    lines.append("| dataset | format | index | op | mean | median | p95 | ci95 | n |")
    lines.append("|---|---|---|---|---|---|---|---|---|")
    for (ds, fmt, idx, op), s in cells.items():
        lines.append(f"| {ds} | {fmt} | {idx} | {op} | {s.mean:.1f} | {s.median:.1f} "
                     f"| {s.p95:.1f} | [{s.ci95_low:.1f}, {s.ci95_high:.1f}] | {s.count} |")
    lines.append("")

    if comparison is not None:
        lines.append(f"## Format speedup ({comparison.index} index)")
        lines.append("")
        lines.append("Speedup = mean segmented latency / mean whole latency,")
        lines.append("averaged across read query kinds (values above 1 favor the")
        lines.append("whole-trajectory format).")
        lines.append("")
        lines.append("| dataset | GOC | speedup |")
        lines.append("|---|---|---|")
        for ds in sorted(comparison.speedups):
            goc = comparison.goc.get(ds)
            goc_s = f"{goc:.4f}" if goc is not None else "-"
            lines.append(f"| {ds} | {goc_s} | {comparison.speedups[ds]:.3f} |")
        lines.append("")
        lines.append(f"Pearson r(GOC, speedup) = {comparison.pearson_r:.4f}, "
                     f"t = {comparison.t_stat:.4f} "
                     f"(n = {len(comparison.goc)})")
        lines.append("")

    summary_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return csv_path, summary_path
