"""Acceptance criteria.

Each test prints one PASS/FAIL line.  Run with ``pytest tests/test_acceptance.py -v -s``.
Ground truth everywhere is index-free brute force over the exact geometry;
timings appear only where a criterion explicitly bounds them.
"""

import json
import time
from pathlib import Path

import numpy as np
import pytest

from trajbench import cli
from trajbench.ann import approx_ann, exact_ann
from trajbench.backends import (Backend, BackendConfig, IndexKind, QueryStats,
                                StorageFormat)
from trajbench.bench import read_records_csv
from trajbench.data import Dataset, read_csv
from trajbench.datagen import GenKind, GenSpec, generate, random_walk
from trajbench.engine import (ContainsMode, QueryKind, QuerySpec, execute,
                              w_delete, w_insert, w_update)
from trajbench.geometry import (Point, Rect, RectRelation, Trajectory,
                                rect_relation, trajectory_distance,
                                trajectory_intersects)
from trajbench.goc import ApproxParams, approx_goc, exact_goc
from trajbench.workload import (WorkloadSpec, make_read_configs,
                                make_write_configs, reads_to_json)
from helpers import probe_rects

INDEXED = (IndexKind.RTREE, IndexKind.QUADTREE, IndexKind.BLOCKRANGE)
BOTH_FORMATS = (StorageFormat.SEGMENTED, StorageFormat.WHOLE)


def _report(num: int, name: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    line = f"ACCEPTANCE {num} {name}: {status}"
    if detail:
        line += f" ({detail})"
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def metric_datasets() -> dict[str, Dataset]:
    """Five 1000-trajectory datasets: one per generator kind plus a mixed
    quarter blend."""
    out = {}
    kinds = list(GenKind)
    for i, kind in enumerate(kinds):
        out[kind.value] = generate(GenSpec(kind=kind, m=1000, k=10, seed=101 + i))
    parts = []
    for i, kind in enumerate(kinds):
        src = generate(GenSpec(kind=kind, m=250, k=10, seed=111 + i))
        parts.extend(Trajectory(f"{kind.value}-{t.id}",
                                np.column_stack((t.xs, t.ys))) for t in src)
    out["mixed"] = Dataset(parts, name="mixed")
    return out


def _best_of(fn, repeats=3):
    best = float("inf")
    value = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        value = fn()
        best = min(best, time.perf_counter() - t0)
    return best, value


def test_criterion_1_goc_approximation(metric_datasets):
    t_start = time.perf_counter()
    ok = True
    details = []
    for name, ds in metric_datasets.items():
        ds.mbr_arrays()  # shared MBR cache, outside both timings
        t_exact, exact = _best_of(lambda: exact_goc(ds))
        params = ApproxParams(n=100, p=100, seed=0)
        t_approx, est = _best_of(lambda: approx_goc(ds, params).value)
        tol = max(0.005, 0.03 * exact)
        within = abs(est - exact) <= tol
        faster = t_approx < t_exact
        ok &= within and faster
        details.append(f"{name}: |{est:.5f}-{exact:.5f}|<={tol:.4f} "
                       f"{'ok' if within else 'VIOLATED'}, "
                       f"approx {t_approx*1e3:.1f}ms vs exact {t_exact*1e3:.1f}ms "
                       f"{'ok' if faster else 'SLOWER'}")
    total = time.perf_counter() - t_start
    ok &= total < 60.0
    _report(1, "GOC approximation accuracy and speed", ok,
            f"total {total:.1f}s; " + "; ".join(details))


def test_criterion_2_ann_approximation(metric_datasets):
    t_start = time.perf_counter()
    ok = True
    details = []
    for name, ds in metric_datasets.items():
        exact = exact_ann(ds).ann
        est = approx_ann(ds, ApproxParams(n=1000, p=50, seed=0)).result.ann
        tol = max(0.01, 0.03 * exact)
        within = abs(est - exact) <= tol
        ok &= within
        details.append(f"{name}: |{est:.4f}-{exact:.4f}|<={tol:.4f} "
                       f"{'ok' if within else 'VIOLATED'}")
    total = time.perf_counter() - t_start
    ok &= total < 60.0
    _report(2, "ANN approximation accuracy", ok,
            f"total {total:.1f}s; " + "; ".join(details))


def _brute_force_reference(ds: Dataset, spec: QuerySpec):
    if spec.kind is QueryKind.INTERSECTION:
        return sorted(t.id for t in ds if t.id != spec.target.id
                      and trajectory_intersects(t, spec.target)), None
    if spec.kind is QueryKind.CONTAINS:
        rels = {t.id: rect_relation(t, spec.rect) for t in ds}
        if spec.contains_mode is ContainsMode.COMPLETE:
            return sorted(i for i, r in rels.items() if r is RectRelation.INSIDE), None
        return sorted(i for i, r in rels.items() if r is not RectRelation.OUTSIDE), None
    if spec.kind is QueryKind.KNN:
        ranked = sorted((trajectory_distance(t, spec.target), t.id)
                        for t in ds if t.id != spec.target.id)[:spec.k]
        return [tid for _, tid in ranked], [d for d, _ in ranked]
    return sorted(t.id for t in ds if t.id != spec.target.id
                  and trajectory_distance(t, spec.target) <= spec.dist), None


def test_criterion_3_oracle_equivalence():
    t_start = time.perf_counter()
    mismatches = 0
    queries = 0
    for seed in (201, 202, 203):
        ds = generate(GenSpec(kind=GenKind.SKEWED, m=500, k=10, seed=seed))
        seq_whole = Backend.bulk_load(ds, BackendConfig(
            format=StorageFormat.WHOLE, index=IndexKind.SEQSCAN))
        wspec = WorkloadSpec(configs_per_type=50, k_neighbors=5, seed=seed)
        reads = make_read_configs(ds, seq_whole, wspec)
        specs = (reads[QueryKind.INTERSECTION] + reads[QueryKind.KNN]
                 + reads[QueryKind.PROXIMITY])
        for qs in reads[QueryKind.CONTAINS]:
            specs.append(qs)
            specs.append(QuerySpec(QueryKind.CONTAINS, rect=qs.rect,
                                   contains_mode=ContainsMode.COMPLETE))
        handles = [Backend.bulk_load(ds, BackendConfig(format=f, index=i))
                   for f in BOTH_FORMATS for i in INDEXED]
        handles.append(seq_whole)
        for qs in specs:
            want_ids, want_dists = _brute_force_reference(ds, qs)
            queries += 1
            for h in handles:
                res = execute(h, qs)
                if res.ids != want_ids:
                    mismatches += 1
                elif qs.kind is QueryKind.KNN and res.distances != want_dists:
                    mismatches += 1
    total = time.perf_counter() - t_start
    ok = mismatches == 0 and total < 300.0
    _report(3, "oracle equivalence across index/format matrix", ok,
            f"{queries} configs x 7 backends, {mismatches} mismatches, {total:.1f}s")


def test_criterion_4_mutation_correctness():
    ds = generate(GenSpec(kind=GenKind.SKEWED, m=300, k=10, seed=77))
    rng = np.random.default_rng(42)
    bbox = ds.bbox()
    probes = probe_rects(bbox, 20, seed=5)
    combos = [BackendConfig(format=f, index=i)
              for f in BOTH_FORMATS for i in INDEXED]
    handles = {cfg.label(): Backend.bulk_load(ds, cfg) for cfg in combos}
    live: dict[str, Trajectory] = {t.id: t for t in ds}
    deleted: set[str] = set()
    mismatches = 0
    step = ds.mean_segment_length()
    for i in range(50):
        op = ("insert", "update", "delete")[i % 3]
        if op == "insert":
            start = Point(float(rng.uniform(bbox.min_x, bbox.max_x)),
                          float(rng.uniform(bbox.min_y, bbox.max_y)))
            coords = random_walk(start, 10, step, bbox,
                                 np.random.default_rng(1000 + i))
            t = Trajectory(f"new{i:03d}", coords)
            live[t.id] = t
            for h in handles.values():
                h.insert(t)
        elif op == "update":
            tid = sorted(live)[int(rng.integers(len(live)))]
            moved = live[tid].translated(float(rng.uniform(-step, step)),
                                         float(rng.uniform(-step, step)))
            live[tid] = moved
            for h in handles.values():
                h.update(tid, moved)
        else:
            tid = sorted(set(live) - deleted)[int(rng.integers(len(live)))]
            deleted.add(tid)
            del live[tid]
            for h in handles.values():
                h.delete(tid)
        snapshot = Dataset([live[k] for k in sorted(live)], name="snap")
        for cfg in combos:
            rebuilt = Backend.bulk_load(snapshot, cfg)
            h = handles[cfg.label()]
            for rect in probes:
                got, _ = h.candidates_by_rect(rect)
                want, _ = rebuilt.candidates_by_rect(rect)
                if got != want:
                    mismatches += 1
    _report(4, "mutation correctness vs rebuilt backends", mismatches == 0,
            f"50 interleaved ops x 6 combos x 20 probes, {mismatches} mismatches")


def test_criterion_5_generator_orderings():
    ok = True
    details = []
    for seed in range(1, 6):
        goc = {}
        ann = {}
        for kind in GenKind:
            ds = generate(GenSpec(kind=kind, m=10_000, k=10, seed=seed))
            goc[kind] = exact_goc(ds)
            ann[kind] = exact_ann(ds).ann
        g_ok = (goc[GenKind.RANDOM] < 0.5 * goc[GenKind.SKEWED]
                and goc[GenKind.EVEN] < 0.5 * goc[GenKind.SKEWED]
                and 0.5 * goc[GenKind.SKEWED] < goc[GenKind.SKEWED_OVERLAP])
        a_ok = (ann[GenKind.RANDOM] > ann[GenKind.SKEWED]
                and ann[GenKind.EVEN] > ann[GenKind.SKEWED]
                and ann[GenKind.SKEWED] > ann[GenKind.SKEWED_OVERLAP])
        ok &= g_ok and a_ok
        details.append(f"seed {seed}: goc {'ok' if g_ok else 'VIOLATED'} "
                       f"ann {'ok' if a_ok else 'VIOLATED'}")
    _report(5, "generator overlap/dispersion orderings (m=10000, 5 seeds)",
            ok, "; ".join(details))


def test_criterion_6_write_cost_structure():
    ds = generate(GenSpec(kind=GenKind.SKEWED, m=1000, k=10, seed=55))
    wspec = WorkloadSpec(configs_per_type=2, seed=9)
    plan = make_write_configs(ds, wspec)
    k = 10
    ok = True
    details = []
    for idx in INDEXED:
        touched = {}
        for fmt in BOTH_FORMATS:
            h = Backend.bulk_load(ds, BackendConfig(format=fmt, index=idx))
            upd = w_update(h, plan.update_batch[0])
            dele = w_delete(h, plan.delete_batch[0])
            touched[fmt] = (upd.stats.rows_touched, dele.stats.rows_touched)
        upd_ok = touched[StorageFormat.SEGMENTED][0] >= k * touched[StorageFormat.WHOLE][0]
        del_ok = touched[StorageFormat.SEGMENTED][1] >= k * touched[StorageFormat.WHOLE][1]
        ok &= upd_ok and del_ok
        details.append(f"{idx.value}: upd seg/whole={touched[StorageFormat.SEGMENTED][0]}"
                       f"/{touched[StorageFormat.WHOLE][0]} "
                       f"del={touched[StorageFormat.SEGMENTED][1]}"
                       f"/{touched[StorageFormat.WHOLE][1]}")

    # block-range maintenance stays constant as the table grows
    maint = {}
    for m, label in ((1000, "1e3 rows"), (100_000, "1e5 rows")):
        big = generate(GenSpec(kind=GenKind.RANDOM, m=m, k=2, seed=8))
        h = Backend.bulk_load(big, BackendConfig(format=StorageFormat.WHOLE,
                                                 index=IndexKind.BLOCKRANGE))
        per_insert = []
        for i in range(30):
            t = Trajectory(f"x{i:02d}", np.column_stack((
                np.linspace(0.1, 0.2, 3), np.linspace(0.1, 0.2, 3))))
            stats = QueryStats()
            rows = h.insert(t, stats)
            per_insert.append((rows, stats.ranges_scanned))
        maint[label] = per_insert
    brin_ok = all(rows == 1 and touches <= 2
                  for seq in maint.values() for rows, touches in seq)
    sizes_match = ([r for r, _ in maint["1e3 rows"]] == [r for r, _ in maint["1e5 rows"]])
    ok &= brin_ok and sizes_match
    details.append(f"brin per-insert maintenance <=2 at 1e3 and 1e5 rows: "
                   f"{'ok' if brin_ok and sizes_match else 'VIOLATED'}")
    _report(6, "write-cost structure", ok, "; ".join(details))


def test_criterion_7_whole_format_filter_degradation():
    ds = generate(GenSpec(kind=GenKind.SKEWED_OVERLAP, m=2000, k=10, seed=33))
    oracle = Backend.bulk_load(ds, BackendConfig(format=StorageFormat.WHOLE,
                                                 index=IndexKind.SEQSCAN))
    wspec = WorkloadSpec(configs_per_type=50, k_neighbors=5, seed=21)
    reads = make_read_configs(ds, oracle, wspec)
    cand = {}
    results = {}
    for fmt in BOTH_FORMATS:
        h = Backend.bulk_load(ds, BackendConfig(format=fmt,
                                                index=IndexKind.QUADTREE))
        per_query = []
        ids = []
        for qs in reads[QueryKind.CONTAINS]:
            res = execute(h, qs)
            per_query.append(res.stats.candidates_returned)
            ids.append(tuple(res.ids))
        cand[fmt] = sum(per_query) / len(per_query)
        results[fmt] = ids
    same_results = results[StorageFormat.WHOLE] == results[StorageFormat.SEGMENTED]
    strictly_higher = cand[StorageFormat.WHOLE] > cand[StorageFormat.SEGMENTED]
    _report(7, "whole-format quadtree filter degradation",
            same_results and strictly_higher,
            f"mean candidates whole={cand[StorageFormat.WHOLE]:.1f} > "
            f"segmented={cand[StorageFormat.SEGMENTED]:.1f}: {strictly_higher}; "
            f"results equal: {same_results}")


def test_criterion_8_determinism(tmp_path):
    ok = True
    details = []
    # dataset files
    spec_args = ["datagen", "--kind", "skewed-overlap", "--m", "300", "--k", "8",
                 "--seed", "12"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert cli.main(spec_args + ["--out", str(a)]) == 0
    assert cli.main(spec_args + ["--out", str(b)]) == 0
    files_ok = a.read_bytes() == b.read_bytes()
    ok &= files_ok
    details.append(f"dataset bytes: {'ok' if files_ok else 'VIOLATED'}")

    # metric estimates
    ds = read_csv(a)
    p = ApproxParams(n=100, p=40, seed=3)
    goc_ok = approx_goc(ds, p).round_values == approx_goc(ds, p).round_values
    ann_ok = (approx_ann(ds, ApproxParams(n=500, p=20, seed=3)).round_values
              == approx_ann(ds, ApproxParams(n=500, p=20, seed=3)).round_values)
    ok &= goc_ok and ann_ok
    details.append(f"metric estimates: {'ok' if goc_ok and ann_ok else 'VIOLATED'}")

    # workload specs
    oracle = Backend.bulk_load(ds, BackendConfig())
    wspec = WorkloadSpec(configs_per_type=10, k_neighbors=3, seed=6)
    reads_ok = (reads_to_json(make_read_configs(ds, oracle, wspec), wspec)
                == reads_to_json(make_read_configs(ds, oracle, wspec), wspec))
    ok &= reads_ok
    details.append(f"workload specs: {'ok' if reads_ok else 'VIOLATED'}")

    # bench result_size and counter columns
    def run_bench(out: Path):
        return cli.main(["bench", "--input", str(a), "--workload", "read",
                         "--configs", "5", "--knn-k", "3", "--reps", "1",
                         "--seed", "4", "--index", "rtree", "--out", str(out)])

    r1, r2 = tmp_path / "r1.csv", tmp_path / "r2.csv"
    assert run_bench(r1) == 0
    assert run_bench(r2) == 0

    def stable_columns(path: Path):
        return [(r.dataset, r.format, r.index, r.op_kind, r.config_id, r.run_id,
                 r.stats.nodes_visited, r.stats.ranges_scanned,
                 r.stats.candidates_returned, r.stats.exact_tests,
                 r.stats.rows_touched, r.result_size)
                for r in read_records_csv(path)]

    bench_ok = stable_columns(r1) == stable_columns(r2)
    ok &= bench_ok
    details.append(f"bench counters/result sizes: {'ok' if bench_ok else 'VIOLATED'}")
    _report(8, "seeded pipeline determinism", ok, "; ".join(details))


def test_criterion_9_end_to_end_cli(tmp_path):
    t_start = time.perf_counter()
    kinds = ["random", "even", "skewed", "skewed-overlap"]
    result_csvs = []
    ok = True
    details = []
    for i, kind in enumerate(kinds):
        data = tmp_path / f"{kind}.csv"
        code = cli.main(["datagen", "--kind", kind, "--m", "2500", "--k", "10",
                         "--seed", str(300 + i), "--out", str(data),
                         "--name", kind])
        ok &= code == 0
        for metric in ("goc", "ann"):
            code = cli.main(["characterize", metric, "--input", str(data),
                             "--approx", "--n", "100", "--p", "20",
                             "--seed", "1"])
            ok &= code == 0
        for workload, extra in (("read", []),
                                ("write", ["--configs", "10"]),
                                ("mixed", ["--read-ratio", "0.05", "0.5", "0.95",
                                           "--ops", "60"])):
            out = tmp_path / f"{kind}-{workload}.csv"
            code = cli.main(["bench", "--input", str(data), "--name", kind,
                             "--workload", workload, "--reps", "1",
                             "--seed", "2", "--out", str(out)] + extra)
            ok &= code == 0
            result_csvs.append(out)
    summary = tmp_path / "summary.md"
    code = cli.main(["report", "--in", *map(str, result_csvs),
                     "--out", str(summary)])
    ok &= code == 0

    # schema validity: exact header, parseable rows
    from trajbench.bench import CSV_HEADER
    for path in result_csvs:
        text = path.read_text(encoding="utf-8").splitlines()
        ok &= text[0] == CSV_HEADER
        records = read_records_csv(path)
        ok &= len(records) == len(text) - 1
    details.append(f"{len(result_csvs)} schema-valid result files")

    text = summary.read_text(encoding="utf-8")
    speedup_ok = "Format speedup" in text and all(k in text for k in kinds)
    pearson_ok = "Pearson r" in text
    ok &= speedup_ok and pearson_ok
    details.append(f"summary has per-dataset speedups: {speedup_ok}, "
                   f"correlation: {pearson_ok}")

    total = time.perf_counter() - t_start
    ok &= total < 600.0
    details.append(f"wall {total:.0f}s < 600s")
    _report(9, "end-to-end CLI pipeline", ok, "; ".join(details))
