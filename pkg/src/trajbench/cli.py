"""Command-line entry point.

Subcommands wire the pipeline together: ``datagen`` writes synthetic
trajectory CSVs, ``characterize`` computes the overlap (goc) and
dispersion (ann) metrics, ``bench`` runs the index/format benchmark
matrix, ``report`` aggregates result CSVs into a summary document.

The default seed is 0, overridable per command with --seed or globally
with the TRAJBENCH_SEED environment variable.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from . import kernels
from .ann import approx_ann, exact_ann
from .backends import BackendConfig, Backend, IndexKind, StorageFormat
from .bench import (FormatComparison, compare_formats, emit_report,
                    read_records_csv, run_suite, write_metadata,
                    write_records_csv)
from .data import Dataset, read_csv, write_csv
from .datagen import GenKind, GenSpec, generate
from .errors import InsufficientPoints, InvalidParams, TrajBenchError
from .goc import ApproxParams, approx_goc, exact_goc
from .geometry import Rect
from .workload import (WorkloadBundle, WorkloadSpec, make_mixed_plan,
                       make_read_configs, make_write_configs, reads_to_json)


def _default_seed() -> int:
    env = os.environ.get("TRAJBENCH_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise InvalidParams(f"TRAJBENCH_SEED must be an integer, got {env!r}") from None
    return 0


def _parse_bbox(text: str) -> Rect:
    parts = text.split(",")
    if len(parts) != 4:
        raise InvalidParams("bbox must be 'minx,miny,maxx,maxy'")
    try:
        vals = [float(p) for p in parts]
    except ValueError:
        raise InvalidParams(f"non-numeric bbox component in {text!r}") from None
    return Rect(*vals)


def _parse_gen_spec(text: str, seed: int) -> GenSpec:
    """Inline generator spec: comma-separated key=value pairs, e.g.
    ``kind=even,m=1000,k=10,seed=1``."""
    fields: dict[str, str] = {}
    for part in text.split(","):
        if "=" not in part:
            raise InvalidParams(f"gen-spec entries must be key=value, got {part!r}")
        key, val = part.split("=", 1)
        fields[key.strip()] = val.strip()
    if "kind" not in fields:
        raise InvalidParams("gen-spec needs kind=<random|even|skewed|skewed-overlap>")
    try:
        kind = GenKind(fields.pop("kind"))
    except ValueError:
        raise InvalidParams(f"unknown generator kind {fields.get('kind')!r}") from None
    kwargs: dict = {"kind": kind, "seed": seed}
    int_keys = {"m", "k", "seed", "hotspots"}
    float_keys = {"step", "sigma", "hotspot_fraction", "travel_fraction"}
    for key, val in fields.items():
        if key == "bbox":
            kwargs["bbox"] = _parse_bbox(val)
        elif key in int_keys:
            kwargs[key] = int(val)
        elif key in float_keys:
            kwargs[key] = float(val)
        else:
            raise InvalidParams(f"unknown gen-spec key {key!r}")
    if "m" not in kwargs or "k" not in kwargs:
        raise InvalidParams("gen-spec needs m=<count> and k=<segments>")
    return GenSpec(**kwargs)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_datagen(args) -> int:
    spec = GenSpec(kind=GenKind(args.kind), m=args.m, k=args.k, seed=args.seed,
                   bbox=_parse_bbox(args.bbox), step=args.step,
                   hotspots=args.hotspots, sigma=args.sigma,
                   hotspot_fraction=args.hotspot_fraction,
                   travel_fraction=args.travel_fraction)
    ds = generate(spec)
    if args.name:
        ds.name = args.name
    write_csv(ds, args.out)
    print(f"wrote {len(ds)} trajectories ({ds.total_segments()} segments) to {args.out}")
    return 0


def _load_dataset(args) -> Dataset:
    if getattr(args, "input", None):
        ds = read_csv(args.input)
    elif getattr(args, "gen_spec", None):
        ds = generate(_parse_gen_spec(args.gen_spec, args.seed))
    else:
        raise InvalidParams("need --input or --gen-spec")
    if getattr(args, "name", None):
        ds.name = args.name
    return ds


def _cmd_characterize(args) -> int:
    ds = _load_dataset(args)
    if args.threads:
        kernels.set_num_threads(args.threads)
    if args.exact:
        if args.metric == "goc":
            value = exact_goc(ds)
        else:
            value = exact_ann(ds).ann
    else:
        params = ApproxParams(n=args.n, p=args.p, seed=args.seed)
        if args.metric == "goc":
            value = approx_goc(ds, params).value
        else:
            value = approx_ann(ds, params,
                               literal_scaling=args.literal_scaling).result.ann
    print(f"{value:.4f}")
    return 0


def _characterize_for_meta(ds: Dataset, seed: int) -> tuple[float, float]:
    # exact metrics when affordable, sampled otherwise
    if len(ds) <= 20000:
        goc = exact_goc(ds)
    else:
        goc = approx_goc(ds, ApproxParams(n=100, p=100, seed=seed)).value
    if ds.total_points() <= 200000:
        ann = exact_ann(ds).ann
    else:
        ann = approx_ann(ds, ApproxParams(n=1000, p=50, seed=seed)).result.ann
    return goc, ann


def _cmd_bench(args) -> int:
    seed = args.seed
    if args.threads:
        kernels.set_num_threads(args.threads)
    ds = _load_dataset(args)

    formats = ([StorageFormat.SEGMENTED, StorageFormat.WHOLE]
               if args.format == "both" else [StorageFormat(args.format)])
    indexes = (list(IndexKind) if args.index == "all"
               else [IndexKind(args.index)])
    cfgs = [BackendConfig(format=f, index=i) for f in formats for i in indexes]

    wspec = WorkloadSpec(configs_per_type=args.configs,
                         rect_side_fraction=args.rect_frac,
                         k_neighbors=args.knn_k,
                         proximity_fraction=args.prox_frac,
                         batch_insert_size=args.batch_size,
                         batch_mutation_fraction=args.mutation_frac,
                         max_rejects=args.max_rejects,
                         seed=seed)
    oracle = Backend.bulk_load(ds, BackendConfig(format=StorageFormat.WHOLE,
                                                 index=IndexKind.SEQSCAN))
    bundle = WorkloadBundle(spec=wspec)
    if args.workload == "read":
        bundle.reads = make_read_configs(ds, oracle, wspec)
    elif args.workload == "write":
        bundle.writes = make_write_configs(ds, wspec)
    else:
        for ratio in args.read_ratio:
            bundle.mixed[ratio] = make_mixed_plan(ds, oracle, wspec, ratio, args.ops)

    if args.workload_out and bundle.reads:
        Path(args.workload_out).write_text(reads_to_json(bundle.reads, wspec),
                                           encoding="utf-8")

    t0 = time.perf_counter()
    result = run_suite(ds, cfgs, bundle, repetitions=args.reps, warmup=args.warmup)
    elapsed = time.perf_counter() - t0

    goc, ann = _characterize_for_meta(ds, seed)
    meta = {
        "dataset": {ds.name: {"trajectories": len(ds),
                              "segments": ds.total_segments(),
                              "goc": goc, "ann": ann}},
        "seed": seed,
        "workload": args.workload,
        "read_ratios": args.read_ratio if args.workload == "mixed" else None,
        "mixed_ops": args.ops if args.workload == "mixed" else None,
        "params": {
            "configs_per_type": wspec.configs_per_type,
            "rect_side_fraction": wspec.rect_side_fraction,
            "k_neighbors": wspec.k_neighbors,
            "proximity_fraction": wspec.proximity_fraction,
            "batch_insert_size": wspec.batch_insert_size,
            "batch_mutation_fraction": wspec.batch_mutation_fraction,
            "max_rejects": wspec.max_rejects,
        },
        "formats": [f.value for f in formats],
        "indexes": [i.value for i in indexes],
        "repetitions": args.reps,
        "warmup": args.warmup,
        "kernel_implementation": kernels.IMPLEMENTATION,
        "threads": kernels.get_num_threads(),
        "wall_seconds": round(elapsed, 3),
    }
    out = Path(args.out)
    write_records_csv(result.records, out)
    write_metadata(out.with_name(out.stem + ".meta.json"), meta)
    print(f"wrote {len(result.records)} records to {out} in {elapsed:.1f}s")
    for err in result.errors:
        print(f"cell error: {err.dataset} {err.cell}: {err.error}", file=sys.stderr)
    return 1 if result.errors else 0


def _cmd_report(args) -> int:
    records = []
    goc_by_dataset: dict[str, float] = {}
    meta_all: dict = {"inputs": [str(p) for p in args.inputs], "datasets": {}}
    for path in args.inputs:
        records.extend(read_records_csv(path))
        meta_path = Path(path).with_name(Path(path).stem + ".meta.json")
        if meta_path.exists():
            meta = json.loads(meta_path.read_text(encoding="utf-8"))
            for name, info in meta.get("dataset", {}).items():
                goc_by_dataset[name] = info["goc"]
                meta_all["datasets"][name] = info
    comparison: FormatComparison | None = None
    note = None
    try:
        comparison = compare_formats(records, goc_by_dataset, index=args.index)
    except InsufficientPoints as exc:
        note = str(exc)
    csv_path, summary_path = emit_report(records, args.combined, args.out,
                                         meta_all, comparison)
    if note:
        with Path(summary_path).open("a", encoding="utf-8") as f:
            f.write(f"\nFormat comparison skipped: {note}\n")
        print(f"note: {note}", file=sys.stderr)
    print(f"wrote {summary_path} (records: {csv_path})")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trajbench",
        description="Trajectory dataset characterization and spatial index benchmark.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("datagen", help="generate a synthetic trajectory CSV")
    p.add_argument("--kind", required=True,
                   choices=[k.value for k in GenKind])
    p.add_argument("--m", type=int, required=True, help="trajectory count")
    p.add_argument("--k", type=int, required=True, help="segments per trajectory")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--name", default=None)
    p.add_argument("--bbox", default="0,0,1,1")
    p.add_argument("--step", type=float, default=0.005)
    p.add_argument("--hotspots", type=int, default=10)
    p.add_argument("--sigma", type=float, default=0.02)
    p.add_argument("--hotspot-fraction", type=float, default=0.9)
    p.add_argument("--travel-fraction", type=float, default=0.3)
    p.set_defaults(func=_cmd_datagen)

    p = sub.add_parser("characterize", help="compute dataset metrics")
    p.add_argument("metric", choices=["goc", "ann"])
    p.add_argument("--input", default=None)
    p.add_argument("--gen-spec", default=None)
    p.add_argument("--name", default=None)
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--exact", action="store_true")
    mode.add_argument("--approx", action="store_true")
    p.add_argument("--n", type=int, default=100, help="sample size per round")
    p.add_argument("--p", type=int, default=100, help="round count")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--literal-scaling", action="store_true",
                   help="scale the sampled ANN mean by n_total/n")
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(func=_cmd_characterize)

    p = sub.add_parser("bench", help="run the benchmark matrix")
    p.add_argument("--input", default=None)
    p.add_argument("--gen-spec", default=None)
    p.add_argument("--name", default=None)
    p.add_argument("--format", choices=["both", "segmented", "whole"], default="both")
    p.add_argument("--index", choices=["all"] + [i.value for i in IndexKind],
                   default="all")
    p.add_argument("--workload", choices=["read", "write", "mixed"], required=True)
    p.add_argument("--read-ratio", type=float, nargs="*", default=[0.5])
    p.add_argument("--ops", type=int, default=120, help="ops per mixed sequence")
    p.add_argument("--configs", type=int, default=50)
    p.add_argument("--rect-frac", type=float, default=0.05)
    p.add_argument("--knn-k", type=int, default=10)
    p.add_argument("--prox-frac", type=float, default=0.02)
    p.add_argument("--batch-size", type=int, default=100)
    p.add_argument("--mutation-frac", type=float, default=0.01)
    p.add_argument("--max-rejects", type=int, default=1000)
    p.add_argument("--reps", type=int, default=3)
    p.add_argument("--warmup", type=int, default=1)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--workload-out", default=None,
                   help="dump the read workload as replayable JSON")
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("report", help="aggregate result CSVs into a summary")
    p.add_argument("--in", dest="inputs", nargs="+", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--combined", default=None,
                   help="path for the merged records CSV (default: <out>.records.csv)")
    p.add_argument("--index", default="rtree",
                   help="index family for the format comparison")
    p.set_defaults(func=_cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        if getattr(args, "seed", None) is None and hasattr(args, "seed"):
            args.seed = _default_seed()
        if getattr(args, "combined", "") is None:
            args.combined = str(Path(args.out).with_suffix("")) + ".records.csv"
        return args.func(args)
    except TrajBenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
