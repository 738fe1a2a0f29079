#!/usr/bin/env python3
"""Query-count scaling study across ground set sizes.

Builds one sketch per (pipeline, n) on seeded benchmark instances and
reports ledger totals, per-phase splits, and the growth factor against
the previous size. Wall time is informational only.

    python3 scripts/bench_scaling.py --pipeline matroid submodular --sizes 64 256 1024
    python3 scripts/bench_scaling.py --all --csv out.csv
"""

import argparse
import csv
import sys
import time

import valsketch as vs

HEADER = [
    "pipeline", "n", "value_queries", "demand_queries",
    "partition_value", "build_value", "oracle_value", "oracle_demand",
    "groups", "growth", "wall_ms",
]


def run_one(pipeline_name: str, n: int, seed: int) -> dict:
    pipeline = vs.get_pipeline(pipeline_name)
    spec = vs.bench_instance(pipeline_name, n, seed)
    oracle = spec.build(vs.QueryLedger())
    pipeline.check_compatible(oracle)
    start = time.perf_counter()
    sketch = vs.build_sketch(oracle, pipeline.card, pipeline.xos)
    wall_ms = (time.perf_counter() - start) * 1000.0
    snap = oracle.ledger.snapshot()
    phases = snap["phases"]
    return {
        "pipeline": pipeline_name,
        "n": n,
        "value_queries": snap["value_queries"],
        "demand_queries": snap["demand_queries"],
        "partition_value": phases["partition"]["value"],
        "build_value": phases["build"]["value"],
        "oracle_value": phases["oracle-internal"]["value"],
        "oracle_demand": phases["oracle-internal"]["demand"],
        "groups": len(sketch.groups),
        "growth": "",
        "wall_ms": round(wall_ms, 1),
    }


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--pipeline", nargs="+", default=None,
                        choices=sorted(vs.PIPELINES))
    parser.add_argument("--all", action="store_true",
                        help="run every pipeline that scales past n = 16")
    parser.add_argument("--sizes", nargs="+", type=int,
                        default=[64, 256, 1024])
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--csv", help="also write rows to this file")
    args = parser.parse_args(argv)

    pipelines = args.pipeline or []
    if args.all or not pipelines:
        pipelines = ["matroid", "submodular", "subadditive"]

    rows = []
    for name in pipelines:
        prev = None
        for n in sorted(args.sizes):
            row = run_one(name, n, args.seed)
            if prev:
                row["growth"] = f"{row['value_queries'] / prev['value_queries']:.2f}"
            rows.append(row)
            prev = row
            print("  ".join(f"{key}={row[key]}" for key in HEADER if row[key] != ""))

    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=HEADER)
            writer.writeheader()
            writer.writerows(rows)
        print(f"wrote {args.csv}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
