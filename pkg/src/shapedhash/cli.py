"""Command-line entry point: ``shapedhash run | grid | speedup``."""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .harness import (
    PRESETS,
    ExperimentConfig,
    compute_speedups,
    emit_csv,
    pair_results,
    preset,
    read_csv,
    run_grid,
)
from .tables import LookupOrder, ProbeScheme
from .workload import QueryMode, WorkloadSpec


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="base seed; cycle i uses seed+i")
    p.add_argument("--runs", type=int, default=8, help="measured cycles per config")
    p.add_argument("--warmup", type=int, default=1, help="unmeasured warm-up cycles")
    p.add_argument("--out", default="-", help="CSV destination (default stdout)")
    p.add_argument(
        "--structural-only", action="store_true",
        help="skip timing; probe/structure columns only, grid may run in parallel",
    )
    p.add_argument(
        "--lookup-order", choices=[o.value for o in LookupOrder],
        default=LookupOrder.INTERLEAVED.value,
        help="candidate schedule for shaped lookups",
    )
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shapedhash",
        description="Benchmark open-addressed tables with and without key shaping.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a single configuration")
    run.add_argument("--scheme", choices=[s.value for s in ProbeScheme], default="linear")
    run.add_argument("--sst", choices=["on", "off"], default="off")
    run.add_argument("--k", type=int, choices=[1, 2, 4, 8], default=4)
    run.add_argument("--m", type=int, default=5000, help="requested table size")
    run.add_argument("--load-factor", type=float, default=0.95)
    run.add_argument("--qmult", type=int, default=50, help="lookups per stored record")
    run.add_argument("--mode", choices=[q.value for q in QueryMode], default="uniform")
    _common(run)

    grid = sub.add_parser("grid", help="run a named experiment grid")
    grid.add_argument("preset", choices=sorted(PRESETS))
    grid.add_argument(
        "--sizes", type=int, nargs="+", default=None,
        help="override the preset's table sizes",
    )
    grid.add_argument(
        "--workers", type=int, default=os.cpu_count() or 1,
        help="processes for --structural-only grids",
    )
    _common(grid)

    sp = sub.add_parser("speedup", help="pair shaped rows with baselines in a results CSV")
    sp.add_argument("results", help="CSV written by run or grid")
    sp.add_argument("--out", default="-")
    sp.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(message)s",
        stream=sys.stderr,
    )

    if args.command == "speedup":
        results = read_csv(args.results)
        _, unpaired = pair_results(results)
        emit_csv(compute_speedups(results), args.out, speedups=True)
        return 1 if unpaired else 0

    if args.command == "run":
        try:
            workload = WorkloadSpec(args.m, args.load_factor, args.qmult, args.mode, args.seed)
            grid = [
                ExperimentConfig(
                    args.scheme, args.sst == "on", args.k, workload,
                    args.runs, args.warmup, args.lookup_order,
                )
            ]
        except ValueError as exc:
            print(f"shapedhash: {exc}", file=sys.stderr)
            return 2
        workers = 1
    else:
        grid = preset(
            args.preset, seed=args.seed, runs=args.runs, warmup=args.warmup,
            lookup_order=args.lookup_order, sizes=args.sizes,
        )
        workers = args.workers

    results = run_grid(grid, structural_only=args.structural_only, workers=workers)
    failed = [r for r in results if not r.ok]
    for r in failed:
        print(f"shapedhash: aborted row {r.scheme} K={r.k} M={r.m_requested}: {r.error}", file=sys.stderr)
    emit_csv([r for r in results if r.ok], args.out, speedups=False)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
