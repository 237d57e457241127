"""Benchmark grid runner, speedup join and CSV output."""

from __future__ import annotations

import csv
import io
import logging
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence, TextIO

import numpy as np

from .keyspace import ShapingFamily
from .metrics import ProbeHistogram, collision_rate, max_cluster, metadata_bits_for
from .tables import LookupOrder, ProbeScheme, Table, next_prime
from .workload import QueryMode, WorkloadSpec, gen_keys, gen_query_indices

log = logging.getLogger(__name__)

SCHEMES = (ProbeScheme.DOUBLE, ProbeScheme.LINEAR, ProbeScheme.QUADRATIC, ProbeScheme.ROBINHOOD)

RESULT_COLUMNS = (
    "scheme", "sst", "k", "metadata_bits", "m_requested", "m_actual", "load_factor",
    "q_multiplier", "query_mode", "seed", "runs", "build_time_s",
    "lookup_time_us_per_query", "total_time_s", "mean_probes", "p95_probes",
    "p99_probes", "collisions_per_record", "max_cluster",
)
TIMING_COLUMNS = ("build_time_s", "lookup_time_us_per_query", "total_time_s")
SPEEDUP_COLUMNS = (
    "scheme", "k", "metadata_bits", "m_requested", "load_factor", "q_multiplier",
    "query_mode", "seed", "runs", "lookup_speedup", "total_speedup", "probe_speedup",
    "p99_probe_speedup",
)


class TimingError(RuntimeError):
    """The clock went backwards during a measured phase."""


@dataclass(frozen=True)
class ExperimentConfig:
    scheme: ProbeScheme
    sst: bool
    k: int
    workload: WorkloadSpec
    runs: int = 8
    warmup_runs: int = 1
    lookup_order: LookupOrder = LookupOrder.INTERLEAVED

    def __post_init__(self):
        object.__setattr__(self, "scheme", ProbeScheme(self.scheme))
        object.__setattr__(self, "lookup_order", LookupOrder(self.lookup_order))
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if self.warmup_runs < 0:
            raise ValueError("warmup_runs must be >= 0")
        if not self.sst:
            object.__setattr__(self, "k", 0)
        elif self.k < 1:
            raise ValueError("shaping order must be >= 1 when shaping is on")

    @property
    def metadata_bits(self) -> int:
        return metadata_bits_for(self.k) if self.sst else 0

    def label(self) -> str:
        w = self.workload
        sst = f"K={self.k}" if self.sst else "off"
        return (
            f"{self.scheme.value} {sst} M={w.m_requested} a={w.load_factor} "
            f"Q/N={w.query_multiplier} {w.mode.value} seed={w.seed}"
        )


@dataclass
class RunResult:
    scheme: str
    sst: bool
    k: int
    metadata_bits: int
    m_requested: int
    m_actual: int
    load_factor: float
    q_multiplier: int
    query_mode: str
    seed: int
    runs: int
    build_time_s: float = math.nan
    lookup_time_us_per_query: float = math.nan
    total_time_s: float = math.nan
    mean_probes: float = math.nan
    p95_probes: float = math.nan
    p99_probes: float = math.nan
    collisions_per_record: float = math.nan
    max_cluster: float = math.nan
    # not part of the CSV
    n_keys: int = 0
    n_queries: int = 0
    insert_probes: float = math.nan
    eval_probes: float = math.nan
    lookup_probes: float = math.nan
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None

    @classmethod
    def echo(cls, config: ExperimentConfig, m_actual: int) -> "RunResult":
        w = config.workload
        return cls(
            scheme=config.scheme.value,
            sst=config.sst,
            k=config.k,
            metadata_bits=config.metadata_bits,
            m_requested=w.m_requested,
            m_actual=m_actual,
            load_factor=w.load_factor,
            q_multiplier=w.query_multiplier,
            query_mode=w.mode.value,
            seed=w.seed,
            runs=config.runs,
            n_keys=w.n_keys,
            n_queries=w.n_queries,
        )

    def structural(self) -> tuple:
        """Every CSV field except the timing columns."""
        return tuple(getattr(self, c) for c in RESULT_COLUMNS if c not in TIMING_COLUMNS)


@dataclass
class SpeedupRow:
    baseline: RunResult
    shaped: RunResult
    lookup_speedup: float
    total_speedup: float
    probe_speedup: float
    p99_probe_speedup: float


@dataclass
class _Cycle:
    build_s: float
    lookup_s: float
    hist: ProbeHistogram
    collisions: float
    cluster: int
    insert_probes: int
    eval_probes: int


def _now() -> float:
    return time.perf_counter()


def _elapsed(t0: float, t1: float, phase: str) -> float:
    if t1 < t0:
        raise TimingError(f"clock went backwards during {phase}: {t0} -> {t1}")
    return t1 - t0


def _make_table(config: ExperimentConfig) -> Table:
    family = ShapingFamily(config.k) if config.sst else None
    return Table(config.workload.m_requested, config.scheme, family, config.lookup_order)


def _run_cycle(config: ExperimentConfig, seed: int, timed: bool) -> _Cycle:
    spec = config.workload.with_seed(seed)
    keys = gen_keys(spec)
    if len(keys) == 0:
        raise ValueError(f"workload holds no keys: {spec}")
    idx = gen_query_indices(spec, len(keys))
    table = _make_table(config)

    t0 = _now()
    build = table.build(keys)
    t1 = _now()
    build_s = _elapsed(t0, t1, "build")

    if timed:
        queries = keys[idx]
        del idx
        t2 = _now()
        probes = table.lookup_many(queries)
        t3 = _now()
        lookup_s = _elapsed(t2, t3, "lookup")
        hist = ProbeHistogram.from_samples(probes)
    else:
        # a query's probe count depends only on its key, so weight per-key
        # counts by how often each key is queried
        per_key = table.lookup_many(keys)
        weights = np.bincount(idx, minlength=len(keys))
        hist = ProbeHistogram.from_weighted(per_key, weights)
        lookup_s = math.nan

    return _Cycle(
        build_s=build_s,
        lookup_s=lookup_s,
        hist=hist,
        collisions=collision_rate(build.collided),
        cluster=max_cluster(table.occupied),
        insert_probes=int(build.probes.sum()),
        eval_probes=int(build.eval_probes.sum()),
    )


def run_single(config: ExperimentConfig, structural_only: bool = False) -> RunResult:
    """Warm up, then run ``config.runs`` measured cycles with seeds
    ``seed + i`` and average each column over the cycles. Percentiles are
    taken per cycle before averaging."""
    result = RunResult.echo(config, next_prime(config.workload.m_requested))
    base = config.workload.seed
    if not structural_only:
        for _ in range(config.warmup_runs):
            _run_cycle(config, base, timed=True)
    cycles = [_run_cycle(config, base + i, timed=not structural_only) for i in range(config.runs)]

    def avg(xs) -> float:
        return float(np.mean(xs))

    q = result.n_queries
    result.mean_probes = avg([c.hist.mean() for c in cycles])
    result.p95_probes = avg([c.hist.percentile(95) for c in cycles])
    result.p99_probes = avg([c.hist.percentile(99) for c in cycles])
    result.collisions_per_record = avg([c.collisions for c in cycles])
    result.max_cluster = avg([c.cluster for c in cycles])
    result.insert_probes = avg([c.insert_probes for c in cycles])
    result.eval_probes = avg([c.eval_probes for c in cycles])
    result.lookup_probes = avg([c.hist.sum() for c in cycles])
    if not structural_only:
        result.build_time_s = avg([c.build_s for c in cycles])
        result.lookup_time_us_per_query = avg([c.lookup_s / q * 1e6 for c in cycles])
        result.total_time_s = avg([c.build_s + c.lookup_s for c in cycles])
    return result


def _run_guarded(config: ExperimentConfig, structural_only: bool) -> RunResult:
    try:
        return run_single(config, structural_only)
    except Exception as exc:  # recorded per row; the grid continues
        log.error("aborted %s: %s", config.label(), exc)
        res = RunResult.echo(config, next_prime(config.workload.m_requested))
        res.error = f"{type(exc).__name__}: {exc}"
        return res


def run_grid(
    grid: Sequence[ExperimentConfig],
    structural_only: bool = False,
    workers: int = 1,
) -> list[RunResult]:
    """Run every config in order. Only structural-only grids fan out across
    processes; timed configs always run one at a time."""
    if structural_only and workers > 1 and len(grid) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_run_guarded, grid, [True] * len(grid)))
    out = []
    for i, cfg in enumerate(grid):
        log.info("[%d/%d] %s", i + 1, len(grid), cfg.label())
        out.append(_run_guarded(cfg, structural_only))
    return out


# speedups ------------------------------------------------------------------


def _pair_key(r: RunResult) -> tuple:
    return (r.scheme, r.m_requested, r.load_factor, r.q_multiplier, r.query_mode, r.seed, r.runs)


def pair_results(results: Iterable[RunResult]) -> tuple[list[tuple[RunResult, RunResult]], list[RunResult]]:
    """Match each shaped row with the unshaped row of the same workload.
    Returns (pairs, unpaired shaped rows)."""
    results = [r for r in results if r.ok]
    baselines = {_pair_key(r): r for r in results if not r.sst}
    pairs, unpaired = [], []
    for r in results:
        if not r.sst:
            continue
        base = baselines.get(_pair_key(r))
        if base is None:
            unpaired.append(r)
        else:
            pairs.append((base, r))
    return pairs, unpaired


def _ratio(a: float, b: float) -> float:
    if b == 0 or math.isnan(a) or math.isnan(b):
        return math.nan
    return a / b


def speedup(baseline: RunResult, shaped: RunResult) -> SpeedupRow:
    return SpeedupRow(
        baseline=baseline,
        shaped=shaped,
        lookup_speedup=_ratio(baseline.lookup_time_us_per_query, shaped.lookup_time_us_per_query),
        total_speedup=_ratio(baseline.total_time_s, shaped.total_time_s),
        probe_speedup=_ratio(baseline.mean_probes, shaped.mean_probes),
        p99_probe_speedup=_ratio(baseline.p99_probes, shaped.p99_probes),
    )


def compute_speedups(results: Iterable[RunResult]) -> list[SpeedupRow]:
    pairs, unpaired = pair_results(results)
    for r in unpaired:
        log.warning(
            "unpaired shaped row: %s K=%d M=%d a=%s Q/N=%d %s seed=%d",
            r.scheme, r.k, r.m_requested, r.load_factor, r.q_multiplier, r.query_mode, r.seed,
        )
    return [speedup(b, s) for b, s in pairs]


def scheme_means(results: Iterable[RunResult]) -> dict[tuple, dict[str, float]]:
    """Average collisions/record and max cluster across schemes.

    Rows are grouped by everything except the scheme, keyed
    ``(sst, k, m_requested, load_factor, q_multiplier, query_mode)``. Each
    row already averages its own seeds, so this is the cross-scheme view of
    the per-scheme figures.
    """
    groups: dict[tuple, list[RunResult]] = {}
    for r in results:
        if r.ok:
            key = (r.sst, r.k, r.m_requested, r.load_factor, r.q_multiplier, r.query_mode)
            groups.setdefault(key, []).append(r)
    return {
        key: {
            "schemes": len(rows),
            "collisions_per_record": float(np.mean([r.collisions_per_record for r in rows])),
            "max_cluster": float(np.mean([r.max_cluster for r in rows])),
        }
        for key, rows in groups.items()
    }


# CSV -----------------------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "on" if v else "off"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.6g}"
    return str(v)


def _result_row(r: RunResult) -> list[str]:
    return [_fmt(getattr(r, c)) for c in RESULT_COLUMNS]


def _speedup_row(s: SpeedupRow) -> list[str]:
    r = s.shaped
    vals = {
        "scheme": r.scheme, "k": r.k, "metadata_bits": r.metadata_bits,
        "m_requested": r.m_requested, "load_factor": r.load_factor,
        "q_multiplier": r.q_multiplier, "query_mode": r.query_mode, "seed": r.seed,
        "runs": r.runs, "lookup_speedup": s.lookup_speedup,
        "total_speedup": s.total_speedup, "probe_speedup": s.probe_speedup,
        "p99_probe_speedup": s.p99_probe_speedup,
    }
    return [_fmt(vals[c]) for c in SPEEDUP_COLUMNS]


def write_csv(rows: Sequence[RunResult | SpeedupRow], fh: TextIO, speedups: bool | None = None) -> None:
    if speedups is None:
        speedups = bool(rows) and isinstance(rows[0], SpeedupRow)
    fh.write(",".join(SPEEDUP_COLUMNS if speedups else RESULT_COLUMNS) + "\n")
    for row in rows:
        cells = _speedup_row(row) if isinstance(row, SpeedupRow) else _result_row(row)
        fh.write(",".join(cells) + "\n")


def emit_csv(
    rows: Sequence[RunResult | SpeedupRow], destination: str | Path, speedups: bool | None = None
) -> None:
    """Write rows to ``destination`` ("-" for stdout)."""
    if str(destination) == "-":
        write_csv(rows, sys.stdout, speedups)
        return
    with open(destination, "w", newline="") as fh:
        write_csv(rows, fh, speedups)


_INT_COLUMNS = {"k", "metadata_bits", "m_requested", "m_actual", "q_multiplier", "seed", "runs"}


def parse_results(text: str) -> list[RunResult]:
    reader = csv.DictReader(io.StringIO(text))
    missing = set(RESULT_COLUMNS) - set(reader.fieldnames or ())
    if missing:
        raise ValueError(f"not a results CSV; missing columns {sorted(missing)}")
    out = []
    for rec in reader:
        kw = {}
        for c in RESULT_COLUMNS:
            raw = rec[c]
            if c == "sst":
                kw[c] = raw == "on"
            elif c in ("scheme", "query_mode"):
                kw[c] = raw
            elif c in _INT_COLUMNS:
                kw[c] = int(raw)
            else:
                kw[c] = float(raw)
        out.append(RunResult(**kw))
    return out


def read_csv(path: str | Path) -> list[RunResult]:
    return parse_results(Path(path).read_text())


# presets -------------------------------------------------------------------


def _configs(
    schemes, ks, sizes, alphas, qmults, modes, seed, runs, warmup, lookup_order
) -> list[ExperimentConfig]:
    grid = []
    for scheme in schemes:
        for m in sizes:
            for a in alphas:
                for q in qmults:
                    for mode in modes:
                        w = WorkloadSpec(m, a, q, mode, seed)
                        for k in ks:
                            grid.append(
                                ExperimentConfig(scheme, k is not None, k or 0, w, runs, warmup, lookup_order)
                            )
    return grid


PRESETS = {
    # 4 schemes x {off,2,4,8} x 4 loads x 3 multipliers x 2 modes = 384
    "main": dict(ks=(None, 2, 4, 8), sizes=(5000,), alphas=(0.75, 0.85, 0.90, 0.95),
                 qmults=(1, 20, 50), modes=(QueryMode.UNIFORM, QueryMode.HOTSPOT)),
    "scale": dict(ks=(None, 8), sizes=(5000, 50000, 500000), alphas=(0.90, 0.95),
                  qmults=(50,), modes=(QueryMode.UNIFORM,)),
    "highq": dict(ks=(None, 8), sizes=(5000, 50000, 500000), alphas=(0.95,),
                  qmults=(50, 200), modes=(QueryMode.UNIFORM,)),
    "amortization": dict(ks=(None, 4), sizes=(5000,), alphas=(0.95,),
                         qmults=(1, 20, 50), modes=(QueryMode.UNIFORM,)),
    "querymode": dict(ks=(None, 4), sizes=(5000,), alphas=(0.95,),
                      qmults=(50,), modes=(QueryMode.UNIFORM, QueryMode.HOTSPOT)),
}


def preset(
    name: str,
    seed: int = 0,
    runs: int = 8,
    warmup: int = 1,
    lookup_order: LookupOrder | str = LookupOrder.INTERLEAVED,
    sizes: Sequence[int] | None = None,
) -> list[ExperimentConfig]:
    try:
        p = dict(PRESETS[name])
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    if sizes is not None:
        p["sizes"] = tuple(sizes)
    return _configs(SCHEMES, seed=seed, runs=runs, warmup=warmup, lookup_order=lookup_order, **p)


def drop_timing(text: str) -> str:
    """CSV text with the timing columns removed."""
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        return ""
    keep = [i for i, c in enumerate(rows[0]) if c not in TIMING_COLUMNS]
    return "\n".join(",".join(r[i] for i in keep) for r in rows) + "\n"


__all__ = [
    "ExperimentConfig", "RunResult", "SpeedupRow", "TimingError", "PRESETS",
    "RESULT_COLUMNS", "SPEEDUP_COLUMNS", "TIMING_COLUMNS", "compute_speedups",
    "drop_timing", "emit_csv", "pair_results", "parse_results", "preset",
    "read_csv", "run_grid", "run_single", "scheme_means", "speedup", "write_csv",
]
