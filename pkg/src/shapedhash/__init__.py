"""Dense open-addressed hash index with a reversible key-shaping layer."""

from .harness import (
    ExperimentConfig, RunResult, compute_speedups, emit_csv, run_grid, run_single, scheme_means,
)
from .keyspace import ShapingFamily, candidates, shape, unshape
from .metrics import ProbeHistogram, analytic_collision_rate, collision_rate, max_cluster, percentile
from .tables import CapacityError, LookupOrder, ProbeScheme, Table
from .workload import QueryMode, WorkloadSpec, gen_keys, gen_queries

__version__ = "0.1.0"

__all__ = [
    "CapacityError", "ExperimentConfig", "LookupOrder", "ProbeHistogram", "ProbeScheme",
    "QueryMode", "RunResult", "ShapingFamily", "Table", "WorkloadSpec",
    "analytic_collision_rate", "candidates", "collision_rate", "compute_speedups",
    "emit_csv", "gen_keys", "gen_queries", "max_cluster", "percentile", "run_grid",
    "run_single", "scheme_means", "shape", "unshape",
]
