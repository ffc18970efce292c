"""Discrete factor-graph inference engine."""

from ._core import (
    FactorGraph,
    exact_map,
    exact_marginals,
    gen_synthetic_instance,
    gen_tree_instance,
    graph_from_json,
    ldpc_ber_sweep,
    log_partition_function,
    run_bp,
    run_construction_certifiers,
)

__all__ = [
    "FactorGraph",
    "exact_map",
    "exact_marginals",
    "gen_synthetic_instance",
    "gen_tree_instance",
    "graph_from_json",
    "ldpc_ber_sweep",
    "log_partition_function",
    "run_bp",
    "run_construction_certifiers",
]
