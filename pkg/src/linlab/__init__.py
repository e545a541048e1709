"""Bounded checking of linearizability proofs by forward simulation.

The package models concurrent queue and stack implementations as labelled
transition systems, together with partial-order specifications, and checks
histories, refinement and simulation relations between them exhaustively
for small workloads.
"""
from .histories import QUEUE, STACK, is_linearizable, linearizations
from .lts import (GAMMAS, ActionLabel, BoundExceeded, ExplorationBounds, check_gamma_deterministic,
                  collect_histories, reachable_graph)
from .simulation import (check_forward_simulation, check_gamma_refinement,
                         check_normal_backward_simulation, histories_equal)
from .verdict import Status, Verdict
from .workload import Workload

__all__ = [
    "ActionLabel", "BoundExceeded", "ExplorationBounds", "GAMMAS", "QUEUE", "STACK", "Status",
    "Verdict", "Workload", "check_forward_simulation", "check_gamma_deterministic",
    "check_gamma_refinement", "check_normal_backward_simulation", "collect_histories",
    "histories_equal", "is_linearizable", "linearizations", "reachable_graph",
]
