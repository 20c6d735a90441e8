"""Distributed online data aggregation on pairwise-interaction dynamic graphs."""
from ._backend import BACKEND
from .algorithms import (AlgorithmSpec, gathering, get_algorithm, waiting, waiting_greedy)
from .engine import (INF, SINK, ExecutionState, ExecutionTrace, Interaction,
                     InteractionSequence, TransmissionEvent, apply_decision, duration,
                     parse_sequence, simulate, simulate_adaptive)
from .oracle import (CostReport, brute_force_opt, cost, offline_schedule, opt,
                     successive_convergecasts)

__version__ = "0.1.0"
