"""Chance-constrained makespan scheduling on two machines: model, solvers, oracles."""

from .model import (
    Instance,
    InstanceError,
    LoadState,
    SolutionClass,
    Variant,
    apply_flip,
    chance_bound,
    classify,
    fitness,
    machine_stats,
)

__version__ = "0.1.0"
