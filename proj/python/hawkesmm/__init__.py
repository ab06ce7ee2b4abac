"""Market making with Hawkes order flows."""

from ._core import (
    ExpSumKernel,
    GridSpec,
    MarketState,
    PowerLawKernel,
    Solution,
    approximate_power_law,
    hamiltonian_max,
    run_stage,
    simulate_constant,
    solve,
)

__all__ = [
    "ExpSumKernel",
    "GridSpec",
    "MarketState",
    "PowerLawKernel",
    "Solution",
    "approximate_power_law",
    "hamiltonian_max",
    "run_stage",
    "simulate_constant",
    "solve",
]
