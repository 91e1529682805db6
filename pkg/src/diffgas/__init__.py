"""Godunov-type schemes for polytropic gas dynamics with diffusive entropy."""
from .thermo import GasConstants, PrimitiveState, ConservedState
from .riemann import RiemannFan, solve, solve_batch, sample
from .entropy_transport import EntropyProfile, LagrangianTracker
from .scheme import GridField, RunConfig, initialize, run, godunov_step, lax_friedrichs_step

__all__ = [
    "GasConstants",
    "PrimitiveState",
    "ConservedState",
    "RiemannFan",
    "solve",
    "solve_batch",
    "sample",
    "EntropyProfile",
    "LagrangianTracker",
    "GridField",
    "RunConfig",
    "initialize",
    "run",
    "godunov_step",
    "lax_friedrichs_step",
]

__version__ = "0.1.0"
