"""Stochastic (Gillespie direct method) and deterministic execution."""
from .compile import CompiledNetwork, compile_network, effective_change
from .ode import ode_rhs, simulate_ode
from .ssa import (RNG_NAME, Ensemble, SsaConfig, Trajectory, replicate_rng, run_ensemble,
                  simulate_ssa, ssa_step)

__all__ = [
    "CompiledNetwork", "compile_network", "effective_change", "ode_rhs", "simulate_ode",
    "RNG_NAME", "Ensemble", "SsaConfig", "Trajectory", "replicate_rng", "run_ensemble",
    "simulate_ssa", "ssa_step",
]
