"""Deterministic reference integration in molecule-count units."""
from __future__ import annotations

import math

import numpy as np
from scipy.integrate import RK45

from ..core import ReactionNetwork
from ..errors import StiffnessError
from . import kernels
from .compile import compile_network
from .ssa import Trajectory, _check


def ode_rhs(network: ReactionNetwork):
    """Return ``f(t, x)`` for the mass-action/compound ODE of ``network``."""
    cn = compile_network(network)
    stoich = cn.change.T.astype(float)
    flux = np.zeros(cn.n_reactions)

    def rhs(t, x):
        return stoich @ kernels.fluxes(x, cn.kind, cn.sp1, cn.sp2, cn.par, flux)

    return rhs, cn


def simulate_ode(network: ReactionNetwork, t_end: float, rel_tol: float = 1e-6,
                 abs_tol: float = 1e-6, dt: float = 1.0, max_steps: int = 2_000_000,
                 x0=None) -> Trajectory:
    """Dormand-Prince 5(4) integration sampled on a fixed grid.

    Raises StiffnessError when the step size underflows or ``max_steps`` is
    exhausted; unpacked networks with a large stiffness ratio are the usual
    cause.
    """
    _check(network)
    rhs, cn = ode_rhs(network)
    n = int(math.floor(t_end / dt + 1e-9)) + 1
    grid = np.arange(n) * dt
    y0 = cn.x0.astype(float) if x0 is None else np.asarray(x0, float)
    out = np.empty((n, len(y0)))
    out[0] = y0
    if cn.n_reactions == 0 or n == 1:
        out[:] = y0
        return Trajectory(grid, out, cn.species, "reached-t_end", 0)
    solver = RK45(rhs, 0.0, y0, grid[-1], rtol=rel_tol, atol=abs_tol)
    k = 1
    steps = 0
    while k < n:
        msg = solver.step()
        steps += 1
        if solver.status == "failed":
            raise StiffnessError(f"{msg} (t={solver.t:.6g}); a smaller stiffness ratio rho may help")
        if steps > max_steps:
            raise StiffnessError(
                f"more than {max_steps} steps before t={grid[-1]}; "
                "a smaller stiffness ratio rho may help")
        if solver.t >= grid[k] or solver.status == "finished":
            dense = solver.dense_output()
            while k < n and grid[k] <= solver.t:
                out[k] = dense(grid[k])
                k += 1
            if solver.status == "finished":
                out[k:] = solver.y
                k = n
    return Trajectory(grid, out, cn.species, "reached-t_end", steps)
