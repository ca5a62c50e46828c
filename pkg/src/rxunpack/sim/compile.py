"""Lower a ReactionNetwork to flat arrays for the numeric kernels."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import Hill, Immediate, MassAction, MichaelisMenten, Reaction, ReactionNetwork
from ..errors import NumericalError

KIND_MASS_ACTION = 0
KIND_MM = 1
KIND_HILL = 2

_MAX_FOLD = 64


def _immediate_map(network: ReactionNetwork) -> dict[str, dict[str, int]]:
    out = {}
    for r in network.reactions:
        if isinstance(r.rate_law, Immediate):
            if r.substrate is None:
                raise NumericalError(f"immediate reaction {r.id!r} must have a single reactant")
            out[r.substrate] = r.change
    return out


def _fold(delta: dict[str, int], immediate: dict[str, dict[str, int]], what: str) -> dict[str, int]:
    delta = dict(delta)
    for _ in range(_MAX_FOLD):
        pending = [s for s in immediate if delta.get(s, 0) > 0]
        if not pending:
            return {s: d for s, d in delta.items() if d}
        for s in pending:
            m = delta[s]
            for t, d in immediate[s].items():
                delta[t] = delta.get(t, 0) + m * d
    raise NumericalError(f"immediate reactions form a cycle while resolving {what}")


def effective_change(network: ReactionNetwork, reaction: Reaction) -> dict[str, int]:
    """Net change of ``reaction`` once all immediate follow-ups have fired."""
    return _fold(reaction.change, _immediate_map(network), reaction.id)


def settle_initial(network: ReactionNetwork) -> dict[str, int]:
    init = {s.id: s.initial_count for s in network.species}
    imm = _immediate_map(network)
    if not any(init.get(s, 0) for s in imm):
        return init
    settled = _fold(init, imm, "the initial state")
    return {s: settled.get(s, 0) for s in network.species_ids}


@dataclass(frozen=True)
class CompiledNetwork:
    species: tuple[str, ...]
    reaction_ids: tuple[str, ...]
    kind: np.ndarray
    sp1: np.ndarray
    sp2: np.ndarray
    par: np.ndarray
    change: np.ndarray
    x0: np.ndarray

    @property
    def n_reactions(self) -> int:
        return len(self.reaction_ids)


def compile_network(network: ReactionNetwork) -> CompiledNetwork:
    """Arrays for the SSA/ODE kernels; immediate reactions are folded in.

    ``par`` columns: mass action ``(c, -, -)``, Michaelis-Menten
    ``(vmax, Km, -)``, Hill ``(kms, J**n, n)``.
    """
    index = network.species_index()
    imm = _immediate_map(network)
    regular = [r for r in network.reactions if not isinstance(r.rate_law, Immediate)]
    n, m = len(regular), len(index)
    kind = np.zeros(n, np.int64)
    sp1 = np.full(n, -1, np.int64)
    sp2 = np.full(n, -1, np.int64)
    par = np.zeros((n, 3))
    change = np.zeros((n, m), np.int64)
    for i, r in enumerate(regular):
        law = r.rate_law
        slots = [index[s] for s, k in r.reactants for _ in range(k)]
        if isinstance(law, MassAction):
            if len(slots) > 2:
                raise NumericalError(f"reaction {r.id!r}: mass-action order {len(slots)} > 2")
            kind[i] = KIND_MASS_ACTION
            par[i, 0] = law.c
            if slots:
                sp1[i] = slots[0]
            if len(slots) == 2:
                sp2[i] = slots[1]
        elif isinstance(law, MichaelisMenten):
            kind[i] = KIND_MM
            sp1[i] = index[r.substrate]
            par[i, :2] = law.vmax, law.km
        elif isinstance(law, Hill):
            kind[i] = KIND_HILL
            sp1[i] = index[r.substrate]
            par[i] = law.kms, float(law.j) ** law.n, law.n
        else:
            raise NumericalError(f"unsupported rate law on {r.id!r}")
        for s, d in _fold(r.change, imm, r.id).items():
            change[i, index[s]] = d
    init = settle_initial(network)
    x0 = np.array([init[s] for s in network.species_ids], np.int64)
    return CompiledNetwork(tuple(network.species_ids), tuple(r.id for r in regular),
                           kind, sp1, sp2, par, change, x0)
