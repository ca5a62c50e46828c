"""Unpacking of compound rate laws into elementary mass-action steps.

A Michaelis-Menten reaction ``S -> P @ mm(vmax, Km)`` becomes::

    E + S -> ES      k1
    ES -> E + S      k2
    ES -> E + P      k3

and a dimer Hill reaction ``TF -> TF + M @ hill(kms, J, 2)`` becomes::

    2 TF -> TF2          k1
    TF2 -> 2 TF          k2
    TF2 + G -> GTF2      k3
    GTF2 -> TF2 + G      k4
    GTF2 -> GTF2 + M     kms / G_tot

Homodimerisation propensity is ``c x (x - 1) / 2``, so the network stores
``c = 2 k1`` for the first step; the deterministic flux is then ``k1 TF**2``
and the equilibrium keeps ``J**2 = k2 k4 / (k1 k3)``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

from .core import (Conservation, Hill, MassAction, MichaelisMenten, Reaction,
                   ReactionNetwork, Species, validate_network)
from .errors import (AssumptionError, CompositionError, DomainError, NamingError,
                     RateLawTypeError, UnsupportedOrderError)

DEFAULT_RHO = 100.0
COOPERATIVITY_RATIO = 100.0


class CompositionWarning(UserWarning):
    pass


@dataclass(frozen=True)
class AssumptionCheck:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class MmDerivation:
    vmax: float
    km: float
    etot: float
    rho: float
    k1: float
    k2: float
    k3: float

    def __iter__(self):
        return iter((self.k1, self.k2, self.k3))


@dataclass(frozen=True)
class HillDerivation:
    j: float
    k1: float
    k2: float
    k3: float
    k4: float
    n: int = 2

    @property
    def K1(self) -> float:
        return self.k2 / self.k1

    @property
    def K2(self) -> float:
        return self.k4 / self.k3

    @property
    def positive_cooperativity(self) -> bool:
        return self.K1 >= COOPERATIVITY_RATIO * self.K2

    @property
    def j_identity(self) -> float:
        """``sqrt(k2 k4 / (k1 k3))``, the half-saturation level of the scheme."""
        return math.sqrt(self.k2 * self.k4 / (self.k1 * self.k3))

    @classmethod
    def from_rates(cls, k1, k2, k3, k4) -> "HillDerivation":
        for name, v in (("k1", k1), ("k2", k2), ("k3", k3), ("k4", k4)):
            if not v > 0:
                raise DomainError(f"{name} must be positive, got {v!r}")
        return cls(math.sqrt(k2 * k4 / (k1 * k3)), k1, k2, k3, k4)

    def __iter__(self):
        return iter((self.k1, self.k2, self.k3, self.k4))


@dataclass(frozen=True)
class TemplateExpansion:
    replaced_reaction: str
    template: str
    introduced_species: tuple[Species, ...]
    introduced_reactions: tuple[Reaction, ...]
    parameters: dict = field(default_factory=dict)
    conservation: Conservation | None = None
    constants: dict = field(default_factory=dict)
    assumption_report: tuple[AssumptionCheck, ...] = ()
    renamed: dict = field(default_factory=dict)

    @property
    def assumptions_hold(self) -> bool:
        return all(c.passed for c in self.assumption_report)

    def to_dict(self) -> dict:
        return {
            "replaced_reaction": self.replaced_reaction,
            "template": self.template,
            "introduced_species": [s.id for s in self.introduced_species],
            "introduced_reactions": [r.id for r in self.introduced_reactions],
            "constants": dict(self.constants),
            "assumption_checks": [
                {"name": c.name, "passed": bool(c.passed), "detail": c.detail}
                for c in self.assumption_report],
            "renamed": dict(self.renamed),
        }


# -- Michaelis-Menten -------------------------------------------------------

def derive_mm_params(vmax: float, km: float, etot: float, rho: float = DEFAULT_RHO) -> MmDerivation:
    """Elementary constants for a Michaelis-Menten law.

    ``rho = k1 Km / k3`` sets how much faster association is than
    catalysis; ``k3 = vmax / Etot`` and ``k2 = (rho - 1) k3``.
    """
    for name, v in (("vmax", vmax), ("Km", km), ("Etot", etot)):
        if not v > 0:
            raise DomainError(f"{name} must be positive, got {v!r}")
    if not rho > 1:
        raise AssumptionError(
            f"rho = {rho!r} <= 1 gives k2 <= 0; association must outpace catalysis")
    k3 = vmax / etot
    k1 = rho * k3 / km
    k2 = (rho - 1.0) * k3
    return MmDerivation(vmax, km, etot, rho, k1, k2, k3)


def select_enzyme_total(s_min: float, fraction: float = 0.1) -> int:
    """Enzyme copy number as a fraction of the smallest substrate level."""
    if not s_min > 0:
        raise DomainError(f"S_min must be positive, got {s_min!r}")
    if not 0 < fraction < 1:
        raise AssumptionError(f"fraction {fraction!r} must lie in (0, 1) so that S >> Etot")
    return max(1, int(round(fraction * s_min)))


def _fresh(network_ids: set, name: str, rid: str, explicit: bool, renamed: dict) -> str:
    if name not in network_ids:
        return name
    if explicit:
        raise NamingError(f"species {name!r} already exists in the network")
    alt = f"{name}_{rid}"
    if alt in network_ids:
        raise NamingError(f"species {name!r} and {alt!r} both exist in the network")
    renamed[name] = alt
    return alt


def mm_expansion(network: ReactionNetwork, reaction_id: str, etot: int,
                 rho: float = DEFAULT_RHO, enzyme_name: str | None = None,
                 complex_name: str | None = None, s_min: float | None = None) -> TemplateExpansion:
    """Build the expansion record for one MM reaction without applying it."""
    r = network.reaction(reaction_id)
    law = r.rate_law
    if not isinstance(law, MichaelisMenten):
        raise RateLawTypeError(f"reaction {reaction_id!r} is not Michaelis-Menten")
    s = r.substrate
    if s is None:
        raise RateLawTypeError(f"reaction {reaction_id!r} needs a single substrate molecule")
    d = derive_mm_params(law.vmax, law.km, etot, rho)

    ids = set(network.species_ids)
    renamed: dict = {}
    e = _fresh(ids, enzyme_name or "E", reaction_id, enzyme_name is not None, renamed)
    es = _fresh(ids | {e}, complex_name or f"{e}{s}", reaction_id,
                complex_name is not None, renamed)
    p = {f"{reaction_id}_k1": d.k1, f"{reaction_id}_k2": d.k2, f"{reaction_id}_k3": d.k3}
    products = dict(r.products)
    products[e] = products.get(e, 0) + 1
    reactions = (
        Reaction(f"{reaction_id}_bind", {e: 1, s: 1}, {es: 1}, MassAction(d.k1, f"{reaction_id}_k1")),
        Reaction(f"{reaction_id}_unbind", {es: 1}, {e: 1, s: 1}, MassAction(d.k2, f"{reaction_id}_k2")),
        Reaction(f"{reaction_id}_cat", {es: 1}, products, MassAction(d.k3, f"{reaction_id}_k3")),
    )
    s_ref = s_min if s_min is not None else next(
        sp.initial_count for sp in network.species if sp.id == s)
    checks = (
        AssumptionCheck("rho>1", d.rho > 1, f"rho = {d.rho:g}"),
        AssumptionCheck("k2>0", d.k2 > 0, f"k2 = {d.k2:g}"),
        AssumptionCheck("Km identity", math.isclose((d.k2 + d.k3) / d.k1, law.km, rel_tol=1e-12),
                        f"(k2 + k3) / k1 = {(d.k2 + d.k3) / d.k1:.12g}, Km = {law.km:.12g}"),
        AssumptionCheck("vmax identity", math.isclose(d.k3 * etot, law.vmax, rel_tol=1e-12),
                        f"k3 * Etot = {d.k3 * etot:.12g}, vmax = {law.vmax:.12g}"),
        AssumptionCheck("enzyme scarce", etot < s_ref,
                        f"Etot = {etot} vs substrate {s_ref:g}; QSSA may fail when Etot >= S"),
    )
    return TemplateExpansion(
        reaction_id, "mm", (Species(e, int(etot)), Species(es, 0)), reactions, p,
        Conservation({e: 1, es: 1}, int(etot), f"{e}_total"),
        {"vmax": law.vmax, "Km": law.km, "Etot": etot, "rho": rho,
         "k1": d.k1, "k2": d.k2, "k3": d.k3},
        checks, renamed)


def unpack_mm(network: ReactionNetwork, reaction_id: str, etot: int, rho: float = DEFAULT_RHO,
              enzyme_name: str | None = None, complex_name: str | None = None,
              s_min: float | None = None):
    """Replace an MM reaction by its three elementary steps.

    Returns ``(network, expansion)``.
    """
    exp = mm_expansion(network, reaction_id, etot, rho, enzyme_name, complex_name, s_min)
    return compose(network, [], [(reaction_id, exp)]), exp


# -- Hill --------------------------------------------------------------------

def derive_hill_params(j: float, K1: float, s1: float, s2: float) -> HillDerivation:
    """Sequential-dimer constants with half-saturation ``j``.

    ``K1 = k2/k1`` is the dimer dissociation constant; ``s1`` and ``s2`` are
    the association speeds of the two binding steps.
    """
    for name, v in (("J", j), ("K1", K1), ("s1", s1), ("s2", s2)):
        if not v > 0:
            raise DomainError(f"{name} must be positive, got {v!r}")
    return HillDerivation(j, s1, s1 * K1, s2, s2 * (j * j / K1))


def hill_expansion(network: ReactionNetwork, reaction_id: str, derivation: HillDerivation,
                   names: dict | None = None, g_tot: int = 1) -> TemplateExpansion:
    r = network.reaction(reaction_id)
    law = r.rate_law
    if not isinstance(law, Hill):
        raise RateLawTypeError(f"reaction {reaction_id!r} is not a Hill reaction")
    if law.n != 2:
        raise UnsupportedOrderError(
            f"reaction {reaction_id!r}: only n = 2 (sequential dimer binding) can be unpacked, "
            f"got n = {law.n}")
    tf = r.substrate
    if tf is None:
        raise RateLawTypeError(f"reaction {reaction_id!r} needs a single regulator molecule")
    names = dict(names or {})
    ids = set(network.species_ids)
    renamed: dict = {}
    dimer = _fresh(ids, names.get("dimer", f"{tf}2"), reaction_id, "dimer" in names, renamed)
    gene = names.get("gene", "G")
    existing = {sp.id: sp.initial_count for sp in network.species}
    new_species = [Species(dimer, 0)]
    if gene in existing:
        g_tot = existing[gene]
        if g_tot < 1:
            raise DomainError(f"gene species {gene!r} has no copies")
    else:
        new_species.append(Species(gene, g_tot))
    bound = _fresh(ids | {dimer, gene}, names.get("bound", f"{gene}{dimer}"), reaction_id,
                   "bound" in names, renamed)
    new_species.append(Species(bound, 0))

    out = dict(r.products)
    out[tf] = out.get(tf, 0) - 1
    out = {s: k for s, k in out.items() if k}
    if any(k < 0 for k in out.values()):
        raise RateLawTypeError(f"reaction {reaction_id!r} must leave its regulator unchanged")
    out[bound] = out.get(bound, 0) + 1
    kms = law.kms / g_tot
    d = derivation
    pfx = reaction_id
    p = {f"{pfx}_k1": d.k1, f"{pfx}_k2": d.k2, f"{pfx}_k3": d.k3, f"{pfx}_k4": d.k4,
         f"{pfx}_c1": 2.0 * d.k1, f"{pfx}_kms": kms}
    reactions = (
        Reaction(f"{pfx}_dimerize", {tf: 2}, {dimer: 1}, MassAction(2.0 * d.k1, f"{pfx}_c1")),
        Reaction(f"{pfx}_dissociate", {dimer: 1}, {tf: 2}, MassAction(d.k2, f"{pfx}_k2")),
        Reaction(f"{pfx}_bind", {dimer: 1, gene: 1}, {bound: 1}, MassAction(d.k3, f"{pfx}_k3")),
        Reaction(f"{pfx}_unbind", {bound: 1}, {dimer: 1, gene: 1}, MassAction(d.k4, f"{pfx}_k4")),
        Reaction(f"{pfx}_express", {bound: 1}, out, MassAction(kms, f"{pfx}_kms")),
    )
    j_scheme = d.j_identity
    checks = (
        AssumptionCheck("J identity", math.isclose(j_scheme, law.j, rel_tol=0.01),
                        f"sqrt(k2 k4 / (k1 k3)) = {j_scheme:.6g}, J = {law.j:.6g}"),
        AssumptionCheck("positive cooperativity", d.positive_cooperativity,
                        f"K1 = {d.K1:.6g}, K2 = {d.K2:.6g}; need K1 >= {COOPERATIVITY_RATIO:g} K2"),
    )
    return TemplateExpansion(
        reaction_id, "hill", tuple(new_species), reactions, p,
        Conservation({gene: 1, bound: 1}, int(g_tot), f"{gene}_total"),
        {"J": law.j, "kms": law.kms, "k1": d.k1, "k2": d.k2, "k3": d.k3, "k4": d.k4,
         "K1": d.K1, "K2": d.K2, "dimerization_c": 2.0 * d.k1, "G_tot": g_tot},
        checks, renamed)


def unpack_hill(network: ReactionNetwork, reaction_id: str, derivation: HillDerivation,
                names: dict | None = None, g_tot: int = 1):
    """Replace a dimer Hill reaction by the five-step binding scheme.

    Returns ``(network, expansion)``.
    """
    exp = hill_expansion(network, reaction_id, derivation, names, g_tot)
    return compose(network, [], [(reaction_id, exp)]), exp


# -- composition -------------------------------------------------------------

def compose(base: ReactionNetwork, parts=(), substitutions=()) -> ReactionNetwork:
    """Merge ``parts`` into ``base`` and apply template substitutions.

    Species shared by name are identified (first declaration wins for the
    initial count, with a CompositionWarning).  Parameters must agree.
    Conservations that a substitution breaks (e.g. ``TF + C`` once C can
    hide inside an enzyme complex) are dropped with a CompositionWarning.
    ``substitutions`` is a mapping or list of ``(reaction_id, expansion)``.
    """
    if isinstance(substitutions, dict):
        substitutions = list(substitutions.items())
    species: dict[str, Species] = {}
    params: dict[str, float] = {}
    reactions: dict[str, Reaction] = {}
    conservations: list[Conservation] = []

    def add_species(sp: Species, origin: str):
        have = species.get(sp.id)
        if have is None:
            species[sp.id] = sp
        elif have.initial_count != sp.initial_count:
            warnings.warn(
                f"species {sp.id!r}: initial count {sp.initial_count} from {origin} ignored, "
                f"keeping {have.initial_count}", CompositionWarning, stacklevel=3)

    def add_params(p, origin: str):
        for k, v in p.items():
            if k in params and params[k] != v:
                raise CompositionError(
                    f"parameter {k!r} has conflicting values {params[k]!r} and {v!r} ({origin})")
            params[k] = v

    def add_reaction(r: Reaction, origin: str):
        have = reactions.get(r.id)
        if have is not None and have != r:
            raise CompositionError(f"reaction {r.id!r} defined differently in {origin}")
        reactions[r.id] = r

    def add_conservation(c: Conservation):
        if c not in conservations:
            conservations.append(c)

    for net in (base, *parts):
        for sp in net.species:
            add_species(sp, net.name)
        add_params(net.parameters, net.name)
        for r in net.reactions:
            add_reaction(r, net.name)
        for c in net.conservations:
            add_conservation(c)

    for rid, exp in substitutions:
        if rid not in reactions:
            raise CompositionError(f"substitution target {rid!r} does not exist")
        del reactions[rid]
        for sp in exp.introduced_species:
            add_species(sp, f"expansion of {rid}")
        add_params(exp.parameters, f"expansion of {rid}")
        for r in exp.introduced_reactions:
            add_reaction(r, f"expansion of {rid}")
        if exp.conservation is not None:
            add_conservation(exp.conservation)

    out = ReactionNetwork(base.name, tuple(species.values()), tuple(reactions.values()),
                          params, tuple(conservations))
    if substitutions:
        # sums that the new elementary steps no longer preserve are dropped
        drifting = {f.subject for f in validate_network(out).warnings
                    if f.code == "conservation-broken"}
        kept = tuple(c for c in conservations if c.label() not in drifting)
        if len(kept) < len(conservations):
            warnings.warn("dropped conservation(s) broken by substitution: "
                          + ", ".join(sorted(drifting)), CompositionWarning, stacklevel=2)
            out = replace(out, conservations=kept)
    broken = [f for f in validate_network(out).errors if f.code == "conservation"]
    if broken:
        raise CompositionError("; ".join(f"{f.subject}: {f.message}" for f in broken))
    return out


def rename_network(network: ReactionNetwork, name: str) -> ReactionNetwork:
    return replace(network, name=name)
