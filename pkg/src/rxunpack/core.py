"""Reaction-network data model.

Everything here works in molecule counts.  Concentrations only enter or
leave through :func:`convert_units`.  Networks, reactions and rate laws
are immutable once built; use :func:`dataclasses.replace` or the
``with_*`` helpers to derive modified copies.
"""
from __future__ import annotations

import hashlib
import json
import math
from collections import Counter
from dataclasses import dataclass, field, replace
from types import MappingProxyType
from typing import Iterable, Mapping, Union

from .errors import DomainError, FiringError, InvalidStateError

AVOGADRO = 6.02214076e23
MAX_COUNT = 2**63 - 1

UNIT_ROLES = ("concentration", "unimolecular-rate", "bimolecular-rate", "zeroth-order-rate")


# -- rate laws ---------------------------------------------------------------

@dataclass(frozen=True)
class MassAction:
    """Elementary law with stochastic constant ``c``.

    Units of ``c`` follow the reaction order: #/min for order 0, 1/min for
    order 1 and 1/(min #) for order 2.
    """
    c: float
    c_name: str | None = None


@dataclass(frozen=True)
class MichaelisMenten:
    """Packed enzymatic law ``vmax * S / (km + S)`` on the single reactant."""
    vmax: float
    km: float
    vmax_name: str | None = None
    km_name: str | None = None


@dataclass(frozen=True)
class Hill:
    """Packed cooperative law ``kms * X**n / (j**n + X**n)`` on the regulator."""
    kms: float
    j: float
    n: int = 2
    kms_name: str | None = None
    j_name: str | None = None
    n_name: str | None = None


@dataclass(frozen=True)
class Immediate:
    """Zero-delay follow-up: fires as soon as its single reactant appears."""


RateLaw = Union[MassAction, MichaelisMenten, Hill, Immediate]
COMPOUND_LAWS = (MichaelisMenten, Hill)


def _as_multiset(spec) -> tuple[tuple[str, int], ...]:
    if spec is None:
        return ()
    if isinstance(spec, str):
        spec = [spec]
    if isinstance(spec, Mapping):
        items = spec.items()
    else:
        spec = list(spec)
        if spec and all(isinstance(s, tuple) for s in spec):
            items = spec
        else:
            items = Counter(spec).items()
    merged: dict[str, int] = {}
    for name, k in items:
        k = int(k)
        if k < 0:
            raise ValueError(f"negative stoichiometry for {name!r}")
        if k:
            merged[name] = merged.get(name, 0) + k
    return tuple(merged.items())


@dataclass(frozen=True)
class Species:
    id: str
    initial_count: int = 0

    def __post_init__(self):
        if int(self.initial_count) != self.initial_count or self.initial_count < 0:
            raise InvalidStateError(
                f"species {self.id!r}: initial count must be a non-negative integer, "
                f"got {self.initial_count!r}")
        object.__setattr__(self, "initial_count", int(self.initial_count))


@dataclass(frozen=True)
class Reaction:
    """One reaction channel.

    ``reactants`` and ``products`` accept a mapping ``{species: k}``, a list of
    names (repeats count) or ``(name, k)`` pairs; they are normalised to a
    tuple of pairs.
    """
    id: str
    reactants: tuple[tuple[str, int], ...]
    products: tuple[tuple[str, int], ...]
    rate_law: RateLaw

    def __post_init__(self):
        object.__setattr__(self, "reactants", _as_multiset(self.reactants))
        object.__setattr__(self, "products", _as_multiset(self.products))

    @property
    def order(self) -> int:
        return sum(k for _, k in self.reactants)

    @property
    def species(self) -> set[str]:
        return {s for s, _ in self.reactants} | {s for s, _ in self.products}

    @property
    def change(self) -> dict[str, int]:
        """Net stoichiometric change, zero entries dropped."""
        delta: dict[str, int] = {}
        for s, k in self.reactants:
            delta[s] = delta.get(s, 0) - k
        for s, k in self.products:
            delta[s] = delta.get(s, 0) + k
        return {s: d for s, d in delta.items() if d}

    @property
    def substrate(self) -> str | None:
        """Species a compound or immediate law is evaluated on."""
        if len(self.reactants) == 1 and self.reactants[0][1] == 1:
            return self.reactants[0][0]
        return None


@dataclass(frozen=True)
class Conservation:
    """Annotation ``sum(coef * count) == total``."""
    coefficients: tuple[tuple[str, int], ...]
    total: int
    name: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "coefficients", _as_multiset(self.coefficients))

    def value(self, counts: Mapping[str, float]) -> float:
        return sum(k * counts.get(s, 0) for s, k in self.coefficients)

    def label(self) -> str:
        return " + ".join(s if k == 1 else f"{k}*{s}" for s, k in self.coefficients)


@dataclass(frozen=True)
class SystemState:
    time: float
    counts: Mapping[str, int]

    def __post_init__(self):
        object.__setattr__(self, "counts", MappingProxyType(dict(self.counts)))

    def __getitem__(self, species: str) -> int:
        return self.counts[species]


@dataclass(frozen=True)
class ReactionNetwork:
    name: str
    species: tuple[Species, ...]
    reactions: tuple[Reaction, ...]
    parameters: Mapping[str, float] = field(default_factory=dict)
    conservations: tuple[Conservation, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "species", tuple(self.species))
        object.__setattr__(self, "reactions", tuple(self.reactions))
        object.__setattr__(self, "conservations", tuple(self.conservations))
        object.__setattr__(self, "parameters", MappingProxyType(dict(self.parameters)))

    @property
    def species_ids(self) -> list[str]:
        return [s.id for s in self.species]

    @property
    def reaction_ids(self) -> list[str]:
        return [r.id for r in self.reactions]

    def species_index(self) -> dict[str, int]:
        return {s.id: i for i, s in enumerate(self.species)}

    def reaction(self, rid: str) -> Reaction:
        for r in self.reactions:
            if r.id == rid:
                return r
        raise KeyError(rid)

    def initial_state(self) -> SystemState:
        return SystemState(0.0, {s.id: s.initial_count for s in self.species})

    def with_initial(self, **counts: int) -> "ReactionNetwork":
        unknown = set(counts) - set(self.species_ids)
        if unknown:
            raise KeyError(f"unknown species: {sorted(unknown)}")
        species = tuple(replace(s, initial_count=counts.get(s.id, s.initial_count))
                        for s in self.species)
        conservations = []
        init = {s.id: s.initial_count for s in species}
        for c in self.conservations:
            if any(s in counts for s, _ in c.coefficients):
                c = replace(c, total=int(c.value(init)))
            conservations.append(c)
        return replace(self, species=species, conservations=tuple(conservations))

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "species": [[s.id, s.initial_count] for s in self.species],
            "parameters": {k: float(v) for k, v in self.parameters.items()},
            "reactions": [
                {"id": r.id, "reactants": [list(p) for p in r.reactants],
                 "products": [list(p) for p in r.products],
                 "law": type(r.rate_law).__name__,
                 "args": _law_args(r.rate_law)}
                for r in self.reactions],
            "conservations": [[[list(p) for p in c.coefficients], c.total]
                              for c in self.conservations],
        }

    def fingerprint(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def _law_args(law: RateLaw) -> list[float]:
    if isinstance(law, MassAction):
        return [law.c]
    if isinstance(law, MichaelisMenten):
        return [law.vmax, law.km]
    if isinstance(law, Hill):
        return [law.kms, law.j, law.n]
    return []


# -- operations --------------------------------------------------------------

def _counts_of(state) -> Mapping[str, int]:
    return state.counts if isinstance(state, SystemState) else state


def propensity(reaction: Reaction, state: SystemState | Mapping[str, int]) -> float:
    """Stochastic propensity of ``reaction`` in ``state``.

    Homodimerisation ``2X -> ...`` uses ``c * x * (x - 1) / 2``.
    Immediate reactions report 0; they are resolved by the simulators.
    """
    counts = _counts_of(state)
    for s, _ in reaction.reactants:
        x = counts[s]
        if x < 0:
            raise InvalidStateError(f"negative count for {s!r}: {x}")
    law = reaction.rate_law
    if isinstance(law, MassAction):
        a = law.c
        for s, k in reaction.reactants:
            x = counts[s]
            if k == 1:
                a *= x
            elif k == 2:
                a *= x * (x - 1) / 2.0
            else:
                a *= math.comb(x, k)
        return a
    if isinstance(law, MichaelisMenten):
        x = counts[reaction.substrate]
        return law.vmax * x / (law.km + x)
    if isinstance(law, Hill):
        x = float(counts[reaction.substrate])
        xn = x**law.n
        return law.kms * xn / (law.j**law.n + xn)
    return 0.0


def apply_reaction(state: SystemState, reaction: Reaction) -> SystemState:
    counts = dict(state.counts)
    for s, d in reaction.change.items():
        new = counts.get(s, 0) + d
        if new < 0:
            raise FiringError(
                f"reaction {reaction.id!r} would drive {s!r} negative ({new})")
        if new > MAX_COUNT:
            raise OverflowError(f"count of {s!r} exceeds 64-bit range")
        counts[s] = new
    return SystemState(state.time, counts)


def compute_alpha(volume: float) -> float:
    """Concentration-to-count factor ``1 / (N_A * 1e-6 * V)`` for V in litres."""
    if not volume > 0:
        raise DomainError(f"volume must be positive, got {volume!r}")
    return 1.0 / (AVOGADRO * 1e-6 * volume)


def convert_units(value: float, role: str, alpha: float, direction: str = "to_counts") -> float:
    """Convert between micromolar-based units and molecule counts.

    >>> round(convert_units(0.5, "concentration", 0.00167), 1)
    299.4
    """
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha!r}")
    if role not in UNIT_ROLES:
        raise ValueError(f"unknown unit role {role!r}")
    if direction not in ("to_counts", "to_concentration"):
        raise ValueError(f"unknown direction {direction!r}")
    if role == "unimolecular-rate":
        return value
    divide = role in ("concentration", "zeroth-order-rate")
    if direction == "to_concentration":
        divide = not divide
    return value / alpha if divide else value * alpha


# -- validation --------------------------------------------------------------

@dataclass(frozen=True)
class Finding:
    severity: str  # "error" or "warning"
    code: str
    subject: str
    message: str


@dataclass
class ValidationReport:
    findings: list[Finding] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    @property
    def errors(self) -> list[Finding]:
        return [f for f in self.findings if f.severity == "error"]

    @property
    def warnings(self) -> list[Finding]:
        return [f for f in self.findings if f.severity == "warning"]

    def __bool__(self) -> bool:
        return bool(self.findings)

    def __str__(self) -> str:
        return "\n".join(f"{f.severity}: [{f.code}] {f.subject}: {f.message}"
                         for f in self.findings) or "ok"


def _constants(law: RateLaw) -> Iterable[tuple[str, float]]:
    if isinstance(law, MassAction):
        yield "c", law.c
    elif isinstance(law, MichaelisMenten):
        yield "vmax", law.vmax
        yield "Km", law.km
    elif isinstance(law, Hill):
        yield "kms", law.kms
        yield "J", law.j


def validate_network(network: ReactionNetwork) -> ValidationReport:
    """Collect structural problems; never raises."""
    report = ValidationReport()
    add = lambda sev, code, subj, msg: report.findings.append(Finding(sev, code, subj, msg))

    ids = network.species_ids
    known = set(ids)
    for sid, n in Counter(ids).items():
        if n > 1:
            add("error", "duplicate-species", sid, f"declared {n} times")
    for rid, n in Counter(network.reaction_ids).items():
        if n > 1:
            add("error", "duplicate-reaction", rid, f"declared {n} times")
    for name, v in network.parameters.items():
        if not math.isfinite(v) or v < 0:
            add("error", "negative-constant", name, f"parameter value {v!r}")

    for r in network.reactions:
        missing = sorted(r.species - known)
        if missing:
            add("error", "unknown-species", r.id,
                f"reaction {r.id!r} references undeclared species {missing}")
        law = r.rate_law
        for label, v in _constants(law):
            if not math.isfinite(v) or v < 0:
                add("error", "negative-constant", r.id, f"{label} = {v!r}")
        if isinstance(law, MassAction) and r.order > 2:
            add("error", "arity", r.id, f"mass-action order {r.order} > 2")
        if isinstance(law, (MichaelisMenten, Hill, Immediate)):
            if r.substrate is None:
                add("error", "missing-substrate", r.id,
                    f"{type(law).__name__} law needs exactly one reactant molecule")
        if isinstance(law, MichaelisMenten) and not law.km > 0:
            add("error", "domain", r.id, "Km must be > 0")
        if isinstance(law, Hill):
            if not law.j > 0:
                add("error", "domain", r.id, "J must be > 0")
            if int(law.n) != law.n or law.n < 1:
                add("error", "domain", r.id, f"Hill order must be a positive integer, got {law.n}")

    init = {s.id: s.initial_count for s in network.species}
    for c in network.conservations:
        missing = sorted({s for s, _ in c.coefficients} - known)
        if missing:
            add("error", "unknown-species", c.label(), f"conservation references {missing}")
            continue
        value = c.value(init)
        if value != c.total:
            add("error", "conservation", c.label(),
                f"initial value {value} differs from declared total {c.total}")
        for r in network.reactions:
            if isinstance(r.rate_law, Immediate):
                continue
            drift = sum(k * r.change.get(s, 0) for s, k in c.coefficients)
            if drift and not _folded_away(network, r, c):
                add("warning", "conservation-broken", c.label(),
                    f"reaction {r.id!r} changes the conserved sum by {drift}")
    return report


def _folded_away(network: ReactionNetwork, reaction: Reaction, cons: Conservation) -> bool:
    # immediate follow-ups may restore the balance
    from .sim.compile import effective_change
    try:
        delta = effective_change(network, reaction)
    except Exception:
        return False
    return sum(k * delta.get(s, 0) for s, k in cons.coefficients) == 0
