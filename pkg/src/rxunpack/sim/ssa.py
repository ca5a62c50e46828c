"""Gillespie direct-method simulation and seeded ensembles."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..core import Immediate, ReactionNetwork, SystemState, propensity, validate_network
from ..errors import InvalidStateError, NumericalError, RxError
from . import kernels
from .compile import CompiledNetwork, compile_network

RNG_NAME = "numpy.PCG64 streams from SeedSequence(seed, spawn_key=(replicate,))"

_REASONS = {
    kernels.REACHED_T_END: "reached-t_end",
    kernels.EXHAUSTED: "exhausted",
    kernels.EVENT_LIMIT: "event-limit",
}


@dataclass(frozen=True)
class SsaConfig:
    t_end: float
    seed: int = 0
    recording: str = "grid"  # "grid" or "every-event"
    dt: float = 1.0
    max_events: int = 10**8

    def __post_init__(self):
        if not self.t_end > 0:
            raise ValueError(f"t_end must be positive, got {self.t_end!r}")
        if self.recording not in ("grid", "every-event"):
            raise ValueError(f"unknown recording mode {self.recording!r}")
        if self.recording == "grid" and not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt!r}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")

    def grid(self) -> np.ndarray:
        n = int(math.floor(self.t_end / self.dt + 1e-9)) + 1
        return np.arange(n) * self.dt

    def to_dict(self) -> dict:
        return {"t_end": self.t_end, "seed": self.seed, "recording": self.recording,
                "dt": self.dt, "max_events": self.max_events}


@dataclass
class Trajectory:
    times: np.ndarray
    counts: np.ndarray  # (n_samples, n_species)
    species: tuple[str, ...]
    terminated: str = "reached-t_end"
    n_events: int = 0

    def __getitem__(self, species: str) -> np.ndarray:
        return self.counts[:, self.species.index(species)]

    def __len__(self) -> int:
        return len(self.times)

    def state(self, i: int) -> SystemState:
        return SystemState(float(self.times[i]), dict(zip(self.species, self.counts[i].tolist())))


@dataclass
class Ensemble:
    times: np.ndarray
    data: np.ndarray  # (n_runs, n_samples, n_species)
    species: tuple[str, ...]
    fingerprint: str
    seed: int
    terminated: list[str] = field(default_factory=list)
    n_events: list[int] = field(default_factory=list)
    rng: str = RNG_NAME

    @property
    def n_runs(self) -> int:
        return self.data.shape[0]

    def __getitem__(self, species: str) -> np.ndarray:
        return self.data[:, :, self.species.index(species)]

    def replicate(self, i: int) -> Trajectory:
        return Trajectory(self.times, self.data[i], self.species, self.terminated[i],
                          self.n_events[i])


def replicate_rng(seed: int, replicate: int) -> np.random.Generator:
    """Independent stream for one replicate; order of execution is irrelevant."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(replicate,))))


def ssa_step(state: SystemState, network: ReactionNetwork, rng: np.random.Generator):
    """One direct-method step: ``(tau, reaction index)`` or ``None`` when exhausted.

    The index refers to ``network.reactions``.  Immediate reactions never
    compete here; the simulators apply them as zero-delay follow-ups.
    """
    rates = []
    for i, r in enumerate(network.reactions):
        if isinstance(r.rate_law, Immediate):
            continue
        a = propensity(r, state)
        if not (a >= 0.0) or math.isinf(a):
            raise NumericalError(f"invalid propensity {a!r} for reaction {r.id!r}")
        if a > 0:
            rates.append((i, a))
    a0 = sum(a for _, a in rates)
    if a0 == 0.0:
        return None
    tau = -math.log(1.0 - rng.random()) / a0
    target = rng.random() * a0
    acc = 0.0
    for i, a in rates:
        acc += a
        if acc > target:
            return tau, i
    return tau, rates[-1][0]


def _check(network: ReactionNetwork):
    report = validate_network(network)
    if not report.ok:
        raise RxError(f"network {network.name!r} is invalid:\n{report}")


def _run_compiled(cn: CompiledNetwork, config: SsaConfig, rng) -> Trajectory:
    if config.recording == "grid":
        grid = config.grid()
        out = np.empty((len(grid), len(cn.species)), np.int64)
        status, rows, events, bad = kernels.ssa_grid(
            cn.x0, cn.kind, cn.sp1, cn.sp2, cn.par, cn.change, grid,
            config.max_events, rng, out)
        times, counts = grid[:rows], out[:rows]
    else:
        status, times, counts, bad = kernels.ssa_events(
            cn.x0, cn.kind, cn.sp1, cn.sp2, cn.par, cn.change, config.t_end,
            config.max_events, rng)
        events = len(times) - 1
    if status == kernels.BAD_PROPENSITY:
        raise NumericalError(f"invalid propensity for reaction {cn.reaction_ids[bad]!r}")
    return Trajectory(times, counts, cn.species, _REASONS[status], int(events))


def simulate_ssa(network: ReactionNetwork, config: SsaConfig, replicate: int = 0) -> Trajectory:
    """Single SSA trajectory; bit-identical for identical (network, config, replicate)."""
    _check(network)
    cn = compile_network(network)
    if (cn.x0 < 0).any():
        raise InvalidStateError("negative initial count")
    return _run_compiled(cn, config, replicate_rng(config.seed, replicate))


def run_ensemble(network: ReactionNetwork, config: SsaConfig, n_runs: int,
                 workers: int = 1) -> Ensemble:
    """``n_runs`` replicates on the config grid.

    Replicate ``i`` always draws from stream ``i`` of the base seed, so the
    result does not depend on ``workers``.  Runs truncated by the event
    limit are padded with their last recorded state.
    """
    if n_runs < 1:
        raise ValueError("n_runs must be >= 1")
    if config.recording != "grid":
        raise ValueError("ensembles need fixed-grid recording")
    _check(network)
    cn = compile_network(network)
    grid = config.grid()

    def one(i):
        return _run_compiled(cn, config, replicate_rng(config.seed, i))

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            trajs = list(pool.map(one, range(n_runs)))
    else:
        trajs = [one(i) for i in range(n_runs)]
    data = np.empty((n_runs, len(grid), len(cn.species)), np.int64)
    for i, tr in enumerate(trajs):
        rows = len(tr.times)
        data[i, :rows] = tr.counts
        if rows < len(grid):
            data[i, rows:] = tr.counts[-1]
    return Ensemble(grid, data, cn.species, network.fingerprint(), config.seed,
                    [t.terminated for t in trajs], [t.n_events for t in trajs])
