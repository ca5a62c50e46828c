"""Built-in benchmark networks in packed and unpacked form.

* ``build_mm_model``: single-enzyme substrate turnover ``S -> P``.
* ``build_hill_model``: dimer-activated transcription ``TF -> TF + M``.
* ``build_clock_model``: a transcription/translation negative-feedback
  oscillator whose clock-protein dimer sequesters the activator.

The clock parameters shipped as ``ClockParams()`` defaults were calibrated
against the packed ODE to a 1440 min period (see
``demos/calibrate_clock.py``); they are derived values, not measured ones.
"""
from __future__ import annotations

import warnings
from dataclasses import asdict, dataclass, fields

from .core import (Conservation, Hill, Immediate, MassAction, MichaelisMenten, Reaction,
                   ReactionNetwork, Species)
from .errors import DomainError
from .templates import (DEFAULT_RHO, CompositionWarning, HillDerivation, derive_hill_params,
                        rename_network as rename, unpack_hill, unpack_mm)

# -- Michaelis-Menten ---------------------------------------------------------


def build_mm_model(vmax: float = 60.0, Km: float = 300.0, Etot: int = 60, S0: int = 599,
                   packed: bool = True, rho: float = DEFAULT_RHO,
                   E0: int | None = None) -> ReactionNetwork:
    """``S -> P`` at ``vmax S / (Km + S)``; unpacked adds E and ES with E + ES = Etot.

    ``E0`` overrides the enzyme copies of the unpacked form while keeping the
    elementary constants derived at ``Etot``; ``E0 = 600`` with ``S0 = 60``
    is the excess-enzyme case where the compound law no longer applies.
    """
    for name, v in (("vmax", vmax), ("Km", Km)):
        if not v > 0:
            raise DomainError(f"{name} must be positive, got {v!r}")
    net = ReactionNetwork(
        "mm_packed",
        [Species("S", int(S0)), Species("P", 0)],
        [Reaction("turnover", {"S": 1}, {"P": 1}, MichaelisMenten(vmax, Km, "vmax", "Km"))],
        {"vmax": vmax, "Km": Km},
    )
    if packed:
        return net
    out, _ = unpack_mm(net, "turnover", int(Etot), rho, s_min=max(int(S0), 1))
    if E0 is not None:
        out = out.with_initial(E=int(E0))
    return ReactionNetwork("mm_unpacked", out.species, out.reactions, out.parameters,
                           out.conservations)


# -- Hill ------------------------------------------------------------------------

HILL_ALPHA = 0.00167
HILL_J = 599.0
HILL_KMS = 1.0

# (k1/alpha, k2, k3/alpha, k4) per parameter set; set 6 uses k1 = 100 alpha so
# that its dissociation constants (K1 = 0.01/alpha, K2 = 100/alpha) satisfy
# J**2 = K1 K2 like every other set.
HILL_SETS = {
    1: (1.0, 10.0, 1000.0, 100.0),
    2: (1.0, 100.0, 1000.0, 10.0),
    3: (10.0, 1000.0, 100.0, 1.0),
    4: (100.0, 1000.0, 10.0, 1.0),
    5: (10.0, 1.0, 100.0, 1000.0),
    6: (100.0, 1.0, 10.0, 1000.0),
    7: (1000.0, 100.0, 1.0, 10.0),
    8: (1000.0, 10.0, 1.0, 100.0),
}


def hill_set_rates(set_id: int, alpha: float = HILL_ALPHA) -> tuple[float, float, float, float]:
    """Elementary constants ``(k1, k2, k3, k4)`` of a numbered binding set."""
    try:
        a1, k2, a3, k4 = HILL_SETS[set_id]
    except KeyError:
        raise KeyError(f"unknown Hill parameter set {set_id!r}; choose 0-8") from None
    return a1 * alpha, k2, a3 * alpha, k4


def hill_set_derivation(set_id: int, alpha: float = HILL_ALPHA) -> HillDerivation:
    """Re-derive a set from ``(J = 1/alpha, K1, s1, s2)``."""
    k1, k2, k3, _ = hill_set_rates(set_id, alpha)
    return derive_hill_params(1.0 / alpha, k2 / k1, k1, k3)


def build_hill_model(set_id: int | None = 0, TF0: int = 599, packed: bool | None = None,
                     params=None, kms: float = HILL_KMS) -> ReactionNetwork:
    """Transcription of M activated by TF.

    ``set_id`` 0 is the compound law ``hill(kms, 599, 2)``; sets 1-8 are
    elementary binding schemes.  ``params`` may instead give ``(k1, k2, k3, k4)``
    or a ``HillDerivation``.  ``packed`` defaults to ``set_id == 0``.
    """
    if params is None and set_id not in (0, *HILL_SETS):
        raise KeyError(f"unknown Hill parameter set {set_id!r}; choose 0-8")
    if packed is None:
        packed = params is None and set_id == 0
    net = ReactionNetwork(
        "hill_packed",
        [Species("TF", int(TF0)), Species("M", 0)],
        [Reaction("transcription", {"TF": 1}, {"TF": 1, "M": 1},
                  Hill(kms, HILL_J, 2, "kms", "J"))],
        {"kms": kms, "J": HILL_J},
    )
    if packed:
        return net
    if params is None:
        if set_id == 0:
            raise KeyError("set 0 is the compound law; pick a set 1-8 to unpack")
        d = HillDerivation.from_rates(*hill_set_rates(set_id))
        name = f"hill_set{set_id}"
    else:
        d = params if isinstance(params, HillDerivation) else HillDerivation.from_rates(*params)
        name = "hill_unpacked"
    out, _ = unpack_hill(net, "transcription", d)
    return ReactionNetwork(name, out.species, out.reactions, out.parameters, out.conservations)


# -- circadian clock -------------------------------------------------------------


@dataclass(frozen=True)
class ClockParams:
    """Clock constants in concentration units (uM, min).

    ``alpha`` converts them to molecule counts.  ``kd_f`` and ``ki_f`` are
    deterministic coefficients: ``d[CP2]/dt = kd_f CP**2 - ...``.  The
    ``*_0`` fields are a state on the limit cycle.  ``E_*``, ``rho``, ``K1``,
    ``k_dimer_off`` and ``k_gene_off`` only affect the unpacked variant.

    Defaults are DERIVED by ``demos/calibrate_clock.py``.
    """
    # transcription
    kms: float = 0.0416656
    J: float = 0.24685
    n: int = 2
    # translation
    kt: float = 0.00355184
    # CP dimerisation
    kd_f: float = 0.00680724
    kd_b: float = 0.0340181
    # CP2 + TF inactive complex
    ki_f: float = 0.0332834
    ki_b: float = 9.91657e-05
    # enzymatic degradation
    vmax_M: float = 0.0135015
    Km_M: float = 0.25725
    vmax_CP: float = 0.000737878
    Km_CP: float = 0.00635
    vmax_C: float = 0.00444273
    Km_C: float = 0.04775
    # background degradation
    kdeg_M: float = 2.98563e-05
    kdeg_CP: float = 2.98563e-05
    kdeg_CP2: float = 7.25082e-05
    kdeg_C: float = 0.000150348
    TF_total: float = 0.5
    alpha: float = 0.000167
    # limit-cycle state
    M_0: float = 3.4406
    CP_0: float = 1.81253
    CP2_0: float = 0.512674
    C_0: float = 0.262975
    # unpacking
    E_M: float = 0.0861127
    E_CP: float = 0.167257
    E_C: float = 0.0254363
    rho: float = 2.0
    K1_factor: float = 1000.0
    k_dimer_off: float = 1.0
    k_gene_off: float = 100.0
    G_total: int = 1

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if v < 0:
                raise DomainError(f"{f.name} must be non-negative, got {v!r}")
        if not self.J > 0:
            raise DomainError("J must be positive")
        if not self.alpha > 0:
            raise DomainError("alpha must be positive")

    def to_dict(self) -> dict:
        return asdict(self)

    def counts(self, value: float) -> int:
        """Concentration to whole molecules at this ``alpha``."""
        return int(round(value / self.alpha))


CLOCK_SUBSTRATES = {"M": "deg_M", "CP": "deg_CP", "C": "deg_C"}
CLOCK_TF_POOL = {"TF": 1, "TF2": 2, "GTF2": 2, "C": 1, "ES_C": 1}


def build_clock_model(params: ClockParams | None = None, packed: bool = True) -> ReactionNetwork:
    """Activator TF drives M; M makes CP; CP2 sequesters TF into C.

    Enzymatic degradations are ``M -> Md``, ``CP -> CPd`` and ``C -> TF + Cd``
    with the marker products removed by immediate reactions.  Degrading C
    frees its TF, so TF + C (+ bound forms) stays constant.
    """
    p = params or ClockParams()
    a = p.alpha
    conc = lambda v: v / a  # noqa: E731
    bimol = lambda v: v * a  # noqa: E731
    tf_total = p.counts(p.TF_total)
    c0 = min(p.counts(p.C_0), tf_total)
    species = [
        Species("TF", tf_total - c0),
        Species("M", p.counts(p.M_0)),
        Species("CP", p.counts(p.CP_0)),
        Species("CP2", p.counts(p.CP2_0)),
        Species("C", c0),
        Species("Md", 0), Species("CPd", 0), Species("Cd", 0),
    ]
    params_c = {
        "kms": conc(p.kms), "J": conc(p.J), "n": float(p.n), "kt": p.kt,
        "cd_f": 2.0 * bimol(p.kd_f), "kd_b": p.kd_b,
        "ki_f": bimol(p.ki_f), "ki_b": p.ki_b,
        "vmax_M": conc(p.vmax_M), "Km_M": conc(p.Km_M),
        "vmax_CP": conc(p.vmax_CP), "Km_CP": conc(p.Km_CP),
        "vmax_C": conc(p.vmax_C), "Km_C": conc(p.Km_C),
        "kdeg_M": p.kdeg_M, "kdeg_CP": p.kdeg_CP, "kdeg_CP2": p.kdeg_CP2, "kdeg_C": p.kdeg_C,
    }
    P = params_c
    ma = lambda k: MassAction(P[k], k)  # noqa: E731
    reactions = [
        Reaction("transcription", {"TF": 1}, {"TF": 1, "M": 1},
                 Hill(P["kms"], P["J"], p.n, "kms", "J", "n")),
        Reaction("translation", {"M": 1}, {"M": 1, "CP": 1}, ma("kt")),
        Reaction("dimerize", {"CP": 2}, {"CP2": 1}, ma("cd_f")),
        Reaction("dissociate", {"CP2": 1}, {"CP": 2}, ma("kd_b")),
        Reaction("sequester", {"CP2": 1, "TF": 1}, {"C": 1}, ma("ki_f")),
        Reaction("release", {"C": 1}, {"CP2": 1, "TF": 1}, ma("ki_b")),
        Reaction("deg_M", {"M": 1}, {"Md": 1},
                 MichaelisMenten(P["vmax_M"], P["Km_M"], "vmax_M", "Km_M")),
        Reaction("deg_CP", {"CP": 1}, {"CPd": 1},
                 MichaelisMenten(P["vmax_CP"], P["Km_CP"], "vmax_CP", "Km_CP")),
        Reaction("deg_C", {"C": 1}, {"TF": 1, "Cd": 1},
                 MichaelisMenten(P["vmax_C"], P["Km_C"], "vmax_C", "Km_C")),
        Reaction("decay_M", {"M": 1}, {}, ma("kdeg_M")),
        Reaction("decay_CP", {"CP": 1}, {}, ma("kdeg_CP")),
        Reaction("decay_CP2", {"CP2": 1}, {}, ma("kdeg_CP2")),
        Reaction("decay_C", {"C": 1}, {"TF": 1}, ma("kdeg_C")),
        Reaction("clear_Md", {"Md": 1}, {}, Immediate()),
        Reaction("clear_CPd", {"CPd": 1}, {}, Immediate()),
        Reaction("clear_Cd", {"Cd": 1}, {}, Immediate()),
    ]
    net = ReactionNetwork("clock_packed", species, reactions, params_c,
                          [Conservation({"TF": 1, "C": 1}, tf_total, "TF_total")])
    if packed:
        return net
    return unpack_clock(net, p)


def unpack_clock(net: ReactionNetwork, p: ClockParams) -> ReactionNetwork:
    """Apply the three enzyme expansions and the dimer-binding expansion."""
    with warnings.catch_warnings():
        # TF + C stops being invariant; the widened sum is re-declared below
        warnings.simplefilter("ignore", CompositionWarning)
        for s, rid in CLOCK_SUBSTRATES.items():
            net, _ = unpack_mm(net, rid, clock_enzyme_total(p, s), p.rho,
                               enzyme_name=f"E_{s}", complex_name=f"ES_{s}")
        net, _ = unpack_hill(net, "transcription", clock_hill_derivation(p), g_tot=p.G_total)
    init = {sp.id: sp.initial_count for sp in net.species}
    tf = CLOCK_TF_POOL
    cons = (*net.conservations,
            Conservation(tf, sum(k * init[s] for s, k in tf.items()), "TF_total"))
    return ReactionNetwork("clock_unpacked", net.species, net.reactions, net.parameters, cons)


def clock_enzyme_total(p: ClockParams, substrate: str) -> int:
    return max(1, p.counts(getattr(p, f"E_{substrate}")))


def clock_hill_derivation(p: ClockParams) -> HillDerivation:
    """Dimer binding with ``K1 = K1_factor J`` and the requested off-rates."""
    j = p.J / p.alpha
    K1 = p.K1_factor * j
    return derive_hill_params(j, K1, p.k_dimer_off / K1, p.k_gene_off / (j * j / K1))


# -- bundled .rxn corpus -----------------------------------------------------------

def _flat(net: ReactionNetwork, header: str, alpha: float | None = None) -> str:
    from .modeldsl import document_from_network, serialize_model
    return header + serialize_model(document_from_network(net, alpha))


def _opts(**kw) -> str:
    from .modeldsl import _num
    return ", ".join(f"{k}={v if isinstance(v, str) else _num(v)}" for k, v in kw.items())


def _mm_packed_text(name: str, S0: int, Etot: int, note: str) -> str:
    return (f"# {note}\n"
            f"model {name}\n"
            f"species S = {S0}\nspecies P = 0\n"
            "param vmax = 60\nparam Km = 300\n"
            "reaction turnover: S -> P @ mm(vmax, Km)\n"
            f"unpack turnover mm({_opts(Etot=Etot, rho=100)})\n")


def _hill_text(set_id: int) -> str:
    head = ("# Dimer-activated transcription, half-saturation J = 599 molecules.\n"
            f"model hill_set{set_id}\nalpha = {HILL_ALPHA!r}\n"
            "species TF = 599\nspecies M = 0\n"
            f"param kms = {HILL_KMS:g}\nparam J = {HILL_J:g}\n"
            "reaction transcription: TF -> TF + M @ hill(kms, J, 2)\n")
    if set_id == 0:
        return head
    a1, k2, a3, k4 = HILL_SETS[set_id]
    from .modeldsl import _num
    return head + (f"unpack transcription hill(k1={_num(a1)}*alpha, k2={_num(k2)}, "
                   f"k3={_num(a3)}*alpha, k4={_num(k4)})\n")


def _clock_packed_text(p: ClockParams) -> str:
    from .modeldsl import _num, document_from_network, serialize_model
    net = build_clock_model(p, packed=True)
    doc = document_from_network(net)
    lines = serialize_model(doc).splitlines()
    d = clock_hill_derivation(p)
    for s, rid in CLOCK_SUBSTRATES.items():
        lines.append(f"unpack {rid} mm("
                     + _opts(Etot=clock_enzyme_total(p, s), rho=p.rho, enzyme=f"E_{s}",
                             complex=f"ES_{s}") + ")")
    lines.append("unpack transcription hill("
                 + ", ".join(f"{k}={_num(v)}" for k, v in zip(("k1", "k2", "k3", "k4"), d))
                 + f", Gtot={p.G_total})")
    unpacked = build_clock_model(p, packed=False)
    tf = next(c for c in unpacked.conservations if c.name == "TF_total")
    lines.append(f"conserve {tf.label()} = {tf.total}")
    note = (f"# Negative-feedback clock; molecule counts at alpha = {p.alpha:g}.\n"
            "# Constants are DERIVED by demos/calibrate_clock.py (packed ODE period\n"
            "# 1440 min); they are calibration output, not measured values.\n")
    return note + "\n".join(lines) + "\n"


def corpus_texts(clock: ClockParams | None = None) -> dict[str, str]:
    """File name -> canonical source for every bundled model."""
    p = clock or ClockParams()
    out = {
        "mm_packed.rxn": _mm_packed_text(
            "mm_packed", 599, 60, "Michaelis-Menten turnover with scarce enzyme."),
        "mm_unpacked.rxn": _flat(build_mm_model(packed=False),
                                 "# Elementary form of mm_packed.rxn.\n"),
        "mm_excess_enzyme.rxn": _flat(
            rename(build_mm_model(S0=60, E0=600, packed=False), "mm_excess_enzyme"),
            "# mm_unpacked.rxn constants with 600 enzymes and 60 substrates.\n"),
    }
    for k in range(0, 9):
        out[f"hill_set{k}.rxn"] = _hill_text(k)
    out["clock_packed.rxn"] = _clock_packed_text(p)
    out["clock_unpacked.rxn"] = _flat(build_clock_model(p, packed=False),
                                      "# Elementary form of clock_packed.rxn.\n")
    return out


def write_corpus(directory) -> list:
    from pathlib import Path

    from .sim.io import atomic_write
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    return [atomic_write(d / name, text) for name, text in corpus_texts().items()]


BUILTINS = {
    "mm_packed": lambda: build_mm_model(packed=True),
    "mm_unpacked": lambda: build_mm_model(packed=False),
    "mm_excess_enzyme": lambda: rename(build_mm_model(S0=60, E0=600, packed=False),
                                       "mm_excess_enzyme"),
    "hill_packed": lambda: build_hill_model(0),
    **{f"hill_set{k}": (lambda k=k: build_hill_model(k, packed=False)) for k in HILL_SETS},
    "clock_packed": lambda: build_clock_model(packed=True),
    "clock_unpacked": lambda: build_clock_model(packed=False),
}
