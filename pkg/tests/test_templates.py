import math
import warnings

import pytest
from hypothesis import given, strategies as st

from rxunpack.core import (Conservation, Hill, MassAction, MichaelisMenten, Reaction,
                           ReactionNetwork, Species, propensity)
from rxunpack.errors import (AssumptionError, CompositionError, DomainError, NamingError,
                             RateLawTypeError, UnsupportedOrderError)
from rxunpack.models import HILL_ALPHA, HILL_SETS, hill_set_derivation, hill_set_rates
from rxunpack.templates import (CompositionWarning, HillDerivation, compose, derive_hill_params,
                                derive_mm_params, select_enzyme_total, unpack_hill, unpack_mm)


def mm_net(s0=599):
    return ReactionNetwork("mm", [Species("S", s0), Species("P", 0)],
                           [Reaction("r", {"S": 1}, {"P": 1}, MichaelisMenten(60.0, 300.0))],
                           {"vmax": 60.0, "Km": 300.0})


def hill_net():
    return ReactionNetwork("h", [Species("TF", 599), Species("M", 0)],
                           [Reaction("tx", {"TF": 1}, {"TF": 1, "M": 1}, Hill(1.0, 599.0, 2))])


def test_mm_constants_for_scarce_enzyme():
    d = derive_mm_params(60.0, 300.0, 60, 100.0)
    assert (d.k1, d.k2, d.k3) == (1 / 3, 99.0, 1.0)


@given(st.floats(1e-3, 1e4), st.floats(1e-3, 1e4), st.integers(1, 10**4), st.floats(1.001, 1e4))
def test_mm_identities(vmax, km, etot, rho):
    d = derive_mm_params(vmax, km, etot, rho)
    assert math.isclose((d.k2 + d.k3) / d.k1, km, rel_tol=1e-9)
    assert math.isclose(d.k3 * etot, vmax, rel_tol=1e-12)
    assert math.isclose(d.k1 * km / d.k3, rho, rel_tol=1e-12)


def test_mm_rejects_bad_inputs():
    with pytest.raises(AssumptionError):
        derive_mm_params(60, 300, 60, rho=1.0)
    with pytest.raises(DomainError):
        derive_mm_params(60, -1, 60)
    assert select_enzyme_total(599) == 60
    with pytest.raises(AssumptionError):
        select_enzyme_total(599, 1.5)


def test_unpack_mm_structure():
    net, exp = unpack_mm(mm_net(), "r", 60)
    assert [r.id for r in net.reactions] == ["r_bind", "r_unbind", "r_cat"]
    assert net.conservations == (Conservation({"E": 1, "ES": 1}, 60, "E_total"),)
    assert exp.assumptions_hold
    # enzyme recycled by catalysis
    assert net.reaction("r_cat").change == {"ES": -1, "P": 1, "E": 1}


def test_unpack_mm_flags_excess_enzyme():
    _, exp = unpack_mm(mm_net(60), "r", 600)
    failed = [c.name for c in exp.assumption_report if not c.passed]
    assert failed == ["enzyme scarce"]


def test_unpack_mm_naming():
    base = ReactionNetwork("n", [Species("S", 10), Species("P", 0), Species("E", 1)],
                           [Reaction("r", {"S": 1}, {"P": 1}, MichaelisMenten(1.0, 10.0))])
    net, exp = unpack_mm(base, "r", 1)
    assert exp.renamed == {"E": "E_r"} and "E_r" in net.species_ids
    with pytest.raises(NamingError):
        unpack_mm(base, "r", 1, enzyme_name="E")
    with pytest.raises(RateLawTypeError):
        unpack_mm(hill_net(), "tx", 1)


@pytest.mark.parametrize("set_id", sorted(HILL_SETS))
def test_hill_sets_satisfy_identity(set_id):
    k1, k2, k3, k4 = hill_set_rates(set_id)
    assert math.isclose(k2 * k4 / (k1 * k3), HILL_ALPHA ** -2, rel_tol=1e-12)
    d = hill_set_derivation(set_id)
    assert tuple(d) == pytest.approx((k1, k2, k3, k4), rel=1e-12)


@given(st.floats(1, 1e4), st.floats(1e-3, 1e6), st.floats(1e-6, 10), st.floats(1e-6, 10))
def test_hill_derivation_identity(j, K1, s1, s2):
    d = derive_hill_params(j, K1, s1, s2)
    assert math.isclose(d.j_identity, j, rel_tol=1e-9)
    assert math.isclose(d.K1, K1, rel_tol=1e-9)
    assert math.isclose(math.sqrt(d.K1 * d.K2), j, rel_tol=1e-9)


def test_unpack_hill_structure_and_checks():
    d = HillDerivation.from_rates(*hill_set_rates(2))
    net, exp = unpack_hill(hill_net(), "tx", d)
    assert set(net.species_ids) == {"TF", "M", "TF2", "G", "GTF2"}
    assert net.reaction("tx_dimerize").rate_law.c == pytest.approx(2 * d.k1)
    assert net.conservations == (Conservation({"G": 1, "GTF2": 1}, 1, "G_total"),)
    assert exp.assumptions_hold
    _, weak = unpack_hill(hill_net(), "tx", HillDerivation.from_rates(*hill_set_rates(6)))
    assert not dict((c.name, c.passed) for c in weak.assumption_report)["positive cooperativity"]


def test_unpack_hill_rejects_other_orders():
    net = ReactionNetwork("h", [Species("TF", 5), Species("M", 0)],
                          [Reaction("tx", {"TF": 1}, {"TF": 1, "M": 1}, Hill(1.0, 5.0, 3))])
    with pytest.raises(UnsupportedOrderError):
        unpack_hill(net, "tx", derive_hill_params(5.0, 50.0, 1.0, 1.0))


def test_dimer_propensity_matches_binding_constant():
    # c = 2 k1 turns x(x-1)/2 into k1 x(x-1)
    d = derive_hill_params(599.0, 5990.0, 1.0, 1.0)
    net, _ = unpack_hill(hill_net(), "tx", d)
    a = propensity(net.reaction("tx_dimerize"), {"TF": 10})
    assert a == pytest.approx(d.k1 * 10 * 9)


def test_compose_merges_and_checks_conflicts():
    a = ReactionNetwork("a", [Species("X", 1)], [Reaction("r", {"X": 1}, {}, MassAction(1.0))],
                        {"k": 1.0})
    b = ReactionNetwork("b", [Species("X", 2), Species("Y", 0)],
                        [Reaction("s", {"Y": 1}, {}, MassAction(2.0))], {"k": 1.0})
    with pytest.warns(CompositionWarning):
        merged = compose(a, [b])
    assert merged.species_ids == ["X", "Y"] and merged.species[0].initial_count == 1
    c = ReactionNetwork("c", [], [], {"k": 2.0})
    with pytest.raises(CompositionError):
        compose(a, [c])
    with pytest.raises(CompositionError):
        compose(a, [], [("missing", None)])


def test_compose_drops_conservation_broken_by_substitution():
    base = ReactionNetwork(
        "n", [Species("TF", 10), Species("C", 0), Species("Cd", 0)],
        [Reaction("sq", {"TF": 1}, {"C": 1}, MassAction(1.0)),
         Reaction("deg", {"C": 1}, {"TF": 1, "Cd": 1}, MichaelisMenten(1.0, 5.0))],
        conservations=[Conservation({"TF": 1, "C": 1}, 10)])
    with pytest.warns(CompositionWarning, match="TF \\+ C"):
        net, _ = unpack_mm(base, "deg", 1)
    assert [c.label() for c in net.conservations] == ["E + EC"]


def test_unpacked_mm_matches_law_at_quasi_steady_state():
    # with E scarce the ES steady state reproduces vmax S / (Km + S)
    d = derive_mm_params(60.0, 300.0, 60, 100.0)
    for s in (30, 300, 599):
        es = 60 * s / (d.k2 + d.k3) * d.k1 / (1 + d.k1 * s / (d.k2 + d.k3))
        assert d.k3 * es == pytest.approx(60 * s / (300 + s), rel=1e-12)


def test_no_warnings_for_plain_unpack():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        unpack_mm(mm_net(), "r", 60)
