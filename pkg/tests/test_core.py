import math

import pytest
from hypothesis import given, strategies as st

from rxunpack.core import (Conservation, Hill, Immediate, MassAction, MichaelisMenten, Reaction,
                           ReactionNetwork, Species, SystemState, apply_reaction, compute_alpha,
                           convert_units, propensity, validate_network)
from rxunpack.errors import DomainError, FiringError, InvalidStateError


def test_mass_action_propensities():
    state = {"A": 5, "B": 3}
    assert propensity(Reaction("u", {"A": 1}, {}, MassAction(0.5)), state) == 2.5
    assert propensity(Reaction("b", {"A": 1, "B": 1}, {}, MassAction(0.1)), state) == pytest.approx(1.5)
    # homodimerisation counts unordered pairs
    assert propensity(Reaction("d", {"A": 2}, {}, MassAction(1.0)), state) == 10.0
    assert propensity(Reaction("z", {}, {"A": 1}, MassAction(4.0)), state) == 4.0


def test_compound_propensities():
    r = Reaction("mm", {"S": 1}, {"P": 1}, MichaelisMenten(60.0, 300.0))
    assert propensity(r, {"S": 300}) == pytest.approx(30.0)
    h = Reaction("h", {"TF": 1}, {"TF": 1, "M": 1}, Hill(1.0, 599.0, 2))
    assert propensity(h, {"TF": 599}) == pytest.approx(0.5)
    assert propensity(Reaction("i", {"X": 1}, {}, Immediate()), {"X": 3}) == 0.0


def test_negative_state_rejected():
    with pytest.raises(InvalidStateError):
        propensity(Reaction("u", {"A": 1}, {}, MassAction(1.0)), {"A": -1})


def test_apply_reaction_and_firing_error():
    r = Reaction("bind", {"E": 1, "S": 1}, {"ES": 1}, MassAction(1.0))
    s = apply_reaction(SystemState(0.0, {"E": 1, "S": 2, "ES": 0}), r)
    assert dict(s.counts) == {"E": 0, "S": 1, "ES": 1}
    with pytest.raises(FiringError):
        apply_reaction(s, r)


def test_catalyst_has_no_net_change():
    r = Reaction("tx", {"TF": 1}, {"TF": 1, "M": 1}, MassAction(1.0))
    assert r.change == {"M": 1}


def test_unit_conversion():
    alpha = 0.00167
    assert convert_units(0.5, "concentration", alpha) == pytest.approx(0.5 / alpha)
    assert convert_units(2.0, "unimolecular-rate", alpha) == 2.0
    assert convert_units(1.0, "bimolecular-rate", alpha) == pytest.approx(alpha)
    with pytest.raises(DomainError):
        convert_units(1.0, "concentration", 0.0)
    assert compute_alpha(1e-15) == pytest.approx(1 / 602.214076, rel=1e-12)


@given(st.floats(1e-6, 1e6), st.sampled_from(["concentration", "unimolecular-rate",
                                               "bimolecular-rate", "zeroth-order-rate"]),
       st.floats(1e-6, 1.0))
def test_unit_round_trip(value, role, alpha):
    back = convert_units(convert_units(value, role, alpha), role, alpha, "to_concentration")
    assert math.isclose(back, value, rel_tol=1e-12)


def _mm_net():
    return ReactionNetwork("mm", [Species("S", 10), Species("P", 0)],
                           [Reaction("r", {"S": 1}, {"P": 1}, MichaelisMenten(1.0, 5.0))])


def test_validation_flags_problems():
    net = ReactionNetwork("bad", [Species("A", 1)],
                          [Reaction("r", {"A": 1, "B": 1}, {}, MassAction(-1.0)),
                           Reaction("t", {"A": 3}, {}, MassAction(1.0))],
                          conservations=[Conservation({"A": 1}, 2)])
    codes = {f.code for f in validate_network(net).errors}
    assert {"unknown-species", "negative-constant", "arity", "conservation"} <= codes
    assert validate_network(_mm_net()).ok


def test_validation_warns_on_broken_conservation():
    net = ReactionNetwork("n", [Species("A", 1), Species("B", 0)],
                          [Reaction("r", {"A": 1}, {}, MassAction(1.0))],
                          conservations=[Conservation({"A": 1, "B": 1}, 1)])
    report = validate_network(net)
    assert report.ok and report.warnings[0].code == "conservation-broken"


def test_with_initial_updates_conservation_totals():
    net = ReactionNetwork("n", [Species("E", 5), Species("ES", 0)], [],
                          conservations=[Conservation({"E": 1, "ES": 1}, 5)])
    assert net.with_initial(E=7).conservations[0].total == 7
    with pytest.raises(KeyError):
        net.with_initial(Q=1)


def test_fingerprint_tracks_content():
    a = _mm_net()
    assert a.fingerprint() == _mm_net().fingerprint()
    assert a.fingerprint() != a.with_initial(S=11).fingerprint()
