from dataclasses import replace

import numpy as np
import pytest

from rxunpack.core import validate_network
from rxunpack.errors import DomainError
from rxunpack.models import (BUILTINS, CLOCK_TF_POOL, HILL_ALPHA, HILL_SETS, ClockParams,
                             build_clock_model, build_hill_model, build_mm_model,
                             clock_hill_derivation, hill_set_derivation, hill_set_rates)
from rxunpack.sim import SsaConfig, run_ensemble, simulate_ode

# dissociation constants per set, in units of alpha (sets 4 and 6 use the corrected rows)
K_COLUMNS = {1: (10, 0.1), 2: (100, 0.01), 3: (100, 0.01), 4: (10, 0.1), 5: (0.1, 10),
             6: (0.01, 100), 7: (0.1, 10), 8: (0.01, 100)}


@pytest.mark.parametrize("name", sorted(BUILTINS))
def test_builtins_validate(name):
    assert validate_network(BUILTINS[name]()).ok


def test_mm_models():
    packed = build_mm_model()
    assert packed.reaction_ids == ["turnover"]
    unpacked = build_mm_model(packed=False)
    assert unpacked.reaction("turnover_bind").rate_law.c == pytest.approx(1 / 3)
    excess = build_mm_model(S0=60, E0=600, packed=False)
    assert excess.conservations[0].total == 600
    assert excess.reaction("turnover_cat").rate_law.c == 1.0


@pytest.mark.parametrize("set_id", sorted(HILL_SETS))
def test_hill_set_constants(set_id):
    d = hill_set_derivation(set_id)
    K1, K2 = K_COLUMNS[set_id]
    assert d.K1 / d.K2 == pytest.approx((K1 / K2), rel=1e-12)
    assert d.positive_cooperativity == (K1 > K2)
    net = build_hill_model(set_id)
    assert {c.label() for c in net.conservations} == {"G + GTF2"}


def test_hill_model_options():
    assert build_hill_model(0).reaction_ids == ["transcription"]
    with pytest.raises(KeyError):
        build_hill_model(9)
    custom = build_hill_model(None, params=hill_set_rates(2))
    assert "transcription_bind" in custom.reaction_ids


def test_clock_params_validation():
    p = ClockParams()
    assert p.counts(p.TF_total) == round(0.5 / 0.000167)
    with pytest.raises(DomainError):
        ClockParams(kt=-1.0)
    with pytest.raises(DomainError):
        replace(p, alpha=0.0)
    assert set(p.to_dict()) >= {"kms", "J", "alpha", "rho"}


def test_clock_models_share_tf_pool():
    p = ClockParams()
    packed = build_clock_model(p)
    unpacked = build_clock_model(p, packed=False)
    assert [c.label() for c in packed.conservations] == ["TF + C"]
    labels = {c.label() for c in unpacked.conservations}
    assert " + ".join(s if k == 1 else f"{k}*{s}" for s, k in CLOCK_TF_POOL.items()) in labels
    assert {"E_M + ES_M", "E_CP + ES_CP", "E_C + ES_C", "G + GTF2"} <= labels
    d = clock_hill_derivation(p)
    assert d.j_identity == pytest.approx(p.J / p.alpha, rel=1e-12)
    assert d.positive_cooperativity


def test_clock_short_ssa_conserves_pools():
    net = build_clock_model(replace(ClockParams(), alpha=0.00167), packed=False)
    ens = run_ensemble(net, SsaConfig(200.0, seed=1, dt=1.0), 2)
    for c in net.conservations:
        total = sum(k * ens[s] for s, k in c.coefficients)
        assert np.all(total == c.total)
    for marker in ("Md", "CPd", "Cd"):
        assert ens[marker].max() == 0


def test_clock_ode_scales_with_alpha():
    p = ClockParams()
    a = simulate_ode(build_clock_model(p), 100.0, dt=10.0)
    q = replace(p, alpha=p.alpha / 10)
    b = simulate_ode(build_clock_model(q), 100.0, dt=10.0)
    # same concentrations up to rounding of the initial counts
    assert np.allclose(a["M"] * p.alpha, b["M"] * q.alpha, rtol=1e-3)
