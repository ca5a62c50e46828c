import random
import warnings
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from docgen import random_document
from rxunpack.core import Hill, MassAction
from rxunpack.errors import AssumptionError, ModelSyntaxError, UnsupportedOrderError
from rxunpack.modeldsl import (apply_directives, build_network, document_from_network,
                               load_model, parse_model, serialize_model)
from rxunpack.models import BUILTINS, corpus_texts

MODELS = Path(__file__).resolve().parents[1] / "models"
CORPUS = sorted(MODELS.glob("*.rxn"))

MM = """\
model mm
alpha = 0.00167
species S = 599   # substrate
species P = 0
param vmax = 0.1/alpha
param Km = 0.501/alpha
reaction r1: S -> P @ mm(vmax, Km)
unpack r1 mm(Etot=60, rho=100)
conserve E + ES = 60
"""


def numbers_close(a: dict, b: dict, rel=1e-9) -> bool:
    if isinstance(a, dict):
        return a.keys() == b.keys() and all(numbers_close(a[k], b[k], rel) for k in a)
    if isinstance(a, list):
        return len(a) == len(b) and all(numbers_close(x, y, rel) for x, y in zip(a, b))
    if isinstance(a, float) or isinstance(b, float):
        return a == pytest.approx(b, rel=rel)
    return a == b


def test_parse_example():
    doc = parse_model(MM)
    assert doc.name == "mm" and doc.alpha == 0.00167
    net = apply_directives(doc)
    assert [r.id for r in net.reactions] == ["r1_bind", "r1_unbind", "r1_cat"]
    assert net.parameters["vmax"] == pytest.approx(0.1 / 0.00167)
    assert [c.label() for c in net.conservations] == ["E + ES"]
    assert build_network(doc).reaction_ids == ["r1"]


@pytest.mark.parametrize("text, line, col, words", [
    ("species A = 1\n", 1, 1, "model header"),
    ("model m\nspecies A = 1.5\n", 2, 13, "non-negative integer"),
    ("model m\nspecies A = 1\nspecies A = 2\n", 3, 9, "duplicate species"),
    ("model m\nreaction r: A -> B @ zz(1)\n", 2, 22, "unknown rate law"),
    ("model m\nreaction r: 3*A -> B @ ma(1)\n", 2, 13, "coefficient"),
    ("model m\nparam k = 2*beta\n", 2, 13, "alpha"),
    ("model m\nreaction r: A -> B @ mm(1)\n", 2, 22, "2 argument"),
    ("model m\nunpack r mm(speed=1)\n", 2, 13, "unknown mm option"),
    ("model m\nspecies A = $\n", 2, 13, "unexpected character"),
])
def test_syntax_errors_carry_position(text, line, col, words):
    with pytest.raises(ModelSyntaxError) as err:
        parse_model(text)
    assert (err.value.line, err.value.column) == (line, col)
    assert words in err.value.message


def test_semantic_errors():
    with pytest.raises(ModelSyntaxError, match="missing reaction"):
        apply_directives(parse_model("model m\nspecies A = 1\nunpack q mm(Etot=1)\n"))
    with pytest.raises(ModelSyntaxError, match="alpha is used"):
        build_network(parse_model("model m\nparam k = 1/alpha\n"))
    bad_rho = MM.replace("rho=100", "rho=1")
    with pytest.raises(AssumptionError, match="line 8"):
        apply_directives(parse_model(bad_rho))
    cubic = "model h\nspecies TF = 5\nreaction t: TF -> TF @ hill(1, 5, 3)\nunpack t hill(K1=50, s1=1, s2=1)\n"
    with pytest.raises(UnsupportedOrderError):
        apply_directives(parse_model(cubic))


def test_conserve_after_unpack_annotates_result():
    text = MM.replace("conserve E + ES = 60\n", "") + "conserve S + P + ES = 599\n"
    net = apply_directives(parse_model(text))
    assert {c.label() for c in net.conservations} == {"E + ES", "S + P + ES"}
    with pytest.raises(ModelSyntaxError, match="not 600"):
        apply_directives(parse_model(MM.replace("conserve E + ES = 60", "conserve E + ES = 600")))


def test_serialize_is_canonical():
    doc = parse_model(MM)
    text = serialize_model(doc)
    assert "#" not in text
    assert serialize_model(parse_model(text)) == text
    assert parse_model(text) == doc


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_documents_round_trip(seed):
    doc = random_document(random.Random(seed))
    text = serialize_model(doc)
    assert parse_model(text) == doc
    assert serialize_model(parse_model(text)) == text


@pytest.mark.parametrize("path", CORPUS, ids=lambda p: p.name)
def test_corpus_round_trip(path):
    doc = parse_model(path.read_text())
    assert parse_model(serialize_model(doc)) == doc


@pytest.mark.parametrize("name", sorted(corpus_texts()))
def test_corpus_files_match_generator(name):
    """Shipped models equal the builders' output (numbers within rounding)."""
    shipped = parse_model((MODELS / name).read_text())
    fresh = parse_model(corpus_texts()[name])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        a, b = apply_directives(shipped), apply_directives(fresh)
    assert numbers_close(a.to_dict(), b.to_dict(), rel=1e-12)


@pytest.mark.parametrize("packed, flat", [
    ("mm_packed", "mm_unpacked"), ("clock_packed", "clock_unpacked"),
    *[(f"hill_set{k}", f"hill_set{k}") for k in range(1, 9)],
])
def test_directives_reproduce_builtin_unpacked_models(packed, flat):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        via_dsl = load_model(MODELS / f"{packed}.rxn").to_dict()
    built = BUILTINS[flat]().to_dict()
    via_dsl.pop("name"), built.pop("name")
    assert numbers_close(via_dsl, built, rel=1e-9)


def test_network_to_document_round_trip():
    net = BUILTINS["clock_unpacked"]()
    doc = document_from_network(net)
    again = build_network(parse_model(serialize_model(doc)))
    assert again.to_dict() == net.to_dict()


def test_numbers_and_names_in_laws():
    doc = parse_model("model m\nparam k = 2.5e-3\nspecies X = 1\n"
                      "reaction a: X -> 0 @ ma(k)\nreaction b: 0 -> X @ ma(1e-05)\n"
                      "reaction h: X -> X @ hill(1, 10, 2)\n")
    net = build_network(doc)
    assert net.reaction("a").rate_law == MassAction(2.5e-3, "k")
    assert net.reaction("b").rate_law.c == 1e-05
    assert isinstance(net.reaction("h").rate_law, Hill)
