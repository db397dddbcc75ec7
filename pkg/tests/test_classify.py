import pytest

from dlecorr.classify import (check_inductive, classify_analytic, eps_str, find_inductive,
                              is_acyclic_I2, is_inductive, is_primitive, is_quasi_primitive,
                              omega_str)
from dlecorr.signature import POS
from dlecorr.syntax import parse_inequality

CASES = [
    ("fg", "dia q -> box p <= box (q -> p)", "very-restricted-right"),
    ("modal", "p <= dia p", "very-restricted-left"),
    ("modal", "box p <= box box p", "very-restricted-right"),
    ("modal", "dia box p <= box dia p", "restricted-left"),
    ("qprim", "dia dia p . dia p <= dia p", "very-restricted-left"),
    ("prelin", "top <= (p -> q) \\/ (q -> p)", "quasi-special"),
    ("gcr", "box p . rtri p <= dia p * ltri p", "analytic"),
    ("modal", "box dia p <= dia box p", "not-analytic"),
    ("modal", "box dia p <= dia p", "not-analytic"),
]


@pytest.mark.parametrize("sig, text, cls", CASES)
def test_classes(sigs, sig, text, cls):
    s = sigs[sig]
    assert classify_analytic(parse_inequality(text, s), s).cls == cls


def test_frege_witness(sigs):
    s = sigs["heyting"]
    c = classify_analytic(parse_inequality("p => (q => r) <= (p => q) => (p => r)", s), s)
    assert c.cls == "very-restricted-right"
    assert eps_str(c.witness.eps) == "(1,1,d)"
    assert omega_str(c.witness.omega) == "{p<q}"


def test_fixed_eps_is_respected(sigs):
    s = sigs["frege"]
    q = parse_inequality("p => (q => r) <= (p => q) => (p => r)", s)
    c = classify_analytic(q, s, eps={"p": POS, "q": POS, "r": POS})
    assert c.analytic and c.witness.eps == {"p": POS, "q": POS, "r": POS}


def test_inductive_but_not_analytic(sigs):
    s = sigs["modal"]
    q = parse_inequality("box dia p <= dia p", s)
    assert is_inductive(q, s) and not classify_analytic(q, s).analytic


def test_sahlqvist_failure_is_not_inductive(sigs):
    s = sigs["modal"]
    q = parse_inequality("box dia p <= dia box p", s)
    assert find_inductive(q, s) is None
    assert not is_acyclic_I2(q, s)


def test_check_inductive(sigs):
    s = sigs["modal"]
    q = parse_inequality("dia box p <= box dia p", s)
    assert check_inductive(q, s, {"p": POS}, frozenset())


def test_primitive_reports(sigs):
    s = sigs["modal"]
    assert is_primitive(parse_inequality("p <= dia p", s), s)
    assert not is_primitive(parse_inequality("dia box p <= box dia p", s), s)
    q = parse_inequality("dia dia p . dia p <= dia p", sigs["qprim"])
    assert is_quasi_primitive(q, sigs["qprim"]) and not is_primitive(q, sigs["qprim"])


def test_hierarchy_on_examples(sigs):
    for sig, text, cls in CASES:
        s = sigs[sig]
        q = parse_inequality(text, s)
        if is_quasi_primitive(q, s):
            assert classify_analytic(q, s, only=("very-restricted-left", "very-restricted-right")).analytic
        if cls != "not-analytic":
            assert is_acyclic_I2(q, s)
