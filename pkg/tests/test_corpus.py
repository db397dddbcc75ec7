import random

from hypothesis import given, settings, strategies as st

from dlecorr.classify import classify_analytic
from dlecorr.corpus import (CorpusConfig, definite_pia_formulas, generate_corpus,
                            is_definite_pia, random_formula, random_signature,
                            round_trip_failures)
from dlecorr.semantics import default_battery
from dlecorr.signature import POS
from dlecorr.syntax import Var, atoms


def test_random_signature_has_both_families():
    sig = random_signature(random.Random(3), "t")
    fams = {c.family for c in sig.user()}
    assert fams == {"F", "G"}


def test_corpus_is_deterministic_and_analytic():
    cfg = CorpusConfig(signatures=1, per_signature=8, seed=5)
    a, b = generate_corpus(cfg), generate_corpus(cfg)
    assert [it.show() for it in a.items] == [it.show() for it in b.items]
    assert len(a.items) == 8
    for it in a.items:
        assert classify_analytic(it.ineq, it.sig).analytic


def test_non_analytic_samples_are_tagged():
    c = generate_corpus(CorpusConfig(signatures=1, per_signature=3, seed=2), with_non_analytic=4)
    bad = [it for it in c.items if it.tag == "non-analytic"]
    assert len(bad) == 4
    assert not any(classify_analytic(it.ineq, it.sig).analytic for it in bad)


def test_round_trip_on_small_corpus():
    c = generate_corpus(CorpusConfig(signatures=1, per_signature=10, seed=7))
    battery = default_battery(c.sigs[0])
    assert all(not round_trip_failures(it, battery) for it in c.items)


def test_definite_pia_small(sigs):
    s = sigs["modal"]
    out = definite_pia_formulas(s, depth=2)
    assert out
    for f, kind in out:
        sign = POS if kind == "positive" else -POS
        assert is_definite_pia(f, sign, s)
        assert [a for a in atoms(f) if a == Var("x")] == [Var("x")]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_random_formulas_use_requested_names(seed):
    rng = random.Random(seed)
    sig = random_signature(rng)
    f = random_formula(rng, sig, 3, ("p", "q"))
    assert {a.name for a in atoms(f)} <= {"p", "q"}
