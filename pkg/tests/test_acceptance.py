"""Acceptance criteria 1-11.

One test per criterion; the conftest hook prints a PASS/FAIL line for each
at the end of the run. Run alone with ``pytest tests/test_acceptance.py``.
"""
import time

import numpy as np
import pytest

from dlecorr.alba import compute_LA, compute_RA, monotone_normal_form, run_alba
from dlecorr.classify import (classify_analytic, is_acyclic_I2, is_primitive,
                              is_quasi_primitive)
from dlecorr.corpus import (CorpusConfig, alba_step_failures, definite_pia_formulas,
                            generate_corpus, round_trip_failures)
from dlecorr.rulegen import (analytic_to_rules, check_analytic, display_equivalent,
                             dl_structural_rules, format_rule, invertible_synthesis,
                             is_quasi_special, parse_rule, same_rule, synthesize,
                             violating_rules)
from dlecorr.semantics import default_battery, equivalence_battery
from dlecorr.signature import NEG, POS
from dlecorr.syntax import (App, Conominal, Inequality, Join, Nominal, Var, alpha_equal,
                            head, kids, parse_inequality)
from dlecorr.trees import signed_tree

VR = ("very-restricted-left", "very-restricted-right")
R = ("restricted-left", "restricted-right")


def _rule(text, sig):
    return parse_rule(text, sig)


def _single(rules):
    assert len(rules) == 1, f"expected one rule, got {len(rules)}"
    return rules[0]


def test_criterion_01_fs2(sigs):
    """FS2 pipeline: pure output and rule, under one second"""
    s = sigs["fg"]
    t0 = time.perf_counter()
    q = parse_inequality("dia q -> box p <= box (q -> p)", s)
    res = run_alba(q, s)
    syn = synthesize(q, s)
    elapsed = time.perf_counter() - t0
    j, n = Nominal("j"), Conominal("n")
    want = Inequality(App("himp", (App("dia", (j,)), App("box", (n,)))), App("box", (App("himp", (j, n)),)))
    outs = res.outputs()
    assert res.ok and len(outs) == 1 and not outs[0].antecedents
    assert alpha_equal(outs[0].inequality, want)
    ref = _rule("X |- o Z > o Y\n----\nX |- o (Z > Y)", s)
    assert same_rule(_single(syn.rules), ref)
    assert elapsed < 1.0, f"{elapsed:.2f}s"


def test_criterion_02_church_rosser(sigs):
    """Church-Rosser reduces to the pure inequality with one nominal"""
    s = sigs["modal"]
    res = run_alba(parse_inequality("dia box p <= box dia p", s), s)
    j, bdia = Nominal("j"), s.residual("box", 0).name
    want = Inequality(App(bdia, (App("dia", (j,)),)), App("dia", (App(bdia, (j,)),)))
    outs = res.outputs()
    assert res.ok and len(outs) == 1 and not outs[0].antecedents
    assert alpha_equal(outs[0].inequality, want)


def test_criterion_03_quasi_primitive(sigs):
    """Quasi-primitive: pure output and two-premise rule, exact"""
    s = sigs["qprim"]
    q = parse_inequality("dia dia p . dia p <= dia p", s)
    res = run_alba(q, s)
    i, h = Nominal("i"), Nominal("h")
    want = Inequality(App("dot", (App("dia", (App("dia", (i,)),)), App("dia", (h,)))),
                      App("dia", (Join(i, h),)))
    outs = res.outputs()
    assert res.ok and len(outs) == 1 and alpha_equal(outs[0].inequality, want)
    ref = _rule("o X |- Z\no Y |- Z\n----\no o X (.) o Y |- Z", s)
    got = _single(analytic_to_rules(q, s))
    assert same_rule(got, ref), format_rule(got, s)


def test_criterion_04_frege_both_routes(sigs):
    """Frege: type-3 and type-4 rules, analytic and oracle-equivalent"""
    s = sigs["frege"]
    q = parse_inequality("p => (q => r) <= (p => q) => (p => r)", s)
    battery = default_battery(s)
    problems = []
    routes = {
        "type-3": ({"p": POS, "q": POS, "r": NEG}, "X |- W >> ((Y * W) >> Z)\n----\nX |- W >> (Y >> Z)"),
        "type-4": ({"p": POS, "q": POS, "r": POS}, "(X * Y) * (X * Z) |- W\n----\nX * (Y * Z) |- W"),
    }
    for name, (eps, ref_text) in routes.items():
        got = _single(synthesize(q, s, eps=eps).rules)
        if not check_analytic(got, s).ok:
            problems.append(f"{name} rule is not analytic")
        if not equivalence_battery(q, [got], battery).ok:
            problems.append(f"{name} rule disagrees with the input on the battery")
        if not same_rule(got, _rule(ref_text, s)):
            problems.append(f"{name} emitted {format_rule(got, s)!r}, expected {ref_text!r}".replace("\n", " "))
    assert not problems, "; ".join(problems)


def test_criterion_05_prelinearity(sigs):
    """Pre-linearity: rule and quasi-special flag"""
    s = sigs["prelin"]
    q = parse_inequality("top <= (p -> q) \\/ (q -> p)", s)
    got = _single(analytic_to_rules(q, s))
    ref = _rule("X |- W\nZ |- Y\n----\nI |- (X >> Y) ; (Z >> W)", s)
    assert same_rule(got, ref), format_rule(got, s)
    assert is_quasi_special(got, s)


def test_criterion_06_transitivity(sigs):
    """Transitivity: single-premise rule, exact"""
    s = sigs["frege"]
    q = parse_inequality("(p => q) * (q => r) <= p => r", s)
    got = _single(analytic_to_rules(q, s))
    ref = _rule("X |- (Y * Z) >> W\n----\nX |- Z >> (Y >> W)", s)
    assert same_rule(got, ref), format_rule(got, s)


def test_criterion_07_synthesis_parity(sigs):
    """Two synthesis methods agree with the four-premise rule"""
    s = sigs["gcr"]
    q = parse_inequality("box p . rtri p <= dia p * ltri p", s)
    ref = _rule("<*> X |- |*> Y\n<*> X |- [*] Z\n<*| W |- |*> Y\n<*| W |- [*] Z\n----\nX (.) Y |- Z (*) W", s)
    a = analytic_to_rules(q, s)
    b = invertible_synthesis(q, s)
    battery = default_battery(s)
    assert equivalence_battery(q, a, battery).ok
    assert equivalence_battery(q, b, battery).ok
    assert display_equivalent(_single(a), ref, s)
    assert display_equivalent(_single(b), ref, s)


def test_criterion_08_oracle_soundness():
    """ALBA steps and round trips agree on 200+ generated inequalities"""
    t0 = time.perf_counter()
    corpus = generate_corpus(CorpusConfig(signatures=3, per_signature=70, seed=0))
    analytic = [it for it in corpus.items if it.tag != "non-analytic"]
    assert len(analytic) >= 200 and len({id(it.sig) for it in analytic}) == 3
    batteries = {id(sg): default_battery(sg) for sg in corpus.sigs}
    failures = []
    for it in analytic:
        b = batteries[id(it.sig)]
        failures += alba_step_failures(it, b)
        failures += round_trip_failures(it, b)
    elapsed = time.perf_counter() - t0
    assert not failures, f"{len(failures)} disagreements, first: {failures[0]}"
    assert elapsed < 600, f"{elapsed:.0f}s"


def test_criterion_09_adjunction_suite(sigs):
    """LA/RA biconditionals for every definite PIA formula to depth 3"""
    s = sigs["pia"]
    X, Z, U = Var("x"), Var("z"), Var("u")
    cases = []
    for f, kind in definite_pia_formulas(s, 3):
        t = signed_tree(f, POS, s)
        sx = next(t[p].sign for p in t.var_leaves() if t[p].formula == X)
        sol = compute_LA(f, X, s, U) if kind == "positive" else compute_RA(f, X, s, U)
        cases.append((f, sol, kind, sx))
    assert len(cases) > 10000
    failures = 0
    for alg in default_battery(s):
        env = alg.env([X, Z, U])
        cache = {}

        def ev(g):
            r = cache.get(g)
            if r is None:
                r = env[g] if isinstance(g, Var) else alg.table(head(g))[tuple(ev(k) for k in kids(g))]
                cache[g] = r
            return r

        L, x, u, shape = alg.leq, env[X], env[U], (alg.N,) * 3
        for f, sol, kind, sx in cases:
            a, b = ev(f), ev(sol)
            if kind == "positive":
                lhs, rhs = L[u, a], (L[b, x] if sx == POS else L[x, b])
            else:
                lhs, rhs = L[a, u], (L[x, b] if sx == POS else L[b, x])
            if not np.array_equal(np.broadcast_to(lhs, shape), np.broadcast_to(rhs, shape)):
                failures += 1
    assert failures == 0, f"{failures} failures"


def test_criterion_10_hierarchy():
    """Hierarchy inclusions and analytic-iff-acyclic-I2 on the corpus"""
    corpus = generate_corpus(CorpusConfig(signatures=3, per_signature=70, seed=0), with_non_analytic=60)
    assert sum(it.tag == "non-analytic" for it in corpus.items) >= 150
    bad = []
    for it in corpus.items:
        q, s = it.ineq, it.sig
        prim = bool(is_primitive(q, s))
        qprim = bool(is_quasi_primitive(q, s))
        vr = classify_analytic(q, s, only=VR).cls in VR
        r = classify_analytic(q, s, only=VR + R).cls in VR + R
        an = classify_analytic(q, s).analytic
        for name, a, b in (("primitive", prim, qprim), ("quasi-primitive", qprim, vr),
                           ("very-restricted", vr, r), ("restricted", r, an)):
            if a and not b:
                bad.append(f"{name} not included: {it.show()}")
        # the equivalence presumes every variable occurs with both signs
        nq = monotone_normal_form(q, s)
        if classify_analytic(nq, s).analytic != is_acyclic_I2(nq, s):
            bad.append(f"I2 mismatch: {it.show()}")
    assert not bad, f"{len(bad)} violations, first: {bad[0]}"


def test_criterion_11_c_conditions(sigs):
    """Built-in rules pass C1-C7; each violator fails only its condition"""
    s = sigs["gcr"]
    built = dl_structural_rules(s)
    assert built and all(check_analytic(r, s).ok for r in built)
    v = violating_rules(s)
    assert set(v) == {"C1", "C3", "C4"}
    for cond, rule in v.items():
        assert check_analytic(rule, s).failed() == [cond]


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
