import dataclasses

import pytest

from dlecorr.alba import (AlbaError, Fresh, ackermann_order, approximate, compute_LA,
                          compute_RA, eliminate_monotone, first_approximation,
                          monotone_normal_form, residuate, run_alba, simplify_constants, split)
from dlecorr.corpus import CorpusItem, alba_step_failures
from dlecorr.semantics import default_battery
from dlecorr.syntax import App, Bot, Inequality, Nominal, Top, Var, parse_formula, parse_inequality


def test_residuate_lhs(sigs):
    s = sigs["modal"]
    q = residuate(parse_inequality("dia p <= q", s), 1, s)
    assert q == Inequality(Var("p"), App(s.residual("dia", 0).name, (Var("q"),)))


def test_residuate_rejects_wrong_family(sigs):
    s = sigs["modal"]
    with pytest.raises(AlbaError):
        residuate(parse_inequality("box p <= q", s), 1, s)
    with pytest.raises(AlbaError):
        residuate(parse_inequality("dia p <= q", s), 2, s)


def test_approximate_introduces_nominal(sigs):
    s = sigs["modal"]
    fresh = Fresh({"p"})
    main, side, name = approximate(Inequality(Nominal("i0"), parse_formula("dia p", s)), 1, fresh, s)
    assert main == Inequality(Nominal("i0"), App("dia", (Nominal(name),)))
    assert side == Inequality(Nominal(name), Var("p"))


def test_first_approximation_shape(sigs):
    s = sigs["modal"]
    qi = first_approximation(parse_inequality("dia p <= box p", s), Fresh({"p"}))
    assert len(qi.antecedents) == 2 and qi.trace[0].rule == "first-approximation"


def test_split_and_constants(sigs):
    s = sigs["modal"]
    assert len(split(parse_inequality("p \\/ q <= r /\\ dia r", s))) == 4
    assert simplify_constants(parse_formula("dia bot \\/ (p /\\ top)", s), s) == Var("p")


def test_monotone_elimination(sigs):
    s = sigs["modal"]
    q, gone = eliminate_monotone(parse_inequality("p <= q \\/ dia p", s), s)
    assert gone == ["q"]
    assert monotone_normal_form(parse_inequality("p <= q \\/ dia p", s), s) == \
        parse_inequality("p <= dia p", s)


def test_ackermann_order_respects_omega():
    assert ackermann_order(["p", "q", "r"], frozenset({("q", "p")})) == ["q", "p", "r"]


def test_adjoints(sigs):
    s = sigs["modal"]
    x, u = Var("x"), Var("u")
    assert compute_LA(parse_formula("box x", s), x, s, u) == App(s.residual("box", 0).name, (u,))
    assert compute_RA(parse_formula("dia x", s), x, s, u) == App(s.residual("dia", 0).name, (u,))


def test_sahlqvist_example(sigs):
    s = sigs["modal"]
    res = run_alba(parse_inequality("p <= dia p", s), s)
    assert res.ok and res.outputs()[0].inequality is not None


def test_restricted_route_records_adjunction(sigs):
    s = sigs["modal"]
    res = run_alba(parse_inequality("dia box p <= box dia p", s), s)
    assert res.route == "restricted" and res.isolated is not None
    assert [ra.rule for ra in res.trace()][-1] == "RAR"


def test_non_inductive_is_stuck(sigs):
    s = sigs["modal"]
    res = run_alba(parse_inequality("box dia p <= dia box p", s), s)
    assert not res.ok and "not inductive" in res.stuck.reason


def test_trivial_input(sigs):
    s = sigs["modal"]
    res = run_alba(parse_inequality("p <= p", s), s)
    assert res.ok and res.outputs()[0].inequality == Inequality(Top(), Top())


def test_script_output_is_equivalent(sigs):
    s = sigs["modal"]
    q = parse_inequality("dia box p <= box dia p", s)
    script = [("first-approximation",), ("approximate", 0, 1), ("LA", 1, (0,)), ("RAR", "p")]
    res = run_alba(q, s, strategy="interactive-script", script=script)
    assert res.ok and [ra.rule for ra in res.trace()] == ["first-approximation", "approximation", "LA", "RAR"]
    out = res.outputs()[0]
    for alg in default_battery(s):
        assert alg.valid_quasi(out.antecedents, out.inequality) == alg.valid_inequality(q)


def test_script_errors_are_reported(sigs):
    s = sigs["modal"]
    res = run_alba(parse_inequality("dia p <= p", s), s, strategy="interactive-script",
                   script=[("approximate", 0, 1)])
    assert not res.ok and "first-approximation" in res.stuck.reason


def test_step_checker_catches_a_corrupted_step(sigs):
    s = sigs["fg"]
    q = parse_inequality("dia q -> box p <= box (q -> p)", s)
    res = run_alba(q, s)
    battery = default_battery(s)
    item = CorpusItem(s, q, "very-restricted-right")
    assert alba_step_failures(item, battery, res) == []
    sys0 = res.systems[0]
    ra = sys0.trace[-1]
    ants, concl = ra.after
    bad = dataclasses.replace(ra, after=(ants, Inequality(Top(), Bot())))
    sys0.trace[-1] = bad
    fails = alba_step_failures(item, battery, res)
    assert fails and all(f.step == ra.rule for f in fails)
