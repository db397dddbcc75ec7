import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dlecorr.semantics import (BatteryConfig, FiniteDLE, Poset, battery_from_dict,
                               battery_to_dict, default_battery, equivalence_battery,
                               load_battery, posets, save_battery)
from dlecorr.syntax import Var, parse_inequality


def test_poset_counts():
    # unlabelled posets on 1..4 points
    assert [len(posets(n)) for n in range(1, 5)] == [1, 2, 5, 16]


def test_downset_lattice_is_distributive():
    alg = FiniteDLE(Poset(3, frozenset({(0, 2), (1, 2)})), None)
    M, J = alg.meet_t, alg.join_t
    for a, b, c in itertools.product(range(alg.N), repeat=3):
        assert M[a, J[b, c]] == J[M[a, b], M[a, c]]
    assert alg.leq[alg.bot].all() and alg.leq[:, alg.top].all()


def test_battery_tables_are_normal(sigs):
    for name in ("modal", "frege", "gcr"):
        s = sigs[name]
        for alg in default_battery(s)[:12]:
            for c in s.user():
                assert alg.audit(c.name), (name, alg.label, c.name)


def test_battery_is_deterministic(sigs):
    s = sigs["modal"]
    a = battery_to_dict(default_battery(s))
    b = battery_to_dict(default_battery(s))
    assert a == b
    c = battery_to_dict(default_battery(s, BatteryConfig(seed=1)))
    assert a != c


def test_residuals_are_adjoint(sigs):
    s = sigs["frege"]
    fus = s.by_infix("*").name
    for alg in default_battery(s)[:20]:
        f, g = alg.table("fimp"), alg.table(fus)
        for a, b, c in itertools.product(range(alg.N), repeat=3):
            # b * a <= c iff a <= b => c
            assert alg.leq[g[b, a], c] == alg.leq[a, f[b, c]]


def _brute_valid(alg, q):
    names = sorted({v.name for side in (q.lhs, q.rhs) for v in _vars(side)})
    for vals in itertools.product(range(alg.N), repeat=len(names)):
        env = {Var(n): np.array(v) for n, v in zip(names, vals)}
        if not alg.leq[alg.eval(q.lhs, env), alg.eval(q.rhs, env)]:
            return False
    return True


def _vars(f):
    from dlecorr.syntax import variables
    return variables(f)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(["dia box p <= box dia p", "p <= dia p", "dia dia p <= dia p",
                        "box (p \\/ q) <= dia p \\/ box q", "dia p /\\ box q <= dia (p /\\ q)"]),
       st.integers(0, 63))
def test_vectorised_validity_matches_loop(sigs, text, k):
    s = sigs["modal"]
    alg = default_battery(s)[k]
    q = parse_inequality(text, s)
    assert alg.valid_inequality(q) == _brute_valid(alg, q)


def test_counterexample_is_reported(sigs):
    s = sigs["modal"]
    q = parse_inequality("p <= dia p", s)
    bad = [a for a in default_battery(s) if not a.valid_inequality(q)]
    assert bad
    ok, cex = bad[0].valid_inequality(q, with_counter=True)
    assert not ok and Var("p") in cex


def _heyting(alg):
    N = alg.N
    t = np.zeros((N, N), dtype=np.int64)
    for a, b in itertools.product(range(N), repeat=2):
        t[a, b] = alg.join_all([x for x in range(N) if alg.leq[alg.meet_t[x, a], b]])
    return t


@pytest.mark.parametrize("less, holds", [
    (frozenset({(0, 1), (1, 2), (0, 2)}), True),  # chain
    (frozenset({(0, 1), (0, 2)}), True),   # every principal downset is a chain
    (frozenset({(0, 2), (1, 2)}), False),  # the top point has two lower covers
])
def test_prelinearity_on_heyting_algebras(sigs, less, holds):
    s = sigs["prelin"]
    base = FiniteDLE(Poset(3, less), s)
    alg = FiniteDLE(Poset(3, less), s, tables={"fimp": _heyting(base)})
    assert alg.audit("fimp")
    q = parse_inequality("top <= (p -> q) \\/ (q -> p)", s)
    assert alg.valid_inequality(q) == holds


def test_battery_file_round_trip(sigs, tmp_path):
    s = sigs["modal"]
    bat = default_battery(s)
    path = tmp_path / "bat.json"
    save_battery(path, bat)
    back = load_battery(path, s)
    assert battery_to_dict(back) == battery_to_dict(bat)
    for a, b in zip(bat, back):
        for c in s.user():
            assert np.array_equal(a.table(c.name), b.table(c.name))


def test_battery_file_errors(sigs):
    s = sigs["modal"]
    with pytest.raises(ValueError, match="cycle"):
        battery_from_dict({"algebras": [{"points": 2, "edges": [[0, 1], [1, 0]]}]}, s)
    with pytest.raises(ValueError, match="seed key"):
        battery_from_dict({"algebras": [{"points": 1, "seeds": {"dia": {"0,0": [0]}}}]}, s)


def test_equivalence_battery_flags_wrong_rules(sigs):
    from dlecorr.rulegen import analytic_to_rules, parse_rule
    s = sigs["modal"]
    q = parse_inequality("p <= dia p", s)
    assert equivalence_battery(q, analytic_to_rules(q, s), default_battery(s)).ok
    wrong = parse_rule("X |- Y\n---\no X |- Y", s)
    assert not equivalence_battery(q, [wrong], default_battery(s)).ok
