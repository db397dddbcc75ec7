from hypothesis import given, strategies as st

from dlecorr.signature import NEG, POS, full, load_signature
from dlecorr.syntax import parse_formula
from dlecorr.trees import (critical_leaves, is_strict_order, max_skeleton, node_labels,
                           signed_tree, to_dot, to_text, transitive_closure, var_signs)

from conftest import SIGS

MODAL = full(load_signature(SIGS / "modal.json"))
FREGE = full(load_signature(SIGS / "frege.json"))


def test_labels_flip_with_sign():
    f = parse_formula("dia p", MODAL)
    assert node_labels(f, POS, MODAL) == {"SLR"}
    assert node_labels(f, NEG, MODAL) == {"SRA"}


def test_signs_follow_order_type():
    t = signed_tree(parse_formula("p => q", FREGE), POS, FREGE)
    assert var_signs(t) == {"p": {NEG}, "q": {POS}}


def test_flipped_tree_negates_signs():
    t = signed_tree(parse_formula("dia (p /\\ q)", MODAL), POS, MODAL)
    f = t.flipped()
    assert all(f[p].sign == -t[p].sign for p in t.nodes)


def test_critical_leaves_depend_on_eps():
    t = signed_tree(parse_formula("box dia p", MODAL), POS, MODAL)
    assert critical_leaves(t, {"p": POS}) == [(0, 0)]
    assert critical_leaves(t, {"p": NEG}) == []


def test_max_skeleton_stops_at_pia():
    t = signed_tree(parse_formula("box dia p", MODAL), POS, MODAL)
    assert max_skeleton(t) == frozenset()
    t2 = signed_tree(parse_formula("dia box p", MODAL), POS, MODAL)
    assert () in max_skeleton(t2)


def test_dumps():
    t = signed_tree(parse_formula("box dia p", MODAL), POS, MODAL)
    assert to_text(t).splitlines()[0] == "+box  [SRA]"
    assert to_dot(t).startswith("digraph")


def test_strict_order_detects_cycles():
    assert is_strict_order({("a", "b"), ("b", "c")})
    assert not is_strict_order({("a", "b"), ("b", "a")})


@given(st.sets(st.tuples(st.sampled_from("abcd"), st.sampled_from("abcd")), max_size=8))
def test_transitive_closure_is_closed(rel):
    c = transitive_closure(rel)
    assert set(rel) <= c
    assert all((a, d) in c for a, b in c for x, d in c if b == x)
