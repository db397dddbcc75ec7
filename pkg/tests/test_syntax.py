import pytest
from hypothesis import given, settings, strategies as st

from dlecorr.signature import NEG, POS, full, load_signature
from dlecorr.syntax import (App, Bot, Inequality, Join, Meet, Nominal, ParseError, Top, Var,
                            alpha_equal, canonical_atoms, depth, parse_formula,
                            parse_inequality, parse_sequent, polarity_at, show, show_ineq,
                            show_sequent, size, subst, variables)

from conftest import SIGS

MODAL = full(load_signature(SIGS / "modal.json"))
FREGE = full(load_signature(SIGS / "frege.json"))


def formulas(sig, names=("p", "q", "r")):
    leaf = st.sampled_from([Var(n) for n in names] + [Top(), Bot()])
    unary = [c.name for c in sig.user() if c.arity == 1]
    binary = [c.name for c in sig.user() if c.arity == 2]

    def grow(sub):
        opts = [st.builds(Meet, sub, sub), st.builds(Join, sub, sub)]
        if unary:
            opts.append(st.builds(lambda h, a: App(h, (a,)), st.sampled_from(unary), sub))
        if binary:
            opts.append(st.builds(lambda h, a, b: App(h, (a, b)), st.sampled_from(binary), sub, sub))
        return st.one_of(*opts)

    return st.recursive(leaf, grow, max_leaves=8)


@settings(max_examples=200, deadline=None)
@given(formulas(MODAL))
def test_show_parse_round_trip_modal(f):
    assert parse_formula(show(f, MODAL), MODAL) == f


@settings(max_examples=200, deadline=None)
@given(formulas(FREGE))
def test_show_parse_round_trip_infix(f):
    assert parse_formula(show(f, FREGE), FREGE) == f


def test_precedence():
    f = parse_formula("p /\\ q \\/ r", MODAL)
    assert f == Join(Meet(Var("p"), Var("q")), Var("r"))
    g = parse_formula("p => q => r", FREGE)
    assert g == App("fimp", (Var("p"), App("fimp", (Var("q"), Var("r")))))


@pytest.mark.parametrize("text", ["p <=", "dia (p", "p <= q q", "foo p <= p"])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        parse_inequality(text, MODAL)


def test_size_depth_variables():
    f = parse_formula("dia p /\\ box (q \\/ bot)", MODAL)
    assert size(f) == 7 and depth(f) == 4
    assert variables(f) == [Var("p"), Var("q")]


def test_polarity():
    f = parse_formula("p -> q", MODAL)
    assert polarity_at(f, (0,), MODAL) == NEG
    assert polarity_at(f, (1,), MODAL) == POS


def test_subst():
    f = parse_formula("dia p", MODAL)
    assert subst(f, {Var("p"): Top()}) == App("dia", (Top(),))


def test_alpha_equal_renames_per_kind():
    a = Inequality(App("dia", (Nominal("j"),)), App("box", (Nominal("j"),)))
    b = Inequality(App("dia", (Nominal("i3"),)), App("box", (Nominal("i3"),)))
    c = Inequality(App("dia", (Nominal("i"),)), App("box", (Nominal("k"),)))
    assert alpha_equal(a, b)
    assert not alpha_equal(a, c)


def test_alpha_equal_keeps_kinds_apart():
    a = Inequality(Var("p"), Var("p"))
    b = Inequality(Nominal("p"), Nominal("p"))
    assert not alpha_equal(a, b)
    assert canonical_atoms(a) == canonical_atoms(Inequality(Var("z"), Var("z")))


def test_sequent_round_trip():
    q = parse_sequent("o X |- Y", MODAL)
    assert show_sequent(q, MODAL) == "o X |- Y"
    q2 = parse_sequent("X |- W >> ((Y * W) >> Z)", FREGE)
    assert parse_sequent(show_sequent(q2, FREGE), FREGE) == q2


def test_show_ineq():
    q = parse_inequality("dia box p <= box dia p", MODAL)
    assert show_ineq(q, MODAL) == "dia box p <= box dia p"
