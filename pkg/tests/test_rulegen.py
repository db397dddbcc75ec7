import pytest

from dlecorr.rulegen import (NotAnalytic, SynthesisError, analytic_to_rules, canonical_rule,
                             check_analytic, display_equivalent, dl_structural_rules,
                             format_rule, is_quasi_special, is_special, latex_rule, parse_rule,
                             parse_rules, rename_rule, rule_to_inequality, same_rule,
                             synthesize, violating_rules)
from dlecorr.semantics import default_battery, equivalence_battery
from dlecorr.syntax import parse_inequality

TRANS = "X |- (Y * Z) >> W\n----\nX |- Z >> (Y >> W)"


def test_format_parse_round_trip(sigs):
    s = sigs["frege"]
    r = parse_rule(TRANS, s)
    assert parse_rule(format_rule(r, s), s) == r


def test_renaming_is_invisible_to_same_rule(sigs):
    s = sigs["frege"]
    r = parse_rule(TRANS, s)
    r2 = rename_rule(r, {"X": "A", "Y": "B", "Z": "C", "W": "D"})
    assert r2 != r and same_rule(r, r2)
    assert canonical_rule(r) == canonical_rule(r2)


def test_parse_rules_skips_comments(sigs):
    s = sigs["frege"]
    rules = parse_rules("# header\n\n" + TRANS + "\n\n" + TRANS, s)
    assert len(rules) == 2


def test_bad_rule_text(sigs):
    with pytest.raises(SynthesisError):
        parse_rule("X |- Y\n--\nX |- Y", sigs["frege"])


def test_latex_uses_position(sigs):
    s = sigs["frege"]
    out = latex_rule(parse_rule(TRANS, s), s)
    assert out.startswith("\\AxiomC") and out.rstrip().endswith("\\DisplayProof")
    # fusion in antecedent position reads as F, implication in succedent as G
    assert "\\hat{\\bullet}" in out and "\\check{\\rightharpoonup}" in out


def test_rule_to_inequality_reads_structures(sigs):
    s = sigs["frege"]
    q = rule_to_inequality(parse_rule(TRANS, s), s)
    back = parse_inequality("(y * z) => w <= z => (y => w)", s)
    assert q == back


def test_special_flags(sigs):
    s = sigs["frege"]
    r = parse_rule(TRANS, s)
    assert is_special(r, s) and is_quasi_special(r, s)


def test_builtin_rules_are_analytic(sigs):
    s = sigs["modal"]
    rules = dl_structural_rules(s)
    assert {"E_L", "W_L", "C_L", "A_L"} <= {r.name for r in rules}
    assert all(check_analytic(r, s).ok for r in rules)


def test_violators(sigs):
    s = sigs["frege"]
    for cond, r in violating_rules(s).items():
        assert check_analytic(r, s).failed() == [cond]


def test_display_equivalence_is_not_trivial(sigs):
    s = sigs["frege"]
    a = parse_rule(TRANS, s)
    b = parse_rule("X |- (Z * Y) >> W\n----\nX |- Z >> (Y >> W)", s)
    assert display_equivalent(a, a, s)
    assert not display_equivalent(a, b, s)


def test_display_equivalence_across_display_moves(sigs):
    s = sigs["frege"]
    a = parse_rule(TRANS, s)
    moved = parse_rule("(Y * Z) * X |- W\n----\nX |- Z >> (Y >> W)", s)
    assert not same_rule(a, moved)
    assert display_equivalent(a, moved, s)


def test_not_analytic_raises(sigs):
    s = sigs["modal"]
    with pytest.raises(NotAnalytic):
        analytic_to_rules(parse_inequality("box dia p <= dia box p", s), s)


@pytest.mark.parametrize("sig, text", [
    ("modal", "p <= dia p"),
    ("modal", "box p <= box box p"),
    ("modal", "dia box p <= box dia p"),
    ("fg", "dia q -> box p <= box (q -> p)"),
    ("frege", "(p => q) * (q => r) <= p => r"),
    ("prelin", "top <= (p -> q) \\/ (q -> p)"),
])
def test_synthesised_rules_are_sound(sigs, sig, text):
    s = sigs[sig]
    q = parse_inequality(text, s)
    syn = synthesize(q, s)
    assert syn.rules
    assert all(check_analytic(r, s).ok for r in syn.rules)
    assert equivalence_battery(q, syn.rules, default_battery(s)).ok
