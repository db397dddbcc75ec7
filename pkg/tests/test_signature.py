import pytest

from dlecorr.signature import (NEG, POS, OrderType, SignatureError, base_signature, full,
                               load_signature, parse_pol, pol_str, residual_family,
                               residual_order_type)

from conftest import SIGS


def test_polarity_tokens():
    assert parse_pol("d") == NEG and parse_pol(1) == POS
    assert pol_str(NEG) == "d"


def test_order_type_opposite():
    ot = OrderType.of(1, "d")
    assert str(ot.opposite()) == "(d,1)"
    assert ot.opposite().opposite() == ot


def test_residual_order_type_and_family():
    ot = OrderType.of(1, "d")
    assert str(residual_order_type(ot, 0)) == "(1,1)"
    assert residual_family("F", ot, 0) == "G"


@pytest.mark.parametrize("bad, msg", [
    ({"name": "x", "family": "H", "arity": 1, "order_type": [1]}, "family"),
    ({"name": "x", "family": "F", "arity": 2, "order_type": [1]}, "arity"),
    ({"name": "meet", "family": "F", "arity": 1, "order_type": [1]}, "reserved"),
])
def test_bad_signatures(bad, msg):
    with pytest.raises(SignatureError, match=msg):
        load_signature({"connectives": [bad]})


def test_residuals_have_opposite_family():
    s = full(load_signature(SIGS / "modal.json"))
    for c in s.user():
        for i in range(c.arity):
            r = s.residual(c.name, i)
            assert r.family != c.family
            assert r.parent == c.name


def test_base_signature_has_lattice_and_residuals():
    s = full(base_signature())
    assert "meet" in s and "join" in s
    assert s["himp"].family == "G"


def test_display_names_resolve():
    s = full(load_signature(SIGS / "modal.json"))
    assert s.by_symbol("bdia").name == s.residual("box", 0).name
    assert s.by_symbol("bbox").name == s.residual("dia", 0).name


def test_structural_table_pairs_duals():
    s = full(load_signature(SIGS / "modal.json"))
    tab = s.struct_table()
    assert tab["dia"] == {"F": "dia", "G": "box"}
    assert tab[";"] == {"F": "meet", "G": "join"}
