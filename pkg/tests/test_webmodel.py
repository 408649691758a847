"""Web model: validation, minors, tangent fields, bracket criterion."""

import random
from fractions import Fraction

import pytest

from webrank import data_path
from webrank.symbolic import expr_to_rf, matvec, parse_expression as pe
from webrank.webmodel import (
    Foliation,
    Web,
    WebValidationError,
    WrongCodimension,
    bracket_test,
    is_affine,
    jacobian_minor,
    load_web,
    tangent_fields,
    validate,
    web_from_dict,
    web_to_dict,
)


def template(phi, psi, name="tpl"):
    return Web(name, ("x", "y", "z"), 2, [
        Foliation((pe("x"), pe("y"))),
        Foliation((pe("y"), pe("z"))),
        Foliation((pe("z"), pe("x"))),
        Foliation((pe(phi), pe(psi))),
    ])


WLAM2 = template("x+y", "x+z+1/2*(x^2+2*2*x*z+z^2)")


def test_web_construction_checks():
    with pytest.raises(WebValidationError):
        Web("bad", ("x", "y"), 2, [Foliation((pe("x"), pe("y")))])
    with pytest.raises(WebValidationError):
        Web("bad", ("x", "y", "z"), 2, [Foliation((pe("x"),))])
    with pytest.raises(WebValidationError):
        Web("bad", ("x", "y"), 1, [Foliation((pe("w"),))])


def test_validate_template():
    assert validate(WLAM2).valid


def test_validate_repeated_foliation():
    w = Web("dup", ("x", "y", "z"), 2, [
        Foliation((pe("x"), pe("y"))),
        Foliation((pe("x"), pe("y"))),
    ])
    rep = validate(w)
    assert not rep.valid
    assert any("general position" in f for f in rep.failures)


def test_validate_goldberg_w3():
    assert validate(load_web(str(data_path("goldberg_w3.json")))).valid


def test_validate_printed_goldberg_w1_degenerate():
    # foliations 3,4 of the printed W1 share a tangent direction
    rep = validate(load_web(str(data_path("goldberg_w1.json"))))
    assert not rep.valid
    assert any("3,4" in f for f in rep.failures)
    # the corrected form is transversal
    assert validate(load_web(str(data_path("goldberg_w1_corrected.json")))).valid


def test_jacobian_minor_template_symbols():
    # A = br - qc sits at row (y,z), B = cp - ar at (z,x), C = aq - pb at (x,y)
    V = ("x", "y", "z")
    a, b, c = (expr_to_rf(pe(e), V) for e in ("1", "1", "0"))
    lam = 2
    p = expr_to_rf(pe(f"1+x+{lam}*z"), V)
    q = expr_to_rf(pe("0"), V)
    r = expr_to_rf(pe(f"1+{lam}*x+z"), V)
    A = b * r - q * c
    B = c * p - a * r
    C = a * q - p * b
    assert jacobian_minor(WLAM2, 3, (0, 1), (1, 2)) == A
    assert jacobian_minor(WLAM2, 3, (0, 1), (0, 1)) == C
    # B carries the (z,x) orientation: minor on sorted (x,z) is -B
    assert jacobian_minor(WLAM2, 3, (0, 1), (0, 2)) == -B


def test_jacobian_minor_identity_block():
    w = Web("coords", ("x", "y", "z"), 2, [Foliation((pe("x"), pe("y")))])
    assert jacobian_minor(w, 0, (0, 1), (0, 1)) == w.field.const(1)


def test_jacobian_minor_alternating():
    rng = random.Random(7)
    pool = ["x+y", "y*z", "x^2-z", "x*y+z^2", "z-2*x"]
    w = Web("rand", ("x", "y", "z"), 2, [
        Foliation((pe(rng.choice(pool)), pe(rng.choice(pool))))
    ])
    m1 = jacobian_minor(w, 0, (0, 1), (0, 1))
    m2 = jacobian_minor(w, 0, (1, 0), (0, 1))
    assert (m1 + m2).is_zero()


def test_tangent_fields_coordinates():
    w = Web("c1", ("x", "y", "z"), 2, [
        Foliation((pe("x"), pe("y"))),
        Foliation((pe("y"), pe("z"))),
    ])
    X = tangent_fields(w)
    assert [str(v) for v in X[0]] == ["0", "0", "1"]
    assert [str(v) for v in X[1]] == ["1", "0", "0"]


def test_tangent_fields_annihilate_template():
    X = tangent_fields(WLAM2)
    for i in range(4):
        for alpha in range(2):
            acc = WLAM2.field.const(0)
            for lam, v in enumerate(WLAM2.variables):
                acc = acc + WLAM2.generator_derivative(i, alpha, lam) * X[i][lam]
            assert acc.is_zero()


def test_tangent_fields_wrong_codimension():
    w = Web("q1", ("x", "y", "z"), 1, [Foliation((pe("x"),))])
    with pytest.raises(WrongCodimension):
        tangent_fields(w)


def test_bracket_coordinate_pairs():
    assert bracket_test(WLAM2, 0, 1)


def test_bracket_wlambda_fourth():
    # with phi = x+y one gets B = -A identically, so (X1, X4) stay dependent
    assert bracket_test(WLAM2, 0, 3)


def test_bracket_generic_fourth_false():
    w = template("x+y+1/2*z^2", "x+z+1/2*x^2", name="generic")
    assert not bracket_test(w, 0, 3)


def test_is_affine():
    assert is_affine(Web("aff", ("x", "y", "z"), 2, [
        Foliation((pe("x+2*y"), pe("3*z-1")))]))
    assert not is_affine(Web("naff", ("x", "y", "z"), 2, [
        Foliation((pe("x^2"), pe("y")))]))
    assert not is_affine(load_web(str(data_path("goldberg_w3.json"))))
    assert not is_affine(load_web(str(data_path("goldberg_w1.json"))))


def test_json_roundtrip():
    d = web_to_dict(WLAM2)
    w2 = web_from_dict(d)
    assert w2.n == 3 and w2.q == 2 and w2.d == 4
    assert web_to_dict(w2) == d
