from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dyngreen.errors import ResourceLimitError, ValidationError, ZeroResultantError
from dyngreen.forms import (
    BinaryForm,
    Lift,
    MapPair,
    as_lift,
    bareiss_det,
    cofactors,
    compose,
    det_exact,
    iterate,
    iterate_resultant_exponent,
    normalize_integer,
    resultant,
    resultant_power_check,
    to_rat,
    wedge,
)

from oracles import resultant_by_roots

small = st.integers(-6, 6)


def nonzero_map(d):
    return st.tuples(st.lists(small, min_size=d + 1, max_size=d + 1), st.lists(small, min_size=d + 1, max_size=d + 1)).filter(
        lambda c: resultant(BinaryForm.of(c[0]), BinaryForm.of(c[1])) != 0
    )


def test_hand_resultants():
    assert MapPair.from_coeffs([1, 0, 0], [0, 0, 1]).resultant == 1
    assert MapPair.from_coeffs([1, 0, 1], [0, 1, 0]).resultant == 1
    assert MapPair.from_coeffs([1, 0, 1], [0, 2, 0]).resultant == 4


def test_zero_resultant_rejected():
    with pytest.raises(ZeroResultantError):
        MapPair.from_coeffs([1, 0, 0], [2, 0, 0])
    with pytest.raises(ValidationError):
        MapPair.from_coeffs([1, 1], [1, -1])  # degree 1


def test_to_rat_refuses_floats():
    assert to_rat("3/4") == Fraction(3, 4)
    with pytest.raises(ValidationError):
        to_rat(0.5)


def test_bareiss_matches_fraction_det():
    m = [[2, -1, 3], [0, 4, 1], [5, 2, -2]]
    assert bareiss_det(m) == det_exact(m) == -85
    assert round(float(np.linalg.det(np.array(m, dtype=float)))) == -85


def test_newton_cofactors():
    G = cofactors(MapPair.from_coeffs([1, 0, 1], [0, 2, 0]))
    assert G.g11.coeffs == (4, 0) and G.g12.coeffs == (0, -2)
    assert G.g21.coeffs == (0, 4) and G.g22.coeffs == (-2, 0)


def test_iterate_second():
    F2 = iterate(MapPair.from_coeffs([1, 0, 1], [0, 1, 0]), 2)
    assert F2.F1.coeffs == (1, 0, 3, 0, 1)
    assert F2.F2.coeffs == (0, 1, 0, 1, 0)


def test_exponent_formula():
    assert iterate_resultant_exponent(2, 1) == 1
    assert iterate_resultant_exponent(2, 2) == 6
    assert iterate_resultant_exponent(3, 2) == 3 * 8 // 2


def test_newton_power_check():
    chk = resultant_power_check(MapPair.from_coeffs([1, 0, 1], [0, 2, 0]), 2)
    assert chk.verified and chk.exponent == 6


def test_bit_guard(monkeypatch):
    monkeypatch.setenv("DYNGREEN_MAX_BITS", "40")
    F = MapPair.from_coeffs([3, 0, 1], [0, 1, 5])
    with pytest.raises(ResourceLimitError):
        iterate(F, 6)


def test_lift_parsing():
    assert as_lift("2:3") == Lift(Fraction(2), Fraction(3))
    with pytest.raises(ValidationError):
        Lift(0, 0)
    assert wedge((1, 2), (3, 4)) == -2


@given(nonzero_map(2))
def test_resultant_matches_roots(c):
    f1, f2 = c
    if f1[0] == 0 or f2[0] == 0:
        return
    exact = float(resultant(BinaryForm.of(f1), BinaryForm.of(f2)))
    approx = resultant_by_roots(f1, f2)
    assert abs(exact - approx) <= 1e-7 * max(1.0, abs(exact))


@given(nonzero_map(3), st.integers(1, 5))
def test_scaling_one_form(c, k):
    f1, f2 = BinaryForm.of(c[0]), BinaryForm.of(c[1])
    assert resultant(f1 * k, f2) == k**3 * resultant(f1, f2)
    assert resultant(f2, f1) == (-1) ** 9 * resultant(f1, f2)


@given(nonzero_map(2))
def test_cofactor_identity(c):
    F = MapPair.from_coeffs(*c)
    G = cofactors(F)
    res = F.resultant
    x3 = BinaryForm.monomial(3, 0, res)
    y3 = BinaryForm.monomial(0, 3, res)
    assert G.g11 * F.F1 + G.g12 * F.F2 == x3
    assert G.g21 * F.F1 + G.g22 * F.F2 == y3


@given(nonzero_map(2))
def test_second_iterate_resultant_power(c):
    F = MapPair.from_coeffs(*c)
    assert resultant_power_check(F, 2).verified


@given(nonzero_map(2), nonzero_map(2), nonzero_map(2))
def test_compose_associative(a, b, c):
    F, G, H = (MapPair.from_coeffs(*x) for x in (a, b, c))
    assert compose(compose(F, G), H) == compose(F, compose(G, H))


@given(nonzero_map(2), st.integers(-9, 9), st.integers(-9, 9))
def test_composition_evaluates(c, a, b):
    if a == 0 and b == 0:
        return
    F = MapPair.from_coeffs(*c)
    assert iterate(F, 2)((a, b)) == F(F((a, b)))


@given(nonzero_map(3))
def test_normalized_lift_primitive(c):
    F = MapPair.from_coeffs(*[[Fraction(x, 6) for x in row] for row in c])
    Fn = normalize_integer(F)
    coeffs = [int(x) for x in Fn.F1.coeffs + Fn.F2.coeffs]
    from math import gcd
    from functools import reduce

    assert all(Fraction(x).denominator == 1 for x in Fn.F1.coeffs + Fn.F2.coeffs)
    assert reduce(gcd, coeffs) == 1
