from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from dyngreen.basis import (
    SigmaIndex,
    alpha,
    alpha_upper,
    basis_check,
    build_H,
    change_matrix_det,
    nearest_sigma,
    prop_exponent,
    sigma_decompose,
    sigma_members,
)
from dyngreen.errors import ResourceLimitError, ValidationError
from dyngreen.forms import BinaryForm, MapPair, resultant

from conftest import CHEBYSHEV_LIKE, NEWTON, SQUARE

small = st.integers(-3, 3)


def maps(d):
    return st.tuples(st.lists(small, min_size=d + 1, max_size=d + 1), st.lists(small, min_size=d + 1, max_size=d + 1)).filter(
        lambda c: resultant(BinaryForm.of(c[0]), BinaryForm.of(c[1])) != 0
    )


def test_hand_determinants():
    idx = SigmaIndex.of(2, 1, 2)
    assert change_matrix_det(SQUARE, idx) == -1
    assert change_matrix_det(CHEBYSHEV_LIKE, idx) == -1
    assert change_matrix_det(NEWTON, idx) == -4
    assert prop_exponent(idx) == 1


def test_member_order():
    fam = build_H(NEWTON, SigmaIndex.of(2, 1, 2))
    x, y = BinaryForm.monomial(1, 0), BinaryForm.monomial(0, 1)
    assert fam.members == (x * NEWTON.F1, x * NEWTON.F2, y * NEWTON.F1, y * NEWTON.F2)


def test_sigma_membership():
    assert sigma_members(40, 2) == [4, 6, 8, 12, 16, 24, 32]
    assert sigma_decompose(24, 2) == SigmaIndex(24, 3, 3, 2)
    assert sigma_decompose(10, 2) is None
    assert nearest_sigma(10, 2) == 8
    with pytest.raises(ValidationError):
        nearest_sigma(3, 2)
    with pytest.raises(ValidationError):
        SigmaIndex(8, 4, 1, 2)


@given(st.integers(2, 5), st.integers(2, 3000))
def test_decomposition_unique(d, N):
    witnesses = [(t, k) for k in range(1, 12) for t in range(2, 2 * d) if t * d**k == N]
    idx = sigma_decompose(N, d)
    assert len(witnesses) <= 1
    assert (idx is None) == (not witnesses)
    if idx is not None:
        assert (idx.t, idx.k) == witnesses[0]


@given(st.integers(2, 5), st.integers(2, 9), st.integers(1, 5))
def test_exponent_integral_and_alpha_bound(d, t, k):
    if t > 2 * d - 1:
        return
    idx = SigmaIndex.of(t, k, d)
    assert prop_exponent(idx).denominator == 1
    assert alpha(idx) <= alpha_upper(idx) + 1e-12


@pytest.mark.parametrize("t,k,d", [(2, 1, 2), (3, 1, 2), (2, 2, 2), (3, 1, 3)])
@given(data=st.data())
def test_determinant_identity_random(t, k, d, data):
    c = data.draw(maps(d))
    F = MapPair.from_coeffs(*c)
    assert basis_check(F, SigmaIndex.of(t, k, d)).verified


def test_size_guard():
    with pytest.raises(ResourceLimitError):
        build_H(SQUARE, SigmaIndex.of(2, 6, 2))


def test_check_dict():
    chk = basis_check(NEWTON, SigmaIndex.of(2, 1, 2)).as_dict()
    assert chk["verified"] is True and chk["det"] == "-4" and chk["r"] == 1


def test_common_factor_gives_zero_determinant():
    # (x + y)(x - y) and (x + y) x share the factor x + y
    F = MapPair(BinaryForm.of([1, 0, -1]), BinaryForm.of([1, 1, 0]), check=False)
    assert F.resultant == 0
    for t, k in [(2, 1), (3, 1), (2, 2)]:
        assert change_matrix_det(F, SigmaIndex.of(t, k, 2)) == 0


def test_square_map_gives_permutation_matrix():
    idx = SigmaIndex.of(2, 2, 2)
    assert prop_exponent(idx) == 8
    assert abs(change_matrix_det(SQUARE, idx)) == 1


@given(maps(2), st.sampled_from([Fraction(2), Fraction(-3), Fraction(1, 2)]))
def test_scaling_map_scales_determinant(c, gamma):
    F = MapPair.from_coeffs(*c)
    G = F.scaled(gamma)
    idx = SigmaIndex.of(3, 1, 2)
    r = int(prop_exponent(idx))
    assert abs(change_matrix_det(G, idx)) == abs(change_matrix_det(F, idx)) * abs(gamma) ** (2 * F.d * r)
