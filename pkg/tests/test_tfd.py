import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from dyngreen.bounds import effective_C
from dyngreen.dynheight import filled_julia_member, hhat
from dyngreen.errors import ValidationError
from dyngreen.forms import Lift, wedge
from dyngreen.places import INF, Place
from dyngreen.tfd import _config_objective, d0n_estimate, preimages, tfd_bound, verify_tfd_inequality

from conftest import CUBIC, NEWTON, SQUARE


def test_bounds():
    assert tfd_bound(SQUARE) == 1
    assert tfd_bound(NEWTON) == pytest.approx(0.5)
    assert tfd_bound(NEWTON, Place(2)) == pytest.approx(2)


def test_square_pair():
    config, est = d0n_estimate(SQUARE, INF, 2)
    assert est >= 2 - 1e-6
    hand = abs(wedge((1, 1), (1, -1)))
    assert est >= hand - 1e-6


@pytest.mark.parametrize("n", [2, 4, 8, 16])
def test_good_reduction_estimate_is_one(n):
    config, est = d0n_estimate(SQUARE, Place(17), n)
    assert est == 1.0


@pytest.mark.parametrize("F", [SQUARE, NEWTON, CUBIC])
def test_configuration_invariants(F):
    for v in (INF, Place(2)):
        config, est = d0n_estimate(F, v, 6, seed=3)
        assert len(config.lifts) == 6
        for i, z in enumerate(config.lifts):
            assert filled_julia_member(F, z, v) in ("in", "boundary")
            for w in config.lifts[i + 1:]:
                assert wedge(z, w) != 0
        assert est == pytest.approx(math.exp(config.objective))


def test_deterministic_given_seed():
    a = d0n_estimate(NEWTON, INF, 5, seed=4)
    b = d0n_estimate(NEWTON, INF, 5, seed=4)
    assert a == b


def test_preimages_map_to_target():
    for u in preimages(NEWTON, (2.0, 1.0)):
        img = NEWTON(Lift(*u))
        assert abs(img.z0 - 2 * img.z1) <= 1e-9 * abs(img.z0)


def test_n_must_be_at_least_two():
    with pytest.raises(ValidationError):
        d0n_estimate(SQUARE, INF, 1)
    with pytest.raises(ValidationError):
        verify_tfd_inequality(SQUARE, INF, [4, 2])


@pytest.mark.parametrize("F,v", [(SQUARE, INF), (NEWTON, INF), (NEWTON, Place(2)), (SQUARE, Place(5))])
def test_chain_and_bound(F, v):
    rows = verify_tfd_inequality(F, v, [2, 3, 4, 8])
    C = effective_C(F, v)
    for r in rows:
        assert r.chain_ok and r.bound_ok
        assert r.estimate <= math.exp(C * math.log(r.n) / (r.n - 1)) * r.bound + 1e-6
    # monotone trend of the estimates
    assert rows[0].estimate >= rows[-1].estimate - 1e-9


@given(st.sampled_from([(1, 0, 0, 1), (0, 1, -1, 0), (1, 1, 0, 1), (2, 1, 1, 1), (1, -3, 0, -1)]))
def test_objective_invariant_under_unimodular_change(m):
    a, b, c, d = m
    lifts = [Lift(Fraction(x), Fraction(y)) for x, y in [(1, 0), (0, 1), (1, 1), (3, -2), (5, 7)]]
    moved = [Lift(a * z.z0 + b * z.z1, c * z.z0 + d * z.z1) for z in lifts]
    for v in (INF, Place(2), Place(3)):
        assert _config_objective(moved, v) == pytest.approx(_config_objective(lifts, v), abs=1e-12)
