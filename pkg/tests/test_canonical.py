import math
import random

import pytest
from hypothesis import assume, given, strategies as st

from dyngreen.canonical import (
    RationalPoint,
    canonical_height,
    canonical_height_orbit_oracle,
    green_sum_identity_check,
    lattes_from_curve,
    preperiodic_detect,
    small_point_census,
)
from dyngreen.errors import DuplicatePointError, ValidationError
from dyngreen.forms import BinaryForm, MapPair, resultant

from conftest import CUBIC, LATTES, NEWTON, SQUARE, TEST_MAPS
from oracles import square_height

coord = st.integers(-30, 30)
pts = st.tuples(coord, st.integers(0, 30)).filter(lambda z: z != (0, 0))
small = st.integers(-4, 4)


def maps(d):
    return st.tuples(st.lists(small, min_size=d + 1, max_size=d + 1), st.lists(small, min_size=d + 1, max_size=d + 1)).filter(
        lambda c: resultant(BinaryForm.of(c[0]), BinaryForm.of(c[1])) != 0
    )


def test_rational_point_normalization():
    assert RationalPoint.of(4, -6) == RationalPoint(-2, 3)
    assert RationalPoint.of(-5, 0) == RationalPoint(1, 0)
    assert RationalPoint.parse("1/2:3") == RationalPoint(1, 6)
    for a, b in [(2, 4), (1, -1), (0, 0), (-1, 0)]:
        with pytest.raises(ValidationError):
            RationalPoint(a, b)


@pytest.mark.parametrize(
    "F,P,expected",
    [(SQUARE, "2:1", math.log(2)), (SQUARE, "2:3", math.log(3)), (NEWTON, "1:1", 0.0)],
)
def test_height_examples(F, P, expected):
    h = canonical_height(F, P)
    assert abs(h.value - expected) <= 1e-9
    assert h.value >= -h.err - 1e-12


def test_oracle_examples():
    assert canonical_height_orbit_oracle(SQUARE, "2:1", 10).value == pytest.approx(math.log(2), abs=1e-15)
    o = canonical_height_orbit_oracle(NEWTON, "0:1")
    assert o.value == 0 and o.err == 0


@given(pts)
def test_square_closed_form(P):
    P = RationalPoint.of(*P)
    assert abs(canonical_height(SQUARE, P).value - square_height(P.a, P.b)) <= 1e-9


@given(st.one_of(maps(2), maps(3)), pts)
def test_functional_equation_and_sign(c, P):
    F = MapPair.from_coeffs(*c)
    P = RationalPoint.of(*P)
    h = canonical_height(F, P)
    assert h.value >= -h.err - 1e-12
    hf = canonical_height(F, RationalPoint.of(F(P.lift())))
    assert abs(hf.value - F.d * h.value) <= 1e-8


def test_oracle_agreement_random():
    rng = random.Random(5)
    done = 0
    while done < 100:
        d = rng.choice([2, 3])
        c = [[rng.randint(-9, 9) for _ in range(d + 1)] for _ in range(2)]
        try:
            F = MapPair.from_coeffs(*c)
        except ValidationError:
            continue
        P = RationalPoint.of(rng.randint(-30, 30), rng.randint(1, 30))
        h = canonical_height(F, P)
        o = canonical_height_orbit_oracle(F, P)
        assert abs(h.value - o.value) <= 1e-6
        done += 1


@pytest.mark.parametrize(
    "F,z,w,arch",
    [(SQUARE, "2:1", "3:1", math.log(6)), (NEWTON, "1:1", "0:1", None), (SQUARE, "1:1", "-1:1", -math.log(2))],
)
def test_green_sum_hand_cases(F, z, w, arch):
    chk = green_sum_identity_check(F, z, w)
    assert chk.residual <= 1e-6
    if arch is not None:
        from dyngreen.dynheight import green
        from dyngreen.places import INF

        g = green(F, RationalPoint.parse(z).lift(), RationalPoint.parse(w).lift(), INF)
        assert g.value == pytest.approx(arch, abs=1e-9)


@pytest.mark.parametrize("index,name", list(enumerate(sorted(TEST_MAPS))))
def test_green_sum_random(index, name):
    F = TEST_MAPS[name]
    rng = random.Random(index)
    for _ in range(25):
        z = RationalPoint.of(rng.randint(-40, 40), rng.randint(1, 40))
        w = RationalPoint.of(rng.randint(-40, 40), rng.randint(0, 40) or 1)
        if z == w:
            continue
        assert green_sum_identity_check(F, z, w).residual <= 1e-6


def test_green_sum_rejects_equal_points():
    with pytest.raises(DuplicatePointError):
        green_sum_identity_check(SQUARE, "1:2", "2:4")


def test_census_square():
    res = small_point_census(SQUARE, math.log(10), 0.3)
    assert res.window == 10
    assert res.count == 4
    assert set(res.witnesses) == {RationalPoint(0, 1), RationalPoint(1, 0), RationalPoint(1, 1), RationalPoint(-1, 1)}
    assert abs(res.min_positive_height - math.log(2)) <= 1e-10


def test_census_witnesses_are_exact_threshold_set():
    res = small_point_census(NEWTON, math.log(6), 0.5)
    for row in res.rows:
        assert (row.point in res.witnesses) == (row.height.value <= 0.5)
    # below the smallest positive height only preperiodic points remain
    low = small_point_census(NEWTON, math.log(6), res.min_positive_height / 2)
    assert all(preperiodic_detect(NEWTON, P) for P in low.witnesses)
    flagged = {r.point for r in res.rows if r.preperiodic}
    assert flagged == set(low.witnesses)


def test_census_workers_do_not_change_result():
    a = small_point_census(SQUARE, math.log(5), 1.0)
    b = small_point_census(SQUARE, math.log(5), 1.0, workers=2)
    assert a == b


def test_lattes():
    L = lattes_from_curve(-1, 0)
    assert L.F1.coeffs == (1, 0, 2, 0, 1)
    assert L.F2.coeffs == (0, 4, 0, -4, 0)
    assert L.d == 4 and L.resultant != 0
    for P in ["0:1", "1:1", "-1:1", "1:0"]:
        assert canonical_height(L, P).value <= 1e-8
        assert preperiodic_detect(L, P) is True
    with pytest.raises(ValidationError):
        lattes_from_curve(0, 0)
    with pytest.raises(ValidationError):
        lattes_from_curve(-3, 2)


def test_preperiodic_examples():
    assert preperiodic_detect(SQUARE, "-1:1") is True
    assert preperiodic_detect(SQUARE, "2:1") is False
    assert preperiodic_detect(NEWTON, "0:1") is True
    assert preperiodic_detect(CUBIC, "7:3") is False
