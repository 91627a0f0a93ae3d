"""Local dynamical heights, Green's functions and escape radii.

The homogeneous height is evaluated as a telescoping sum

    H(z) = log||z|| + sum_{n>=0} d^-(n+1) log||F(u_n)||,

where ``u_0 = z/||z||`` and ``u_{n+1} = F(u_n)/||F(u_n)||``.  On the unit
sphere ``||F(u)||`` is trapped between ``|Res|/(2^eps C_g)`` (cofactor
identity) and the coefficient bound, so the neglected tail after ``n`` terms
lies in a known interval of width ``O(d^-n)``.  Its midpoint is added to the
value and its half-width (plus a rounding allowance) is ``err``.

At a finite place the iteration runs on p-adic units held modulo ``p^M``.
Each step divides out ``p^s`` with ``s`` bounded by ``s_max``, so ``M`` is
chosen large enough to survive the planned number of steps.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Any, NamedTuple, Optional

import mpmath
import numpy as np

from .errors import ValidationError
from .forms import (
    Lift,
    MapPair,
    as_lift,
    cofactors,
    normalize_integer,
    normalizing_scalar,
    wedge,
)
from .places import INF, Place, epsilon_K, log_abs_rational, valuation

DEFAULT_TOL = 1e-10
_EPS = 2.0**-52
# rounding allowance per unit of accumulated magnitude, in units of _EPS
_ROUND_FACTOR = 64.0


@dataclass(frozen=True)
class HeightValue:
    """A real value with a certified error radius.

    At finite places ``units`` is the exact truncated valuation sum: the true
    height is at most ``-units * log p``.
    """

    value: float
    err: float
    place: Place
    iterations: int = 0
    units: Optional[Fraction] = None


@dataclass(frozen=True)
class GreenValue:
    value: float
    err: float
    iterations: int = 0

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.value)


class EscapeBound(NamedTuple):
    """``R_up`` certifies ``K_F`` inside the ball ``||z|| <= R_up``."""

    R_up: float
    C_g: float


class _Constants(NamedTuple):
    log_upper: float  # log of max ||F(u)|| on the unit sphere
    log_lower: float  # log of min ||F(u)|| on the unit sphere
    C_g: float
    s_max: int  # finite places: bound on the step valuation of the normalized lift


def _coef_norm(coeffs, v: Place) -> float:
    """Sup over the unit sphere bound: coefficient sum (inf) or max |c|_p."""
    if v.is_archimedean:
        return float(sum(abs(c) for c in coeffs))
    vals = [valuation(c, v.p) for c in coeffs if c != 0]
    if not vals:
        return 0.0
    return float(v.p) ** (-min(vals))


@lru_cache(maxsize=256)
def _constants(F: MapPair, v: Place) -> _Constants:
    if v.is_archimedean:
        G = cofactors(F)
        C_g = max(_coef_norm(g.coeffs, v) for g in G)
        upper = max(_coef_norm(F.F1.coeffs, v), _coef_norm(F.F2.coeffs, v))
        log_lower = log_abs_rational(F.resultant) - math.log(2.0 * C_g)
        return _Constants(math.log(upper), log_lower, C_g, 0)
    p = v.p
    Fn = normalize_integer(F)
    G = cofactors(Fn)
    cof_vals = [valuation(c, p) for g in G for c in g.coeffs if c != 0]
    s_max = valuation(Fn.resultant, p) - min(cof_vals)
    C_g = max(_coef_norm(g.coeffs, v) for g in cofactors(F))
    return _Constants(0.0, -s_max * math.log(p), C_g, s_max)


def tail_constant(F: MapPair, v: Place) -> float:
    """``B`` with ``|log||F(u)||_v| <= B`` on the unit sphere (normalized lift
    at finite places)."""
    c = _constants(F, v)
    return max(abs(c.log_upper), abs(c.log_lower))


def height_offset_bound(F: MapPair, v: Place) -> tuple[float, float]:
    """Interval containing ``H_F(z) - log||z||_v`` for every nonzero ``z``.

    At finite places this refers to the integer-normalized lift.
    """
    c = _constants(F, v)
    d = F.d
    return c.log_lower / (d - 1), c.log_upper / (d - 1)


def _tail_interval(F: MapPair, n: int, v: Place = INF) -> tuple[float, float]:
    """Midpoint and half-width of the neglected tail after ``n`` terms."""
    c = _constants(F, v)
    d = F.d
    w = d**n * (d - 1)
    return (c.log_lower + c.log_upper) / (2 * w), (c.log_upper - c.log_lower) / (2 * w)


def _steps_for(B: float, d: int, tol: float) -> int:
    if B <= 0:
        return 0
    return max(0, math.ceil(math.log(B / ((d - 1) * tol)) / math.log(d)))


# ---------------------------------------------------------------------------
# archimedean


def _normalized_float_lift(z: Lift) -> tuple[complex, complex, float]:
    """Return ``(u0, u1, log||z||)`` with ``max(|u0|, |u1|) == 1``."""
    if z.is_exact():
        z0, z1 = Fraction(z.z0), Fraction(z.z1)
        m = max(abs(z0), abs(z1))
        return complex(float(z0 / m)), complex(float(z1 / m)), log_abs_rational(m)
    z0, z1 = complex(z.z0), complex(z.z1)
    m = max(abs(z0), abs(z1))
    if not math.isfinite(m) or m == 0:
        raise ValidationError(f"cannot normalize lift {z}")
    return z0 / m, z1 / m, math.log(m)


def _horner(coeffs, x, y):
    acc = coeffs[0]
    ypow = 1
    for c in coeffs[1:]:
        ypow = ypow * y
        acc = acc * x + c * ypow
    return acc


def _arch_float(F: MapPair, z: Lift, tol: float) -> HeightValue:
    d = F.d
    B = tail_constant(F, INF)
    n = _steps_for(B, d, tol / 2)
    f1 = [complex(c) for c in F.F1.coeffs]
    f2 = [complex(c) for c in F.F2.coeffs]
    u0, u1, total = _normalized_float_lift(z)
    mag = abs(total)
    scale = 1.0
    terms = []
    for _ in range(n):
        a, b = _horner(f1, u0, u1), _horner(f2, u0, u1)
        m = max(abs(a), abs(b))
        scale /= d
        t = math.log(m) * scale
        terms.append(t)
        mag += abs(t)
        u0, u1 = a / m, b / m
    mid, half = _tail_interval(F, n)
    value = math.fsum([total, mid] + terms)
    err = half + _ROUND_FACTOR * _EPS * (mag + B / (d - 1) + 1.0)
    return HeightValue(value + 0.0, err, INF, n)


def _arch_mp(F: MapPair, z: Lift, tol: float, bits: int) -> HeightValue:
    d = F.d
    B = tail_constant(F, INF)
    n = _steps_for(B, d, tol / 2)
    with mpmath.workprec(bits):
        conv = lambda c: mpmath.mpf(c.numerator) / c.denominator
        f1 = [conv(c) for c in F.F1.coeffs]
        f2 = [conv(c) for c in F.F2.coeffs]
        if z.is_exact():
            z0, z1 = conv(Fraction(z.z0)), conv(Fraction(z.z1))
        else:
            z0, z1 = mpmath.mpc(z.z0), mpmath.mpc(z.z1)
        m = max(abs(z0), abs(z1))
        total = mpmath.log(m)
        u0, u1 = z0 / m, z1 / m
        scale = mpmath.mpf(1)
        mag = abs(total)
        for _ in range(n):
            a, b = _horner(f1, u0, u1), _horner(f2, u0, u1)
            m = max(abs(a), abs(b))
            scale /= d
            t = mpmath.log(m) * scale
            total += t
            mag += abs(t)
            u0, u1 = a / m, b / m
        mid, half = _tail_interval(F, n)
        value = float(total + mid) + 0.0
        mag = float(mag)
    unit = 2.0 ** (-(bits - 8))
    err = half + unit * (mag + B / (d - 1) + 1.0) + _EPS * abs(value)
    return HeightValue(value, err, INF, n)


def hhat_many(F: MapPair, lifts, tol: float = DEFAULT_TOL) -> tuple[np.ndarray, float, int]:
    """Vectorized archimedean heights of many lifts.

    Returns ``(values, err, iterations)`` with one shared error radius.
    """
    d = F.d
    B = tail_constant(F, INF)
    n = _steps_for(B, d, tol / 2)
    rows = [_normalized_float_lift(as_lift(z)) for z in lifts]
    if not rows:
        return np.zeros(0), 0.0, n
    u0 = np.array([r[0] for r in rows], dtype=complex)
    u1 = np.array([r[1] for r in rows], dtype=complex)
    total = np.array([r[2] for r in rows], dtype=float)
    f1 = [complex(c) for c in F.F1.coeffs]
    f2 = [complex(c) for c in F.F2.coeffs]
    mag = np.abs(total)
    scale = 1.0
    for _ in range(n):
        a, b = _horner(f1, u0, u1), _horner(f2, u0, u1)
        m = np.maximum(np.abs(a), np.abs(b))
        scale /= d
        t = np.log(m) * scale
        total = total + t
        mag = mag + np.abs(t)
        u0, u1 = a / m, b / m
    mid, half = _tail_interval(F, n)
    err = half + _ROUND_FACTOR * _EPS * (float(mag.max()) + B / (d - 1) + 1.0 + n)
    return total + mid, err, n


# ---------------------------------------------------------------------------
# finite places


def _padic(F: MapPair, z: Lift, p: int, tol: float) -> HeightValue:
    if not z.is_exact():
        raise ValidationError("p-adic heights need rational coordinates")
    d = F.d
    z0, z1 = Fraction(z.z0), Fraction(z.z1)
    place = Place(p)
    vmin = min(valuation(c, p) for c in (z0, z1) if c != 0)
    # H_{cF} = H_F + log|c|/(d-1)  =>  units shift by -v(c)/(d-1)
    shift = -Fraction(valuation(normalizing_scalar(F), p), d - 1)
    consts = _constants(F, place)
    s_max = consts.s_max
    if s_max == 0:
        units = vmin + shift
        return HeightValue(-float(units) * math.log(p) + 0.0, 0.0, place, 0, units)

    log_p = math.log(p)
    B = s_max * log_p
    n = max(1, _steps_for(B, d, tol))
    M = (n + 1) * s_max + 1
    mod = p**M
    Fn = normalize_integer(F)
    f1 = [int(c) for c in Fn.F1.coeffs]
    f2 = [int(c) for c in Fn.F2.coeffs]

    def residue(c: Fraction) -> int:
        q = c / Fraction(p) ** vmin
        return q.numerator * pow(q.denominator, -1, mod) % mod

    u0, u1 = residue(z0), residue(z1)
    acc = Fraction(0)
    cur = M
    for k in range(n):
        cur_mod = p**cur
        a = _horner(f1, u0, u1) % cur_mod
        b = _horner(f2, u0, u1) % cur_mod
        s = min(_capped_val(a, p, cur), _capped_val(b, p, cur))
        if s > s_max:
            raise AssertionError("step valuation exceeded its cofactor bound")
        acc += Fraction(s, d ** (k + 1))
        ps = p**s
        cur -= s
        u0, u1 = (a // ps) % p**cur, (b // ps) % p**cur
    units = vmin + acc + shift
    # the neglected tail adds between 0 and s_max/(d^n (d-1)) units
    half = B / (2 * d**n * (d - 1))
    return HeightValue(-float(units) * log_p - half, half, place, n, units)


def _capped_val(x: int, p: int, cap: int) -> int:
    if x == 0:
        return cap
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return min(v, cap)


# ---------------------------------------------------------------------------
# public operations


def hhat(
    F: MapPair,
    z: Any,
    v: Place = INF,
    tol: float = DEFAULT_TOL,
    precision: Optional[int] = None,
) -> HeightValue:
    """Homogeneous local dynamical height of the lift ``z`` at ``v``.

    With ``precision`` (mantissa bits) the archimedean sum runs in mpmath;
    without it, double precision is tried first and escalated when rounding
    alone would exceed ``tol``.
    """
    if not tol > 0:
        raise ValidationError("tol must be positive")
    z = as_lift(z)
    if not v.is_archimedean:
        return _padic(F, z, v.p, tol)
    if precision is not None:
        return _arch_mp(F, z, tol, precision)
    h = _arch_float(F, z, tol)
    if h.err > tol:
        bits = max(80, math.ceil(-math.log2(tol)) + 40)
        h = _arch_mp(F, z, tol, bits)
    return h


def r_of(F: MapPair, v: Place = INF) -> float:
    """``log|Res(F)|_v / (d(d-1))``."""
    d = F.d
    res = F.resultant
    if v.is_archimedean:
        return log_abs_rational(res) / (d * (d - 1))
    return -valuation(res, v.p) * math.log(v.p) / (d * (d - 1))


def log_abs_wedge(z: Lift, w: Lift, v: Place) -> float:
    """``log|z ^ w|_v``; ``-inf`` when the points coincide."""
    x = wedge(z, w)
    if x == 0:
        return -math.inf
    if z.is_exact() and w.is_exact():
        x = Fraction(x)
        if v.is_archimedean:
            return log_abs_rational(x)
        return -valuation(x, v.p) * math.log(v.p)
    if not v.is_archimedean:
        raise ValidationError("p-adic wedge needs rational coordinates")
    return math.log(abs(x))


def green(
    F: MapPair,
    z: Any,
    w: Any,
    v: Place = INF,
    tol: float = DEFAULT_TOL,
    precision: Optional[int] = None,
) -> GreenValue:
    """Arakelov-Green's function of the map at ``v``; ``+inf`` on the diagonal."""
    z, w = as_lift(z), as_lift(w)
    lw = log_abs_wedge(z, w, v)
    if math.isinf(lw):
        return GreenValue(math.inf, 0.0)
    hz = hhat(F, z, v, tol, precision)
    hw = hhat(F, w, v, tol, precision)
    value = -lw + hz.value + hw.value - r_of(F, v)
    return GreenValue(value, hz.err + hw.err, max(hz.iterations, hw.iterations))


def filled_julia_member(F: MapPair, z: Any, v: Place = INF, tol: float = DEFAULT_TOL) -> str:
    """``"in"``, ``"out"`` or ``"boundary"`` by the sign of the height."""
    h = hhat(F, z, v, tol)
    if h.value - h.err > tol:
        return "out"
    if h.value + h.err < -tol:
        return "in"
    return "boundary"


def normalize_lift(F: MapPair, z: Any, v: Place = INF, tol: float = DEFAULT_TOL) -> Lift:
    """Rescale ``z`` so its height is 0 (infinity) or in ``(-log p, 0]`` (finite).

    The p-adic window is the best a discrete value group allows; the result
    is certified to lie in the filled Julia set.
    """
    z = as_lift(z)
    h = hhat(F, z, v, tol)
    if v.is_archimedean:
        u0, u1, lognorm = _normalized_float_lift(z)
        c = math.exp(lognorm - h.value)
        if z.is_exact() or (u0.imag == 0 and u1.imag == 0):
            return Lift(u0.real * c, u1.real * c)
        return Lift(u0 * c, u1 * c)
    m = -math.floor(h.units)
    factor = Fraction(v.p) ** m
    return Lift(Fraction(z.z0) * factor, Fraction(z.z1) * factor)


def escape_radius_bound(F: MapPair, v: Place = INF) -> EscapeBound:
    """Certified radius outside which every lift escapes.

    If ``||z|| > R_up`` then ``||F(z)|| >= 2||z||``, so the orbit is unbounded.
    """
    consts = _constants(F, v)
    d = F.d
    if not v.is_archimedean:
        integral = all(valuation(c, v.p) >= 0 for c in F.F1.coeffs + F.F2.coeffs if c != 0)
        if integral and valuation(F.resultant, v.p) == 0:
            return EscapeBound(1.0, consts.C_g)
        log_res = -valuation(F.resultant, v.p) * math.log(v.p)
    else:
        log_res = log_abs_rational(F.resultant)
    eps = epsilon_K(v)
    log_R = ((eps + 1) * math.log(2) + math.log(consts.C_g) - log_res) / (d - 1)
    return EscapeBound(math.exp(log_R), consts.C_g)
