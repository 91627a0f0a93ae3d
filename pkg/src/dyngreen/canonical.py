"""Canonical heights over Q and the global identities built on them.

Heights are assembled place by place on the integer-normalized map: for a
coprime integer point only the archimedean place and the primes dividing the
resultant contribute.  An independent oracle iterates the exact orbit.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Optional, Sequence

import gmpy2
import mpmath

from .dynheight import DEFAULT_TOL, HeightValue, green, height_offset_bound, hhat
from .errors import DuplicatePointError, ResourceLimitError, ValidationError
from .forms import Lift, MapPair, max_bits, normalize_integer, to_rat
from .places import INF, Place, _prime_support, bad_primes

#: Largest number of points a census may enumerate.
MAX_CENSUS_POINTS = 200_000
#: The orbit oracle switches from exact coordinates to residues plus
#: magnitudes past this many bits.
EXACT_ORBIT_BITS = 2**14
#: Heights below this are treated as zero in the census.
ZERO_HEIGHT = 1e-8


@dataclass(frozen=True, order=True)
class RationalPoint:
    """``[a:b]`` with ``gcd(a, b) = 1`` and ``b > 0`` (or ``[1:0]``)."""

    a: int
    b: int

    def __post_init__(self) -> None:
        if self.a == 0 and self.b == 0:
            raise ValidationError("[0:0] is not a point")
        if math.gcd(self.a, self.b) != 1:
            raise ValidationError(f"[{self.a}:{self.b}] is not reduced")
        if self.b < 0 or (self.b == 0 and self.a != 1):
            raise ValidationError(f"[{self.a}:{self.b}] does not have canonical sign")

    @classmethod
    def of(cls, x: Any, y: Any = 1) -> "RationalPoint":
        """Reduce any rational pair (or a Lift) to the canonical representative."""
        if isinstance(x, RationalPoint):
            return x
        if isinstance(x, Lift):
            x, y = x.z0, x.z1
        x, y = to_rat(x), to_rat(y)
        if x == 0 and y == 0:
            raise ValidationError("[0:0] is not a point")
        den = x.denominator * y.denominator // math.gcd(x.denominator, y.denominator)
        a, b = int(x * den), int(y * den)
        g = math.gcd(a, b)
        a, b = a // g, b // g
        if b < 0 or (b == 0 and a < 0):
            a, b = -a, -b
        return cls(a, b)

    @classmethod
    def parse(cls, text: str) -> "RationalPoint":
        parts = text.split(":")
        if len(parts) != 2:
            raise ValidationError(f"point must look like 'a:b', got {text!r}")
        return cls.of(parts[0].strip(), parts[1].strip())

    def lift(self) -> Lift:
        return Lift(Fraction(self.a), Fraction(self.b))

    def naive_height(self) -> float:
        return math.log(max(abs(self.a), abs(self.b)))

    def __str__(self) -> str:
        return f"{self.a}:{self.b}"


@dataclass(frozen=True)
class CensusRow:
    point: RationalPoint
    height: HeightValue
    preperiodic: Optional[bool]


@dataclass(frozen=True)
class CensusResult:
    B: float
    theta: float
    window: int
    count: int
    witnesses: tuple[RationalPoint, ...]
    min_positive_height: Optional[float]
    rows: tuple[CensusRow, ...] = field(default=(), repr=False)


@dataclass(frozen=True)
class GreenSumCheck:
    residual: float
    err: float
    lhs: float
    rhs: float
    places: tuple[Place, ...]


def _places_for(F: MapPair) -> list[Place]:
    return [INF] + [Place(p) for p in bad_primes(F)]


def _point(P: Any) -> RationalPoint:
    if isinstance(P, str):
        return RationalPoint.parse(P)
    if isinstance(P, (tuple, list)):
        return RationalPoint.of(*P)
    return RationalPoint.of(P)


def canonical_height(F: MapPair, P: Any, tol: float = DEFAULT_TOL) -> HeightValue:
    """Global canonical height as a sum of local heights.

    Good primes contribute nothing: the normalized map has primitive integer
    coefficients and unit resultant there, and ``(a, b)`` is coprime.  The
    returned ``place`` is None.
    """
    P = _point(P)
    Fn = normalize_integer(F)
    places = _places_for(Fn)
    share = tol / len(places)
    parts = [hhat(Fn, P.lift(), v, share) for v in places]
    value = math.fsum(h.value for h in parts)
    err = sum(h.err for h in parts)
    iterations = max(h.iterations for h in parts)
    return HeightValue(value + 0.0, err, None, iterations)


def _offset_interval(Fn: MapPair) -> tuple[float, float]:
    """Interval containing ``hhat(Q) - h(Q)`` for every rational point ``Q``."""
    lo = hi = 0.0
    for v in _places_for(Fn):
        a, b = height_offset_bound(Fn, v)
        lo += a
        hi += b
    return lo, hi


def _orbit_step(f1: Sequence[Any], f2: Sequence[Any], res: Any, a: Any, b: Any) -> tuple[Any, Any]:
    """One reduced step. For coprime ``(a, b)`` the common factor of the
    images divides the resultant, so the gcd is taken against it."""
    x = y = gmpy2.mpz(0)
    d = len(f1) - 1
    # F(a, b) = sum c_i a^(d-i) b^i
    apow = [gmpy2.mpz(1)]
    bpow = [gmpy2.mpz(1)]
    for _ in range(d):
        apow.append(apow[-1] * a)
        bpow.append(bpow[-1] * b)
    for i in range(d + 1):
        m = apow[d - i] * bpow[i]
        x += f1[i] * m
        y += f2[i] * m
    g = gmpy2.gcd(x % res, res)
    g = gmpy2.gcd(y % g, g) if g > 1 else g
    if g > 1:
        x, y = x // g, y // g
    if y < 0 or (y == 0 and x < 0):
        x, y = -x, -y
    return x, y


def _log_max(a: Any, b: Any) -> float:
    m = max(abs(a), abs(b))
    e = int(gmpy2.bit_length(m))
    if e < 1000:
        return math.log(int(m))
    # log of the leading bits plus the binary exponent
    shift = e - 64
    return math.log(int(m >> shift)) + shift * math.log(2)


def canonical_height_orbit_oracle(
    F: MapPair,
    P: Any,
    n_max: int = 60,
    tol: float = 1e-13,
    exact_bits: int = EXACT_ORBIT_BITS,
) -> HeightValue:
    """``h(F^n P) / d^n`` from the reduced orbit.

    The orbit is exact while coordinates stay below ``exact_bits``.  Past
    that, the common factor removed at each step is still found exactly from
    residues modulo a power of the resultant (it always divides the
    resultant), and only the magnitudes are carried in extended precision.
    Stops at ``n_max`` or once ``max|offset| / d^n <= tol``.  A repeated
    exact orbit point gives exactly 0.
    """
    P = _point(P)
    Fn = normalize_integer(F)
    d = Fn.d
    f1 = [gmpy2.mpz(int(c)) for c in Fn.F1.coeffs]
    f2 = [gmpy2.mpz(int(c)) for c in Fn.F2.coeffs]
    res = gmpy2.mpz(abs(int(Fn.resultant)))
    lo, hi = _offset_interval(Fn)
    spread = max(abs(lo), abs(hi))
    a, b = gmpy2.mpz(P.a), gmpy2.mpz(P.b)
    seen = {(a, b)}
    n = 0
    while n < n_max and spread / d**n > tol:
        if max(gmpy2.bit_length(abs(a)), gmpy2.bit_length(abs(b))) > exact_bits:
            break
        a, b = _orbit_step(f1, f2, res, a, b)
        n += 1
        if (a, b) in seen:
            return HeightValue(0.0, 0.0, None, n)
        seen.add((a, b))
    if n == n_max or spread / d**n <= tol:
        return HeightValue(_log_max(a, b) / d**n, spread / d**n, None, n)

    remaining = n_max - n
    while remaining > 0 and spread / d ** (n + remaining - 1) <= tol:
        remaining -= 1
    modulus = res ** (remaining + 1)
    ra, rb = a % modulus, b % modulus
    # each step can lose about log2(Lipschitz constant) bits of position
    prec = 96 + 8 * remaining
    with mpmath.workprec(prec):
        af, bf = mpmath.mpf(int(a)), mpmath.mpf(int(b))
        for _ in range(remaining):
            xf = yf = mpmath.mpf(0)
            xr = yr = gmpy2.mpz(0)
            for i in range(d + 1):
                m = af ** (d - i) * bf**i
                xf += int(f1[i]) * m
                yf += int(f2[i]) * m
                mr = pow(ra, d - i, modulus) * pow(rb, i, modulus)
                xr += f1[i] * mr
                yr += f2[i] * mr
            g = gmpy2.gcd(xr % res, res)
            g = gmpy2.gcd(yr % g, g) if g > 1 else g
            modulus //= g
            ra, rb = (xr // g) % modulus, (yr // g) % modulus
            af, bf = xf / int(g), yf / int(g)
            n += 1
        value = float(mpmath.log(max(abs(af), abs(bf)))) / d**n
    return HeightValue(value, spread / d**n, None, n)


def green_sum_identity_check(F: MapPair, z: Any, w: Any, tol: float = DEFAULT_TOL) -> GreenSumCheck:
    """Compare ``sum_v g_v(z, w)`` with ``hhat(z) + hhat(w)``.

    The sum runs over infinity, the bad primes and the primes dividing the
    wedge; every other place has unit wedge, unit resultant and zero local
    heights, so it contributes 0.
    """
    z, w = _point(z), _point(w)
    if z == w:
        raise DuplicatePointError("the identity needs distinct points")
    Fn = normalize_integer(F)
    primes = set(bad_primes(Fn)) | set(_prime_support(z.a * w.b - z.b * w.a))
    places = (INF,) + tuple(Place(p) for p in sorted(primes))
    share = tol / (2 * len(places) + 2)
    terms = [green(Fn, z.lift(), w.lift(), v, share) for v in places]
    lhs = math.fsum(g.value for g in terms)
    hz = canonical_height(Fn, z, share)
    hw = canonical_height(Fn, w, share)
    rhs = hz.value + hw.value
    err = sum(g.err for g in terms) + hz.err + hw.err
    return GreenSumCheck(abs(lhs - rhs), err, lhs, rhs, places)


def preperiodic_detect(F: MapPair, P: Any, max_steps: int = 64) -> Optional[bool]:
    """True if the exact orbit repeats, False once a point is certified to have
    positive height, None if neither happens within ``max_steps``.

    Positivity uses ``hhat(Q) >= h(Q) + lo`` with ``lo`` the summed lower
    offsets over the contributing places.
    """
    P = _point(P)
    Fn = normalize_integer(F)
    f1 = [gmpy2.mpz(int(c)) for c in Fn.F1.coeffs]
    f2 = [gmpy2.mpz(int(c)) for c in Fn.F2.coeffs]
    res = gmpy2.mpz(abs(int(Fn.resultant)))
    lo, _ = _offset_interval(Fn)
    a, b = gmpy2.mpz(P.a), gmpy2.mpz(P.b)
    seen = {(a, b)}
    limit = max_bits()
    margin = 1e-9 * (1 + abs(lo))
    for _ in range(max_steps + 1):
        if _log_max(a, b) + lo > margin:
            return False
        a, b = _orbit_step(f1, f2, res, a, b)
        if (a, b) in seen:
            return True
        seen.add((a, b))
        if max(gmpy2.bit_length(abs(a)), gmpy2.bit_length(abs(b))) > limit:
            raise ResourceLimitError("orbit exceeded the coefficient guard")
    return None


def lattes_from_curve(a: Any, b: Any, label: str = "") -> MapPair:
    """Degree-4 x-coordinate doubling map on ``y^2 = x^3 + a x + b``."""
    a, b = to_rat(a), to_rat(b)
    if 4 * a**3 + 27 * b**2 == 0:
        raise ValidationError("singular curve: 4a^3 + 27b^2 = 0")
    F1 = [1, 0, -2 * a, -8 * b, a * a]
    F2 = [0, 4, 0, 4 * a, 4 * b]
    return MapPair.from_coeffs(F1, F2, label or f"lattes({a},{b})")


def census_window(B: float) -> int:
    if not B > 0:
        raise ValidationError("B must be positive")
    W = math.floor(math.exp(B) * (1 + 1e-12))
    if W < 1:
        raise ValidationError("window e^B is below 1")
    return W


def census_points(W: int) -> list[RationalPoint]:
    pts = [RationalPoint(1, 0)]
    for b in range(1, W + 1):
        for a in range(-W, W + 1):
            if math.gcd(a, b) == 1:
                pts.append(RationalPoint(a, b))
    return pts


def _census_chunk(args: tuple[MapPair, list[RationalPoint], float]) -> list[CensusRow]:
    F, pts, tol = args
    rows = []
    for P in pts:
        h = canonical_height(F, P, tol)
        rows.append(CensusRow(P, h, preperiodic_detect(F, P)))
    return rows


def small_point_census(
    F: MapPair,
    B: float,
    theta: float,
    tol: float = DEFAULT_TOL,
    workers: int = 1,
) -> CensusResult:
    """All ``[a:b]`` with ``|a|, |b| <= e^B`` and height at most ``theta``."""
    if not theta > 0:
        raise ValidationError("theta must be positive")
    W = census_window(B)
    if (2 * W + 1) * W > MAX_CENSUS_POINTS:
        raise ResourceLimitError(f"census window {W} is above the enumeration guard")
    pts = census_points(W)
    Fn = normalize_integer(F)
    if workers > 1:
        chunks = [pts[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as ex:
            rows = [r for part in ex.map(_census_chunk, [(Fn, c, tol) for c in chunks]) for r in part]
    else:
        rows = _census_chunk((Fn, pts, tol))
    rows.sort(key=lambda r: (r.point.b, r.point.a))
    witnesses = tuple(r.point for r in rows if r.height.value <= theta)
    positive = [r.height.value for r in rows if r.height.value - r.height.err > ZERO_HEIGHT]
    return CensusResult(
        B=B,
        theta=theta,
        window=W,
        count=len(witnesses),
        witnesses=witnesses,
        min_positive_height=min(positive) if positive else None,
        rows=tuple(rows),
    )
