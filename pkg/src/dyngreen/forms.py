"""Exact arithmetic on homogeneous binary forms over the rationals.

A degree-``d`` form is stored densely as ``d + 1`` coefficients, index ``i``
holding the coefficient of ``x**(d - i) * y**i``.  A :class:`MapPair` is a
pair of such forms of equal degree with nonzero resultant; it is the lift
``F = (F1, F2)`` of a rational map of the projective line.
"""
from __future__ import annotations

import math
import os
from dataclasses import InitVar, dataclass
from fractions import Fraction
from functools import cached_property, reduce
from typing import Any, Iterable, Iterator, NamedTuple, Sequence

from .errors import ResourceLimitError, ValidationError, ZeroResultantError

DEFAULT_MAX_BITS = 2**20


def max_bits() -> int:
    """Per-coefficient bit-size cap; ``DYNGREEN_MAX_BITS`` overrides it."""
    raw = os.environ.get("DYNGREEN_MAX_BITS")
    if raw is None:
        return DEFAULT_MAX_BITS
    try:
        value = int(raw)
    except ValueError as exc:
        raise ValidationError(f"DYNGREEN_MAX_BITS must be an integer, got {raw!r}") from exc
    if value <= 0:
        raise ValidationError("DYNGREEN_MAX_BITS must be positive")
    return value


def to_rat(value: Any) -> Fraction:
    """Parse an int, Fraction, or ``"p/q"`` string into a Fraction.

    Floats are refused: they would silently smuggle rounding into exact code.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ValidationError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"not a rational: {value!r}") from exc
    if hasattr(value, "numerator") and hasattr(value, "denominator"):
        # gmpy2.mpz / mpq and numpy integers
        return Fraction(int(value.numerator), int(value.denominator))
    raise ValidationError(f"not an exact rational: {value!r}")


def _bits(q: Fraction) -> int:
    return max(q.numerator.bit_length(), q.denominator.bit_length())


# ---------------------------------------------------------------------------
# exact linear algebra


def bareiss_det(matrix: Sequence[Sequence[int]]) -> int:
    """Fraction-free determinant of a square integer matrix."""
    a = [list(row) for row in matrix]
    n = len(a)
    if n == 0:
        return 1
    if any(len(row) != n for row in a):
        raise ValidationError("determinant needs a square matrix")
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        akk = a[k][k]
        rowk = a[k]
        for i in range(k + 1, n):
            rowi = a[i]
            aik = rowi[k]
            for j in range(k + 1, n):
                rowi[j] = (rowi[j] * akk - aik * rowk[j]) // prev
        prev = akk
    return sign * a[n - 1][n - 1]


def det_exact(matrix: Sequence[Sequence[Any]]) -> Fraction:
    """Exact determinant of a rational matrix.

    Each row is scaled by the lcm of its denominators, the integer matrix goes
    through :func:`bareiss_det`, and the row scalings are divided back out.
    """
    rows = [[to_rat(x) for x in row] for row in matrix]
    scale = 1
    int_rows = []
    for row in rows:
        lcm = reduce(math.lcm, (x.denominator for x in row), 1)
        scale *= lcm
        int_rows.append([x.numerator * (lcm // x.denominator) for x in row])
    return Fraction(bareiss_det(int_rows), scale)


def solve_exact(matrix: Sequence[Sequence[Any]], rhs: Sequence[Any]) -> list[Fraction]:
    """Solve a square rational system by Gauss-Jordan elimination."""
    n = len(matrix)
    a = [[to_rat(x) for x in row] + [to_rat(b)] for row, b in zip(matrix, rhs)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot is None:
            raise ZeroDivisionError("singular system")
        a[col], a[pivot] = a[pivot], a[col]
        inv = 1 / a[col][col]
        a[col] = [x * inv for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [row[n] for row in a]


# ---------------------------------------------------------------------------
# forms


def _convolve(a: Sequence[Fraction], b: Sequence[Fraction]) -> list[Fraction]:
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x == 0:
            continue
        for j, y in enumerate(b):
            if y:
                out[i + j] += x * y
    return out


@dataclass(frozen=True)
class BinaryForm:
    """Homogeneous polynomial in ``x, y``; ``coeffs[i]`` multiplies ``x^(d-i) y^i``."""

    coeffs: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if len(self.coeffs) == 0:
            raise ValidationError("a form needs at least one coefficient")
        object.__setattr__(self, "coeffs", tuple(to_rat(c) for c in self.coeffs))

    @classmethod
    def of(cls, coeffs: Iterable[Any]) -> "BinaryForm":
        return cls(tuple(coeffs))

    @classmethod
    def monomial(cls, a: int, b: int, c: Any = 1) -> "BinaryForm":
        """``c * x^a * y^b``."""
        coeffs = [Fraction(0)] * (a + b + 1)
        coeffs[b] = to_rat(c)
        return cls(tuple(coeffs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def __call__(self, x: Any, y: Any) -> Any:
        acc = self.coeffs[0]
        ypow = 1
        for c in self.coeffs[1:]:
            ypow = ypow * y
            acc = acc * x + c * ypow
        return acc

    def __add__(self, other: "BinaryForm") -> "BinaryForm":
        if not isinstance(other, BinaryForm):
            return NotImplemented
        if other.degree != self.degree:
            raise ValidationError("cannot add forms of different degree")
        return BinaryForm(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self) -> "BinaryForm":
        return BinaryForm(tuple(-c for c in self.coeffs))

    def __sub__(self, other: "BinaryForm") -> "BinaryForm":
        return self + (-other)

    def __mul__(self, other: Any) -> "BinaryForm":
        if isinstance(other, BinaryForm):
            return BinaryForm(tuple(_convolve(self.coeffs, other.coeffs)))
        c = to_rat(other)
        return BinaryForm(tuple(c * a for a in self.coeffs))

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "BinaryForm":
        if n < 0:
            raise ValidationError("negative power of a form")
        result = BinaryForm((Fraction(1),))
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def compose(self, g1: "BinaryForm", g2: "BinaryForm") -> "BinaryForm":
        """``self(g1, g2)`` by homogeneous Horner: ``acc <- acc*g1 + c_i*g2^i``."""
        if g1.degree != g2.degree:
            raise ValidationError("substituted forms must share a degree")
        acc = BinaryForm((self.coeffs[0],))
        g2pow = BinaryForm((Fraction(1),))
        for c in self.coeffs[1:]:
            g2pow = g2pow * g2
            acc = acc * g1 + g2pow * c
        return acc

    def max_bits(self) -> int:
        return max(_bits(c) for c in self.coeffs)

    def __str__(self) -> str:
        d = self.degree
        terms = []
        for i, c in enumerate(self.coeffs):
            if c == 0:
                continue
            mono = "*".join(
                f"{v}^{e}" if e > 1 else v for v, e in (("x", d - i), ("y", i)) if e > 0
            )
            if not mono:
                terms.append(str(c))
            elif c == 1:
                terms.append(mono)
            elif c == -1:
                terms.append("-" + mono)
            else:
                terms.append(f"{c}*{mono}")
        return " + ".join(terms).replace("+ -", "- ") if terms else "0"


# ---------------------------------------------------------------------------
# resultants


def sylvester_matrix(a: Sequence[Any], b: Sequence[Any]) -> list[list[Fraction]]:
    """Sylvester matrix of coefficient lists (leading coefficient first).

    Rows of ``a`` come first.  For binary forms the full coefficient lists are
    used, so a vanishing leading coefficient is handled homogeneously.
    """
    a = [to_rat(x) for x in a]
    b = [to_rat(x) for x in b]
    m, n = len(a) - 1, len(b) - 1
    size = m + n
    rows = []
    for i in range(n):
        rows.append([Fraction(0)] * i + a + [Fraction(0)] * (size - m - 1 - i))
    for i in range(m):
        rows.append([Fraction(0)] * i + b + [Fraction(0)] * (size - n - 1 - i))
    return rows


def sylvester_resultant(a: Sequence[Any], b: Sequence[Any]) -> Fraction:
    return det_exact(sylvester_matrix(a, b))


def resultant(f1: BinaryForm, f2: BinaryForm) -> Fraction:
    """Homogeneous resultant of two forms of the same degree ``d >= 1``."""
    if f1.degree != f2.degree:
        raise ValidationError(f"degree mismatch: {f1.degree} vs {f2.degree}")
    if f1.degree < 1:
        raise ValidationError("resultant needs degree >= 1")
    return sylvester_resultant(f1.coeffs, f2.coeffs)


# ---------------------------------------------------------------------------
# lifts


@dataclass(frozen=True)
class Lift:
    """A nonzero coordinate pair representing a point of the projective line.

    Coordinates are Fractions for exact work or complex/float numbers in
    archimedean numerics.
    """

    z0: Any
    z1: Any

    def __post_init__(self) -> None:
        if self.z0 == 0 and self.z1 == 0:
            raise ValidationError("(0, 0) is not a lift of a projective point")

    def __iter__(self) -> Iterator[Any]:
        yield self.z0
        yield self.z1

    def is_exact(self) -> bool:
        return isinstance(self.z0, (int, Fraction)) and isinstance(self.z1, (int, Fraction))

    def scaled(self, c: Any) -> "Lift":
        return Lift(c * self.z0, c * self.z1)

    def __str__(self) -> str:
        return f"{self.z0}:{self.z1}"


def as_lift(z: Any) -> Lift:
    """Coerce a Lift, a pair, or an ``"a:b"`` string into a :class:`Lift`.

    Integer and string coordinates become Fractions; floats and complex
    numbers are kept as given.
    """
    if isinstance(z, Lift):
        return z
    if isinstance(z, str):
        parts = z.split(":")
        if len(parts) != 2:
            raise ValidationError(f"point must look like 'a:b', got {z!r}")
        return Lift(to_rat(parts[0]), to_rat(parts[1]))
    z0, z1 = z

    def conv(c: Any) -> Any:
        if isinstance(c, (bool,)):
            raise ValidationError("booleans are not coordinates")
        if isinstance(c, (int, str)):
            return to_rat(c)
        return c

    return Lift(conv(z0), conv(z1))


def wedge(z: Any, w: Any) -> Any:
    """``z0*w1 - z1*w0``."""
    z0, z1 = z
    w0, w1 = w
    return z0 * w1 - z1 * w0


# ---------------------------------------------------------------------------
# maps


class CofactorIdentity(NamedTuple):
    """Forms of degree ``d-1`` with ``g11 F1 + g12 F2 = Res x^(2d-1)`` and
    ``g21 F1 + g22 F2 = Res y^(2d-1)``."""

    g11: BinaryForm
    g12: BinaryForm
    g21: BinaryForm
    g22: BinaryForm


@dataclass(frozen=True)
class MapPair:
    """Lift ``F = (F1, F2)`` of a degree ``d >= 2`` rational map."""

    F1: BinaryForm
    F2: BinaryForm
    label: str = ""
    check: InitVar[bool] = True

    def __post_init__(self, check: bool) -> None:
        if self.F1.degree != self.F2.degree:
            raise ValidationError(f"degree mismatch: {self.F1.degree} vs {self.F2.degree}")
        if self.F1.degree < 2:
            raise ValidationError("maps must have degree >= 2")
        if check and self.resultant == 0:
            raise ZeroResultantError("F1 and F2 share a common linear factor (Res = 0)")

    @classmethod
    def from_coeffs(cls, f1: Iterable[Any], f2: Iterable[Any], label: str = "") -> "MapPair":
        return cls(BinaryForm.of(f1), BinaryForm.of(f2), label)

    @property
    def d(self) -> int:
        return self.F1.degree

    @cached_property
    def resultant(self) -> Fraction:
        return resultant(self.F1, self.F2)

    def __call__(self, z: Any) -> Lift:
        return eval_map(self, z)

    def scaled(self, gamma: Any) -> "MapPair":
        return MapPair(self.F1 * gamma, self.F2 * gamma, self.label)

    def coefficients(self) -> tuple[tuple[Fraction, ...], tuple[Fraction, ...]]:
        return self.F1.coeffs, self.F2.coeffs

    def __str__(self) -> str:
        return f"({self.F1}, {self.F2})"


def eval_map(F: MapPair, z: Any) -> Lift:
    z0, z1 = z
    return Lift(F.F1(z0, z1), F.F2(z0, z1))


def _guard(F: MapPair) -> None:
    limit = max_bits()
    bits = max(F.F1.max_bits(), F.F2.max_bits())
    if bits > limit:
        raise ResourceLimitError(f"coefficient size {bits} bits exceeds limit {limit}")


def compose(F: MapPair, G: MapPair) -> MapPair:
    """The lift ``F o G``; its resultant is nonzero whenever both factors' are."""
    H = MapPair(F.F1.compose(G.F1, G.F2), F.F2.compose(G.F1, G.F2), check=False)
    _guard(H)
    return H


def iterate(F: MapPair, n: int) -> MapPair:
    if n < 1:
        raise ValidationError("iterate needs n >= 1")
    G = F
    for _ in range(n - 1):
        G = compose(F, G)
    return G


def normalizing_scalar(F: MapPair) -> Fraction:
    """The positive ``c`` making ``c * F`` integral with coprime coefficients."""
    coeffs = F.F1.coeffs + F.F2.coeffs
    den = reduce(math.lcm, (c.denominator for c in coeffs), 1)
    num = reduce(math.gcd, (c.numerator * (den // c.denominator) for c in coeffs), 0)
    return Fraction(den, num)


def normalize_integer(F: MapPair) -> MapPair:
    """Scale ``F`` by a positive rational so its coefficients are coprime integers."""
    c = normalizing_scalar(F)
    if c == 1:
        return F
    return MapPair(F.F1 * c, F.F2 * c, F.label, check=False)


def cofactors(F: MapPair) -> CofactorIdentity:
    """Solve for the Bezout cofactors in the degree ``2d-1`` monomial basis."""
    d = F.d
    cols = []
    for form in (F.F1, F.F2):
        for j in range(d):
            cols.append((BinaryForm.monomial(d - 1 - j, j) * form).coeffs)
    size = 2 * d
    matrix = [[cols[c][r] for c in range(size)] for r in range(size)]
    res = F.resultant
    try:
        top = solve_exact(matrix, [res] + [0] * (size - 1))
        bottom = solve_exact(matrix, [0] * (size - 1) + [res])
    except ZeroDivisionError as exc:
        raise ZeroResultantError("cofactor system is singular: Res(F) = 0") from exc
    return CofactorIdentity(
        BinaryForm(tuple(top[:d])),
        BinaryForm(tuple(top[d:])),
        BinaryForm(tuple(bottom[:d])),
        BinaryForm(tuple(bottom[d:])),
    )


class PowerCheck(NamedTuple):
    exponent: int
    verified: bool
    sign: int


def iterate_resultant_exponent(d: int, k: int) -> int:
    """Degree bookkeeping: ``Res(F^(k))`` is ``Res(F)`` to this power, up to sign."""
    return d ** (k - 1) * (d**k - 1) // (d - 1)


def resultant_power_check(F: MapPair, k: int) -> PowerCheck:
    """Check ``Res(F^(k)) = +-Res(F)^e`` exactly, returning ``e`` and the sign."""
    res = F.resultant
    res_k = iterate(F, k).resultant
    e = iterate_resultant_exponent(F.d, k)
    if abs(res) != 1:
        # infer the exponent from sizes independently of the bookkeeping formula
        approx = (math.log(abs(res_k.numerator)) - math.log(res_k.denominator)) / (
            math.log(abs(res.numerator)) - math.log(res.denominator)
        ) if res_k != 0 else 0.0
        e = max(1, round(approx))
    target = res**e
    if res_k == target:
        return PowerCheck(e, True, 1)
    if res_k == -target:
        return PowerCheck(e, True, -1)
    return PowerCheck(e, False, 0)
