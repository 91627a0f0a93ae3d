"""Places of Q: the archimedean absolute value and the p-adic ones."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, NamedTuple, Optional

from sympy import factorint, isprime

from .errors import ValidationError
from .forms import MapPair, normalize_integer, to_rat

#: Resultants with more digits than this are not factored.
MAX_FACTOR_DIGITS = 60


@dataclass(frozen=True, order=True)
class Place:
    """``p is None`` for the archimedean place, else the prime ``p``."""

    p: Optional[int] = None

    def __post_init__(self) -> None:
        if self.p is not None and not isprime(self.p):
            raise ValidationError(f"{self.p} is not prime")

    @classmethod
    def archimedean(cls) -> "Place":
        return cls(None)

    @classmethod
    def finite(cls, p: int) -> "Place":
        return cls(int(p))

    @classmethod
    def parse(cls, text: str) -> "Place":
        """``"inf"`` or ``"p:<prime>"``."""
        text = text.strip()
        if text == "inf":
            return cls(None)
        if text.startswith("p:"):
            try:
                return cls(int(text[2:]))
            except ValueError as exc:
                raise ValidationError(f"bad place {text!r}") from exc
        raise ValidationError(f"place must be 'inf' or 'p:<prime>', got {text!r}")

    @property
    def is_archimedean(self) -> bool:
        return self.p is None

    def __str__(self) -> str:
        return "inf" if self.p is None else f"p:{self.p}"


INF = Place(None)


class LogAbs(NamedTuple):
    """``value = log|x|_v``; at a finite place ``exact_valuation = v_p(x)``."""

    value: float
    exact_valuation: Optional[int] = None


def valuation(x: Any, p: int) -> int:
    """``v_p`` of a nonzero rational."""
    x = to_rat(x)
    if x == 0:
        raise ValidationError("valuation of 0 is +infinity")
    v = 0
    n, d = x.numerator, x.denominator
    while n % p == 0:
        n //= p
        v += 1
    while d % p == 0:
        d //= p
        v -= 1
    return v


def int_valuation(n: int, p: int, cap: Optional[int] = None) -> int:
    """``v_p`` of a nonzero integer, optionally capped (used on residues)."""
    if n == 0:
        if cap is None:
            raise ValidationError("valuation of 0 is +infinity")
        return cap
    v = 0
    while n % p == 0:
        n //= p
        v += 1
        if cap is not None and v >= cap:
            return cap
    return v


def log_abs_rational(x: Fraction) -> float:
    """``log|x|`` for a nonzero rational of any size."""
    return math.log(abs(x.numerator)) - math.log(x.denominator)


def log_abs(x: Any, v: Place) -> LogAbs:
    x = to_rat(x)
    if x == 0:
        raise ValidationError("log|0| is undefined")
    if v.is_archimedean:
        return LogAbs(log_abs_rational(x))
    e = valuation(x, v.p)
    return LogAbs(-e * math.log(v.p), e)


def abs_v(x: Any, v: Place) -> Fraction | float:
    """``|x|_v``: exact (a power of p) at finite places, float at infinity."""
    x = to_rat(x)
    if v.is_archimedean:
        return abs(float(x)) if abs(x) < 2**1000 else math.exp(log_abs_rational(x))
    if x == 0:
        return Fraction(0)
    return Fraction(v.p) ** (-valuation(x, v.p))


def epsilon_K(v: Place) -> int:
    return 1 if v.is_archimedean else 0


def _prime_support(n: int) -> list[int]:
    n = abs(n)
    if n <= 1:
        return []
    if len(str(n)) > MAX_FACTOR_DIGITS:
        from .errors import ResourceLimitError

        raise ResourceLimitError(f"refusing to factor a {len(str(n))}-digit resultant")
    return sorted(factorint(n))


def bad_primes(F: MapPair) -> list[int]:
    """Primes dividing the resultant of the integer-normalized lift."""
    res = normalize_integer(F).resultant
    return _prime_support(res.numerator)


def good_reduction(F: MapPair, p: int) -> bool:
    if not isprime(p):
        raise ValidationError(f"{p} is not prime")
    res = normalize_integer(F).resultant
    return res.numerator % p != 0


def product_formula_check(x: Any) -> float:
    """``sum_v log|x|_v`` over infinity and the primes of ``x``; zero in theory."""
    x = to_rat(x)
    if x == 0:
        raise ValidationError("product formula needs x != 0")
    primes = sorted(set(_prime_support(x.numerator)) | set(_prime_support(x.denominator)))
    terms = [log_abs(x, INF).value] + [log_abs(x, Place(p)).value for p in primes]
    return math.fsum(terms)
