"""Special bases of homogeneous polynomials built from iterates of a map.

For ``N = t * d**k`` (``2 <= t <= 2d-1``, ``k >= 1``) the products

    x^a0 y^b0 * prod_{j=1..k} F1^(j)^aj F2^(j)^bj,

with ``aj + bj = d - 1`` for ``j < k`` and ``ak + bk = t - 1``, give ``N``
forms of degree ``N - 1``.  Their matrix against the monomial basis has
determinant ``+-Res(F)^r``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .errors import ResourceLimitError, ValidationError
from .forms import BinaryForm, MapPair, det_exact, iterate

#: Default size guard on N for explicit basis construction.
MAX_N = 64


@dataclass(frozen=True)
class SigmaIndex:
    N: int
    t: int
    k: int
    d: int

    def __post_init__(self) -> None:
        if not (2 <= self.t <= 2 * self.d - 1) or self.k < 1:
            raise ValidationError(f"(t={self.t}, k={self.k}) is out of range for d={self.d}")
        if self.N != self.t * self.d**self.k:
            raise ValidationError(f"N={self.N} != t*d^k")

    @classmethod
    def of(cls, t: int, k: int, d: int) -> "SigmaIndex":
        return cls(t * d**k, t, k, d)


@dataclass(frozen=True)
class BasisFamily:
    m: int
    exponents: tuple[tuple[int, ...], ...]
    members: tuple[BinaryForm, ...]


def sigma_decompose(N: int, d: int) -> Optional[SigmaIndex]:
    """The ``(t, k)`` with ``N = t d^k``, or None if ``N`` is not in the set.

    Two decompositions would need ``t' = t d^j >= 2d``, so the witness is
    unique; the loop still prefers the largest ``k``.
    """
    if N < 2 or d < 2:
        return None
    k = 0
    while d ** (k + 1) <= N:
        k += 1
    while k >= 1:
        q, r = divmod(N, d**k)
        if r == 0 and 2 <= q <= 2 * d - 1:
            return SigmaIndex(N, q, k, d)
        k -= 1
    return None


def sigma_members(limit: int, d: int) -> list[int]:
    """Sorted elements of the set that are ``<= limit``."""
    out = []
    k = 1
    while 2 * d**k <= limit:
        out.extend(t * d**k for t in range(2, 2 * d) if t * d**k <= limit)
        k += 1
    return sorted(out)


def nearest_sigma(N: int, d: int) -> int:
    """Largest member of the set that is ``<= N``; requires ``N >= 2d``."""
    if N < 2 * d:
        raise ValidationError(f"nearest_sigma needs N >= 2d = {2 * d}, got {N}")
    return sigma_members(N, d)[-1]


def alpha(idx: SigmaIndex) -> int:
    return idx.t - 1 + (idx.d - 1) * idx.k


def prop_exponent(idx: SigmaIndex) -> Fraction:
    """``r = N^2/(2d(d-1)) - N(t + k(d-1))/(2d(d-1))``."""
    N, t, k, d = idx.N, idx.t, idx.k, idx.d
    return Fraction(N * N - N * (t + k * (d - 1)), 2 * d * (d - 1))


def _exponent_tuples(idx: SigmaIndex) -> list[tuple[int, ...]]:
    ranges = [range(idx.d - 1, -1, -1)] * idx.k + [range(idx.t - 1, -1, -1)]
    return list(itertools.product(*ranges))


def build_H(F: MapPair, idx: SigmaIndex, max_n: int = MAX_N) -> BasisFamily:
    """Members ordered lexicographically (descending) on ``(a0, a1, ..., ak)``."""
    if idx.d != F.d:
        raise ValidationError("index was built for a different degree")
    if idx.N > max_n:
        raise ResourceLimitError(f"N={idx.N} exceeds the basis size guard {max_n}")
    d, k = F.d, idx.k
    x, y = BinaryForm.monomial(1, 0), BinaryForm.monomial(0, 1)
    levels = [(x, y)] + [(G.F1, G.F2) for G in (iterate(F, j) for j in range(1, k + 1))]
    tops = [d - 1] * k + [idx.t - 1]
    # powers[j][a] = P^a * Q^(top - a) for level j
    powers = []
    for (P, Q), top in zip(levels, tops):
        powers.append([P**a * Q ** (top - a) for a in range(top + 1)])
    members = []
    exps = _exponent_tuples(idx)
    for e in exps:
        prod = BinaryForm((Fraction(1),))
        for j, a in enumerate(e):
            prod = prod * powers[j][a]
        members.append(prod)
    m = idx.N - 1
    assert all(h.degree == m for h in members)
    return BasisFamily(m, tuple(exps), tuple(members))


def change_matrix(F: MapPair, idx: SigmaIndex, max_n: int = MAX_N) -> list[list[Fraction]]:
    """Entry ``(i, j)``: coefficient of ``x^(m-i) y^i`` in the ``j``-th member."""
    fam = build_H(F, idx, max_n)
    n = idx.N
    return [[fam.members[j].coeffs[i] for j in range(n)] for i in range(n)]


def change_matrix_det(F: MapPair, idx: SigmaIndex, max_n: int = MAX_N) -> Fraction:
    return det_exact(change_matrix(F, idx, max_n))


@dataclass(frozen=True)
class BasisCheck:
    N: int
    t: int
    k: int
    r: int
    det: Fraction
    res_power: Fraction
    verified: bool

    def as_dict(self) -> dict:
        return {
            "N": self.N,
            "t": self.t,
            "k": self.k,
            "r": self.r,
            "det": str(self.det),
            "res_power": str(self.res_power),
            "verified": self.verified,
        }


def basis_check(F: MapPair, idx: SigmaIndex, max_n: int = MAX_N) -> BasisCheck:
    r = prop_exponent(idx)
    if r.denominator != 1:
        raise AssertionError(f"non-integral exponent r={r} for {idx}")
    det = change_matrix_det(F, idx, max_n)
    power = F.resultant ** int(r)
    return BasisCheck(idx.N, idx.t, idx.k, int(r), det, power, abs(det) == abs(power))


def verify_proposition(F: MapPair, idx: SigmaIndex, max_n: int = MAX_N) -> bool:
    """``|det A| == |Res(F)|^r`` exactly."""
    return basis_check(F, idx, max_n).verified


def alpha_upper(idx: SigmaIndex) -> float:
    """``(d-1)(log_d N + 2)``."""
    return (idx.d - 1) * (math.log(idx.N) / math.log(idx.d) + 2)
