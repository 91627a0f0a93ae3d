"""Discriminant sums, Mahler-type inequalities and explicit lower bounds."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Any, NamedTuple, Optional, Sequence

import numpy as np

from .basis import SigmaIndex, alpha, nearest_sigma, sigma_decompose
from .dynheight import (
    DEFAULT_TOL,
    escape_radius_bound,
    hhat,
    hhat_many,
    log_abs_wedge,
    normalize_lift,
    r_of,
)
from .errors import DuplicatePointError, ValidationError
from .forms import Lift, MapPair, as_lift, det_exact, sylvester_resultant, to_rat, wedge
from .places import INF, Place, epsilon_K, valuation

_EPS = 2.0**-52


class SumValue(NamedTuple):
    value: float
    err: float


# ---------------------------------------------------------------------------
# discriminant sums


def check_distinct(lifts: Sequence[Lift]) -> None:
    for i in range(len(lifts)):
        for j in range(i + 1, len(lifts)):
            if wedge(lifts[i], lifts[j]) == 0:
                raise DuplicatePointError(f"points {i} and {j} coincide: {lifts[i]} ~ {lifts[j]}")


def local_heights(F: MapPair, lifts: Sequence[Lift], v: Place, tol: float) -> tuple[list[float], list[float]]:
    """Heights of many lifts, vectorized at infinity."""
    if v.is_archimedean:
        vals, err, _ = hhat_many(F, lifts, tol)
        return [float(x) for x in vals], [err] * len(lifts)
    hs = [hhat(F, z, v, tol) for z in lifts]
    return [h.value for h in hs], [h.err for h in hs]


def _wedge_logs(lifts: Sequence[Lift], v: Place) -> tuple[list[float], float]:
    """``log|zi ^ zj|`` for ``i < j`` with a rounding allowance for float lifts."""
    logs = []
    rounding = 0.0
    n = len(lifts)
    for i in range(n):
        zi = lifts[i]
        for j in range(i + 1, n):
            zj = lifts[j]
            lw = log_abs_wedge(zi, zj, v)
            logs.append(lw)
            if not (zi.is_exact() and zj.is_exact()):
                size = abs(zi.z0 * zj.z1) + abs(zi.z1 * zj.z0)
                rounding += 4 * _EPS * (size / math.exp(lw) + abs(lw))
    return logs, rounding


def dsum(F: MapPair, points: Sequence[Any], v: Place = INF, tol: float = DEFAULT_TOL) -> SumValue:
    """``sum_{i != j} g(z_i, z_j)`` over pairwise distinct points."""
    lifts = [as_lift(z) for z in points]
    if len(lifts) < 2:
        raise ValidationError("a discriminant sum needs N >= 2 points")
    check_distinct(lifts)
    n = len(lifts)
    heights, errs = local_heights(F, lifts, v, tol)
    logs, rounding = _wedge_logs(lifts, v)
    r = r_of(F, v)
    terms = [-2.0 * lw for lw in logs] + [2.0 * (n - 1) * h for h in heights]
    terms.append(-n * (n - 1) * r)
    value = math.fsum(terms)
    err = 2.0 * (n - 1) * math.fsum(errs) + 2.0 * rounding + 4 * _EPS * math.fsum(abs(t) for t in terms)
    return SumValue(value, err)


def naive_green(z: Any, w: Any) -> float:
    """Three-case Green's function of ``z^2`` on ``P^1(C)``; ``None`` or
    ``"inf"`` denotes the point at infinity."""

    def is_inf(a: Any) -> bool:
        return a is None or (isinstance(a, str) and a == "inf") or (
            isinstance(a, float) and math.isinf(a)
        )

    def log_plus(a: Any) -> float:
        m = abs(complex(a))
        return math.log(m) if m > 1 else 0.0

    if is_inf(z) and is_inf(w):
        raise ValidationError("g(z, z) is +infinity")
    if is_inf(w):
        return log_plus(z)
    if is_inf(z):
        return log_plus(w)
    diff = complex(z) - complex(w)
    if isinstance(z, (int, Fraction)) and isinstance(w, (int, Fraction)):
        diff = Fraction(z) - Fraction(w)
    if diff == 0:
        raise ValidationError("g(z, z) is +infinity")
    return -math.log(abs(complex(diff))) + log_plus(z) + log_plus(w)


# ---------------------------------------------------------------------------
# polynomials


def _strip(coeffs: Sequence[Any]) -> list:
    coeffs = list(coeffs)
    if not coeffs or coeffs[0] == 0:
        raise ValidationError("leading coefficient must be nonzero")
    return coeffs


def _is_exact(coeffs: Sequence[Any]) -> bool:
    return all(isinstance(c, (int, Fraction, str)) and not isinstance(c, bool) for c in coeffs)


def aberth_roots(coeffs: Sequence[Any], tol: float = 1e-12, max_iter: int = 500) -> np.ndarray:
    """All complex roots by Aberth-Ehrlich iteration with Newton polishing.

    ``coeffs`` are leading-first.
    """
    c = np.array([complex(x) for x in _strip(coeffs)])
    zeros = 0
    while len(c) > 1 and c[-1] == 0:
        c = c[:-1]
        zeros += 1
    n = len(c) - 1
    if n == 0:
        return np.zeros(zeros, dtype=complex)
    c = c / c[0]
    if n == 1:
        return np.concatenate([[-c[1]], np.zeros(zeros, dtype=complex)])
    dc = c[:-1] * np.arange(n, 0, -1)
    radius = 2.0 * max(abs(c[i]) ** (1.0 / i) for i in range(1, n + 1))
    center = -c[1] / n
    z = center + radius * np.exp(1j * (2 * np.pi * np.arange(n) / n + 0.4))
    for _ in range(max_iter):
        p = np.polyval(c, z)
        dp = np.polyval(dc, z)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(dp != 0, p / dp, p)
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, 1.0)
            inv = 1.0 / diff
            np.fill_diagonal(inv, 0.0)
            s = inv.sum(axis=1)
            w = ratio / (1.0 - ratio * s)
        w = np.where(np.isfinite(w), w, 1e-3)
        z = z - w
        if np.all(np.abs(w) <= tol * np.maximum(1.0, np.abs(z))):
            break
    for _ in range(3):
        p = np.polyval(c, z)
        dp = np.polyval(dc, z)
        step = np.where(dp != 0, p / np.where(dp != 0, dp, 1.0), 0.0)
        better = np.abs(np.polyval(c, z - step)) <= np.abs(p)
        z = np.where(better, z - step, z)
    return np.concatenate([z, np.zeros(zeros, dtype=complex)])


def mahler_measure(coeffs: Sequence[Any]) -> float:
    """``|a0| prod max(1, |root|)``."""
    coeffs = _strip(coeffs)
    roots = aberth_roots(coeffs)
    a0 = abs(complex(coeffs[0]) if not _is_exact(coeffs) else float(to_rat(coeffs[0])))
    return a0 * float(np.prod(np.maximum(1.0, np.abs(roots))))


def discriminant(coeffs: Sequence[Any]) -> Fraction | complex:
    """``a0^(2N-2) prod_{i<j} (ai - aj)^2``; exact via ``Res(f, f')`` when the
    coefficients are rational."""
    coeffs = _strip(coeffs)
    N = len(coeffs) - 1
    if N < 2:
        raise ValidationError("discriminant needs degree >= 2")
    if _is_exact(coeffs):
        f = [to_rat(c) for c in coeffs]
        df = [c * (N - i) for i, c in enumerate(f[:-1])]
        sign = -1 if (N * (N - 1) // 2) % 2 else 1
        return sign * sylvester_resultant(f, df) / f[0]
    a0 = complex(coeffs[0])
    roots = aberth_roots(coeffs)
    prod = complex(1)
    for i in range(N):
        for j in range(i + 1, N):
            prod *= (roots[i] - roots[j]) ** 2
    return a0 ** (2 * N - 2) * prod


def mahler_inequality_check(coeffs: Sequence[Any], relative: bool = False) -> float:
    """``N^N M(f)^(2N-2) - |Disc(f)|``, nonnegative in theory."""
    coeffs = _strip(coeffs)
    N = len(coeffs) - 1
    M = mahler_measure(coeffs)
    lhs = float(N) ** N * M ** (2 * N - 2)
    disc = discriminant(coeffs)
    margin = lhs - abs(complex(disc) if not isinstance(disc, Fraction) else float(disc))
    return margin / lhs if relative else margin


# ---------------------------------------------------------------------------
# Hadamard and Vandermonde


def hadamard_check(matrix: Sequence[Sequence[Any]], v: Place = INF) -> float | Fraction:
    """``prod ||column|| - |det|``: L2 columns at infinity, exact sup-norms at
    a finite place."""
    if v.is_archimedean:
        M = np.array(matrix, dtype=complex if any(
            isinstance(x, complex) for row in matrix for x in row) else float)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ValidationError("Hadamard check needs a square matrix")
        norms = np.linalg.norm(M, axis=0)
        return float(np.prod(norms)) - abs(complex(np.linalg.det(M)))
    rows = [[to_rat(x) for x in row] for row in matrix]
    n = len(rows)
    if any(len(row) != n for row in rows):
        raise ValidationError("Hadamard check needs a square matrix")
    p = v.p

    def pabs(x: Fraction) -> Fraction:
        return Fraction(0) if x == 0 else Fraction(p) ** (-valuation(x, p))

    prod = Fraction(1)
    for j in range(n):
        prod *= max(pabs(rows[i][j]) for i in range(n))
    return prod - pabs(det_exact(rows))


def vandermonde_matrix(lifts: Sequence[Any]) -> list[list[Any]]:
    lifts = [as_lift(z) for z in lifts]
    n = len(lifts)
    return [[z.z0 ** (n - 1 - j) * z.z1**j for j in range(n)] for z in lifts]


def vandermonde_check(lifts: Sequence[Any]) -> float:
    """Relative gap between ``prod_{i!=j} |xi yj - xj yi|`` and ``|det S|^2``."""
    lifts = [as_lift(z) for z in lifts]
    check_distinct(lifts)
    S = vandermonde_matrix(lifts)
    if all(z.is_exact() for z in lifts):
        lhs = Fraction(1)
        for i, zi in enumerate(lifts):
            for j, zj in enumerate(lifts):
                if i != j:
                    lhs *= abs(Fraction(wedge(zi, zj)))
        rhs = det_exact(S) ** 2
        return float(abs(lhs - rhs) / max(lhs, rhs))
    logs = [math.log(abs(wedge(zi, zj))) for i, zi in enumerate(lifts)
            for j, zj in enumerate(lifts) if i != j]
    log_lhs = math.fsum(logs)
    log_rhs = 2.0 * math.log(abs(np.linalg.det(np.array(S, dtype=complex))))
    return abs(math.expm1(log_lhs - log_rhs))


# ---------------------------------------------------------------------------
# explicit bounds


def _R(F: MapPair, v: Place, R_up: Optional[float]) -> float:
    return escape_radius_bound(F, v).R_up if R_up is None else R_up


def technical_rhs(F: MapPair, v: Place, idx: SigmaIndex, R_up: Optional[float] = None) -> float:
    """Lower bound for ``sum_{i!=j} -log|zi ^ zj|`` over lifts in the filled
    Julia set."""
    N, a = idx.N, alpha(idx)
    r = r_of(F, v)
    R = _R(F, v, R_up)
    return r * N * N - epsilon_K(v) * N * math.log(N) - 2 * math.log(R) * a * N - r * (1 + a) * N


def corollary_rhs(F: MapPair, v: Place, idx: SigmaIndex, R_up: Optional[float] = None) -> float:
    """Lower bound for the discriminant sum when ``N`` is in the index set."""
    N, a = idx.N, alpha(idx)
    R = _R(F, v, R_up)
    return -epsilon_K(v) * N * math.log(N) - (2 * math.log(R) + r_of(F, v)) * a * N


@dataclass(frozen=True)
class ConstantBreakdown:
    C: float
    C_prime: float
    C_small: float
    R_up: float
    r_F: float
    g_lower: float  # certified lower bound for g on distinct points


def effective_constant(F: MapPair, v: Place = INF) -> ConstantBreakdown:
    """Assemble ``C`` with ``D >= -C N log N`` for all ``N >= 2``.

    For ``N >= 2d`` the ``corollary_rhs`` bound at the nearest index ``N' <= N`` and
    monotonicity of normalized infima give ``C = 2C'``.  Below ``2d`` the
    pointwise bound ``g >= -(eps log 2 + 2 log R + r)`` is used instead.
    """
    d = F.d
    eps = epsilon_K(v)
    R = escape_radius_bound(F, v).R_up
    r = r_of(F, v)
    X = max(0.0, 2 * math.log(R) + r)
    C_prime = eps + X * (d - 1) * (1 / math.log(d) + 2 / math.log(2 * d))
    g_low = eps * math.log(2) + 2 * math.log(R) + r
    C_small = max(0.0, g_low) * (2 * d - 2) / math.log(2 * d - 1)
    return ConstantBreakdown(max(2 * C_prime, C_small), C_prime, C_small, R, r, -g_low)


def effective_C(F: MapPair, v: Place = INF) -> float:
    return effective_constant(F, v).C


@dataclass(frozen=True)
class BoundReport:
    N: int
    place: str
    r_F: float
    R_up: float
    alpha: Optional[int]
    epsilon_K: int
    rhs_technical: Optional[float]
    rhs_corollary: Optional[float]
    C_effective: float
    observed_sum: float
    observed_err: float
    wedge_sum: Optional[float]
    nlogn_ok: bool
    corollary_ok: Optional[bool]
    technical_ok: Optional[bool]

    def as_dict(self) -> dict:
        return asdict(self)


def normalized_wedge_sum(F: MapPair, lifts: Sequence[Lift], v: Place, tol: float) -> float:
    """``sum_{i!=j} -log|zi ^ zj|`` after moving every lift into the filled
    Julia set."""
    norm = [normalize_lift(F, z, v, tol) for z in lifts]
    logs, _ = _wedge_logs(norm, v)
    return -2.0 * math.fsum(logs)


def bound_report(F: MapPair, points: Sequence[Any], v: Place = INF, tol: float = DEFAULT_TOL) -> BoundReport:
    """Evaluate every bound on one configuration and compare."""
    lifts = [as_lift(z) for z in points]
    D = dsum(F, lifts, v, tol)
    N = len(lifts)
    const = effective_constant(F, v)
    idx = sigma_decompose(N, F.d)
    nlogn_ok = D.value + D.err >= -const.C * N * math.log(N)
    a = rhs_t = rhs_c = wsum = None
    cor_ok = tech_ok = None
    if idx is not None:
        a = alpha(idx)
        rhs_t = technical_rhs(F, v, idx, const.R_up)
        rhs_c = corollary_rhs(F, v, idx, const.R_up)
        cor_ok = D.value + D.err >= rhs_c
        wsum = normalized_wedge_sum(F, lifts, v, tol)
        slack = 2.0 * N * N * max(tol, D.err / max(1, N * (N - 1))) + 1e-9 * (1 + abs(wsum))
        tech_ok = wsum + slack >= rhs_t
    return BoundReport(
        N=N,
        place=str(v),
        r_F=const.r_F,
        R_up=const.R_up,
        alpha=a,
        epsilon_K=epsilon_K(v),
        rhs_technical=rhs_t,
        rhs_corollary=rhs_c,
        C_effective=const.C,
        observed_sum=D.value,
        observed_err=D.err,
        wedge_sum=wsum,
        nlogn_ok=nlogn_ok,
        corollary_ok=cor_ok,
        technical_ok=tech_ok,
    )


def roots_of_unity(N: int) -> list[Lift]:
    """Lifts ``(zeta, 1)`` of the ``N``-th roots of unity."""
    out = []
    for k in range(N):
        if 4 * k == N:
            z = 1j
        elif 2 * k == N:
            z = -1.0 + 0j
        elif 4 * k == 3 * N:
            z = -1j
        else:
            z = complex(math.cos(2 * math.pi * k / N), math.sin(2 * math.pi * k / N))
        out.append(Lift(z, 1.0 + 0j))
    return out


def random_points(rng: np.random.Generator, n: int, v: Place, height: int = 20) -> list[Lift]:
    """``n`` projectively distinct points for sampling experiments.

    At infinity a mixture of complex points near the unit circle, wide-range
    points, and rationals; at a finite place small-height rationals including
    the point at infinity.
    """
    seen: set = set()
    out: list[Lift] = []
    while len(out) < n:
        kind = rng.integers(0, 3) if v.is_archimedean else 2
        if kind == 0:
            r = float(np.exp(rng.normal(0, 0.3)))
            th = float(rng.uniform(0, 2 * math.pi))
            z = Lift(complex(r * math.cos(th), r * math.sin(th)), 1.0 + 0j)
            key = (round(z.z0.real, 12), round(z.z0.imag, 12))
        elif kind == 1:
            z = Lift(complex(rng.normal(0, 3), rng.normal(0, 3)), complex(rng.normal(), rng.normal()))
            q = z.z0 / z.z1 if z.z1 != 0 else None
            key = None if q is None else (round(q.real, 12), round(q.imag, 12))
        else:
            a = int(rng.integers(-height, height + 1))
            b = int(rng.integers(0, height + 1))
            if a == 0 and b == 0:
                continue
            g = math.gcd(a, b)
            a, b = a // g, b // g
            if b == 0:
                a = 1
            z = Lift(Fraction(a), Fraction(b))
            q = Fraction(a, b) if b else None
            key = (q.numerator, q.denominator) if q is not None else ("inf",)
        if key in seen:
            continue
        if any(wedge(z, w) == 0 for w in out):
            continue
        seen.add(key)
        out.append(z)
    return out


def nearest_index(N: int, d: int) -> SigmaIndex:
    idx = sigma_decompose(nearest_sigma(N, d), d)
    assert idx is not None
    return idx
