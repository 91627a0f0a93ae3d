"""Homogeneous transfinite diameter of the filled Julia set.

``d0_n(K)`` is a supremum over ``n``-point configurations in ``K``; any
admissible configuration therefore gives a lower estimate.  Configurations
are searched by exchange moves over a candidate pool drawn from backward
orbits (``F^-1(K) = K``) and random proposals, optionally followed by a
continuous polish at the archimedean place.  Every returned lift is
rescaled so its height is certified ``<= 0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from .bounds import effective_C
from .dynheight import DEFAULT_TOL, hhat, hhat_many, normalize_lift, r_of
from .errors import ValidationError
from .forms import Lift, MapPair, wedge
from .places import INF, Place, valuation

#: Archimedean pools grow by backward images until they hold this many
#: candidates per configuration point.
POOL_FACTOR = 6
MIN_POOL = 48
MAX_DEPTH = 10


@dataclass(frozen=True)
class Configuration:
    n: int
    lifts: tuple[Lift, ...]
    objective: float  # mean of log|zi ^ zj| over ordered pairs i != j
    heights: tuple[float, ...] = field(default=())
    iterations: int = 0  # exchange passes over all restarts


@dataclass(frozen=True)
class TfdRow:
    n: int
    estimate: float
    bound: float
    slack: float
    iterations: int
    chain_rhs: float
    chain_ok: bool
    bound_ok: bool


# ---------------------------------------------------------------------------
# candidate pools


def _chordal(z: Sequence[complex], w: Sequence[complex]) -> float:
    nz = math.hypot(abs(z[0]), abs(z[1]))
    nw = math.hypot(abs(w[0]), abs(w[1]))
    return abs(z[0] * w[1] - z[1] * w[0]) / (nz * nw)


def preimages(F: MapPair, target: Sequence[complex]) -> list[tuple[complex, complex]]:
    """Points ``u`` with ``F(u)`` proportional to ``target`` (archimedean)."""
    b0, b1 = complex(target[0]), complex(target[1])
    c1 = np.array([complex(c) for c in F.F1.coeffs])
    c2 = np.array([complex(c) for c in F.F2.coeffs])
    poly = b1 * c1 - b0 * c2
    out: list[tuple[complex, complex]] = []
    scale = float(np.max(np.abs(poly)))
    if scale == 0:
        return out
    lead = 0
    while lead < len(poly) - 1 and abs(poly[lead]) <= 1e-13 * scale:
        out.append((1.0 + 0j, 0j))  # root at infinity
        lead += 1
    for u in np.roots(poly[lead:]):
        out.append((complex(u), 1.0 + 0j))
    return out


def _arch_pool(F: MapPair, n: int, rng: np.random.Generator) -> list[tuple[complex, complex]]:
    target = max(POOL_FACTOR * n, MIN_POOL)
    base = [(1, 0), (0, 1), (1, 1), (-1, 1), (1j, 1), (-1j, 1)]
    pool: list[tuple[complex, complex]] = []

    def add(z) -> bool:
        z = (complex(z[0]), complex(z[1]))
        if all(_chordal(z, w) > 1e-9 for w in pool):
            pool.append(z)
            return True
        return False

    for z in base:
        add(z)
    frontier = list(pool)
    depth = 0
    while len(pool) < target and frontier and depth < MAX_DEPTH:
        nxt = []
        for b in frontier:
            for u in preimages(F, b):
                if add(u):
                    nxt.append(u)
                if len(pool) >= target:
                    break
            if len(pool) >= target:
                break
        frontier = nxt
        depth += 1
    # uniform proposals on the Riemann sphere
    for _ in range(2 * n):
        x = rng.normal(size=3)
        x /= np.linalg.norm(x)
        if x[2] > 0.999999:
            add((1, 0))
        else:
            add((complex(x[0], x[1]) / (1 - x[2]), 1))
    return pool


def _padic_pool(n: int, p: int, rng: np.random.Generator) -> list[Lift]:
    target = max(POOL_FACTOR * n, 2 * (p + 1))
    cand: list[Lift] = [Lift(Fraction(1), Fraction(0))]
    cand += [Lift(Fraction(a), Fraction(1)) for a in range(min(p, target))]
    level = 1
    while len(cand) < target and level < 8:
        for a in range(p):
            for b in range(1, p):
                cand.append(Lift(Fraction(a + b * p**level), Fraction(1)))
                if len(cand) >= target:
                    break
            if len(cand) >= target:
                break
        level += 1
    for _ in range(2 * n):
        a = int(rng.integers(-50, 51))
        b = int(rng.integers(1, 51))
        cand.append(Lift(Fraction(a, b), Fraction(1)))
    uniq: list[Lift] = []
    for z in cand:
        if all(wedge(z, w) != 0 for w in uniq):
            uniq.append(z)
    return uniq


# ---------------------------------------------------------------------------
# exchange search


def _search(W: np.ndarray, n: int, rng: np.random.Generator, restarts: int, iters: int) -> tuple[list[int], int]:
    """Maximize ``sum_{i<j in S} W[i, j]`` over ``n``-subsets ``S``."""
    P = W.shape[0]
    best: Optional[tuple[float, int, list[int]]] = None
    total_iters = 0
    for restart in range(restarts):
        if restart == 0:
            i, j = np.unravel_index(np.argmax(np.where(np.isfinite(W), W, -np.inf)), W.shape)
            S = [int(i), int(j)]
        else:
            S = [int(x) for x in rng.choice(P, size=2, replace=False)]
        while len(S) < n:
            score = W[:, S].sum(axis=1)
            score[S] = -np.inf
            S.append(int(np.argmax(score)))
        S = S[:n]
        for it in range(iters):
            total_iters += 1
            improved = False
            for pos in range(n):
                others = S[:pos] + S[pos + 1:]
                gain = W[:, others].sum(axis=1)
                gain[S] = -np.inf
                c = int(np.argmax(gain))
                current = W[S[pos], others].sum()
                if gain[c] > current + 1e-13 * (1 + abs(current)):
                    S[pos] = c
                    improved = True
            if not improved:
                break
        val = sum(W[a, b] for ia, a in enumerate(S) for b in S[ia + 1:])
        key = (val, -restart)
        if best is None or key > (best[0], -best[1]):
            best = (val, restart, list(S))
    assert best is not None
    return best[2], total_iters


def _objective_arch(F: MapPair, lifts: np.ndarray, tol: float) -> float:
    """Scale-invariant archimedean objective on raw lifts of shape (n, 2)."""
    n = lifts.shape[0]
    h, _, _ = hhat_many(F, [tuple(z) for z in lifts], tol)
    w = lifts[:, 0][:, None] * lifts[:, 1][None, :] - lifts[:, 1][:, None] * lifts[:, 0][None, :]
    iu = np.triu_indices(n, 1)
    a = np.abs(w[iu])
    if np.any(a == 0):
        return -np.inf
    return 2 * float(np.sum(np.log(a))) / (n * (n - 1)) - 2 * float(np.sum(h)) / n


def _certify_arch(F: MapPair, lifts: Sequence[tuple[complex, complex]], tol: float) -> tuple[list[Lift], list[float]]:
    """Scale each lift so its height is in ``[-2 err, 0]``."""
    vals, err, _ = hhat_many(F, lifts, tol)
    out = []
    for z, h in zip(lifts, vals):
        c = math.exp(-float(h) - err)
        out.append(Lift(complex(z[0]) * c, complex(z[1]) * c))
    vals2, err2, _ = hhat_many(F, out, tol)
    if np.any(vals2 > err2):
        raise AssertionError("normalized lift left the filled Julia set")
    return out, [float(x) for x in vals2]


def _config_objective(lifts: Sequence[Lift], v: Place) -> float:
    n = len(lifts)
    if v.is_archimedean:
        s = math.fsum(math.log(abs(wedge(lifts[i], lifts[j]))) for i in range(n) for j in range(i + 1, n))
        return 2 * s / (n * (n - 1))
    vsum = sum(valuation(wedge(lifts[i], lifts[j]), v.p) for i in range(n) for j in range(i + 1, n))
    return -2 * vsum * math.log(v.p) / (n * (n - 1))


def d0n_estimate(
    F: MapPair,
    v: Place = INF,
    n: int = 2,
    seed: int = 0,
    iters: int = 200,
    tol: float = 1e-12,
    restarts: int = 4,
    refine: bool = True,
) -> tuple[Configuration, float]:
    """Lower estimate of ``d0_n`` of the filled Julia set at ``v``.

    Returns the certified configuration and ``exp(objective)``.
    """
    if n < 2:
        raise ValidationError("d0_n needs n >= 2")
    rng = np.random.default_rng(seed)
    if v.is_archimedean:
        raw = _arch_pool(F, n, rng)
        if len(raw) < n:
            raise ValidationError("could not assemble enough candidate points")
        pool, _ = _certify_arch(F, raw, tol)
        arr = np.array([[z.z0, z.z1] for z in pool])
        w = arr[:, 0][:, None] * arr[:, 1][None, :] - arr[:, 1][:, None] * arr[:, 0][None, :]
        with np.errstate(divide="ignore"):
            W = np.log(np.abs(w))
        np.fill_diagonal(W, -np.inf)
        S, its = _search(np.where(np.isfinite(W), W, -1e300), n, rng, restarts, iters)
        chosen = [pool[i] for i in S]
        if refine:
            chosen = _refine(F, chosen, tol)
        lifts, heights = _certify_arch(F, [(z.z0, z.z1) for z in chosen], tol)
    else:
        pool_raw = _padic_pool(n, v.p, rng)
        pool = [normalize_lift(F, z, v, tol) for z in pool_raw]
        P = len(pool)
        if P < n:
            raise ValidationError("could not assemble enough candidate points")
        W = np.full((P, P), -1e300)
        log_p = math.log(v.p)
        for i in range(P):
            for j in range(i + 1, P):
                W[i, j] = W[j, i] = -valuation(wedge(pool[i], pool[j]), v.p) * log_p
        S, its = _search(W, n, rng, restarts, iters)
        lifts = [pool[i] for i in S]
        hs = [hhat(F, z, v, tol) for z in lifts]
        if any(h.units < 0 for h in hs):
            raise AssertionError("normalized lift left the filled Julia set")
        heights = [h.value for h in hs]
    objective = _config_objective(lifts, v)
    config = Configuration(n, tuple(lifts), objective, tuple(heights), its)
    return config, math.exp(objective)


def _refine(F: MapPair, chosen: Sequence[Lift], tol: float) -> list[Lift]:
    """Continuous polish of an archimedean configuration; keeps the start if
    nothing better is found."""
    n = len(chosen)
    start = np.array([[complex(z.z0), complex(z.z1)] for z in chosen])

    def unpack(x: np.ndarray) -> np.ndarray:
        c = x.reshape(n, 4)
        return np.stack([c[:, 0] + 1j * c[:, 1], c[:, 2] + 1j * c[:, 3]], axis=1)

    x0 = np.stack([start[:, 0].real, start[:, 0].imag, start[:, 1].real, start[:, 1].imag], axis=1).ravel()
    f0 = _objective_arch(F, start, tol)

    def fun(x: np.ndarray) -> float:
        val = _objective_arch(F, unpack(x), tol)
        return 1e300 if not math.isfinite(val) else -val

    method = "Nelder-Mead" if n <= 4 else "L-BFGS-B"
    if method == "Nelder-Mead":
        opts = {"maxfev": 150 * n, "xatol": 1e-12, "fatol": 1e-15}
    else:
        opts = {"maxiter": 20, "maxfun": 40 * n}
    res = minimize(fun, x0, method=method, options=opts)
    if math.isfinite(res.fun) and -res.fun > f0:
        z = unpack(res.x)
        return [Lift(complex(a), complex(b)) for a, b in z]
    return list(chosen)


def tfd_bound(F: MapPair, v: Place = INF) -> float:
    """``|Res(F)|_v^(-1/(d(d-1)))``."""
    return math.exp(-r_of(F, v))


def verify_tfd_inequality(
    F: MapPair,
    v: Place = INF,
    n_list: Sequence[int] = (2, 4, 8, 16),
    seed: int = 0,
    C: Optional[float] = None,
    iters: int = 200,
) -> list[TfdRow]:
    """Run the estimator for each ``n`` and compare with the resultant bound."""
    n_list = list(n_list)
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ValidationError("n_list must be strictly increasing")
    if C is None:
        C = effective_C(F, v)
    bound = tfd_bound(F, v)
    r = r_of(F, v)
    rows = []
    for n in n_list:
        config, est = d0n_estimate(F, v, n, seed=seed, iters=iters)
        growth = C * math.log(n) / (n - 1)
        chain_rhs = growth - r
        rows.append(
            TfdRow(
                n=n,
                estimate=est,
                bound=bound,
                slack=math.expm1(growth),
                iterations=config.iterations,
                chain_rhs=chain_rhs,
                chain_ok=config.objective <= chain_rhs + 1e-9,
                bound_ok=est <= math.exp(growth) * bound + 1e-6,
            )
        )
    return rows
