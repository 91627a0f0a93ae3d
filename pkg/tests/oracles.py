"""Independent reference computations used by the tests."""
import math
from fractions import Fraction

import numpy as np


def resultant_by_roots(f1, f2):
    """``a0^d b0^d prod (alpha_i - beta_j)`` for forms with nonzero x^d terms."""
    d = len(f1) - 1
    a = np.roots([float(c) for c in f1])
    b = np.roots([float(c) for c in f2])
    prod = complex(float(f1[0]) ** d * float(f2[0]) ** d)
    for x in a:
        for y in b:
            prod *= x - y
    return prod


def square_height(a, b):
    """Height for (x^2, y^2) at infinity: log max(|a|, |b|)."""
    return math.log(max(abs(a), abs(b)))


def vp(x, p):
    x = Fraction(x)
    if x == 0:
        return math.inf
    n, d, v = x.numerator, x.denominator, 0
    while n % p == 0:
        n //= p
        v += 1
    while d % p == 0:
        d //= p
        v -= 1
    return v


def padic_height_recursion(f1, f2, z, p, steps):
    """Exact valuation recursion: renormalize by p^min(v) at every step.

    Returns the truncated value in units of -log p (no tail)."""
    d = len(f1) - 1
    u0, u1 = Fraction(z[0]), Fraction(z[1])
    total = Fraction(min(vp(u0, p), vp(u1, p)))
    s = Fraction(p) ** int(total)
    u0, u1 = u0 / s, u1 / s

    def ev(c, x, y):
        return sum(Fraction(ci) * x ** (d - i) * y**i for i, ci in enumerate(c))

    for k in range(steps):
        a, b = ev(f1, u0, u1), ev(f2, u0, u1)
        m = min(vp(a, p), vp(b, p))
        total += Fraction(m, d ** (k + 1))
        s = Fraction(p) ** m
        u0, u1 = a / s, b / s
    return total


def mahler_numpy(coeffs):
    r = np.roots([float(c) for c in coeffs])
    return abs(float(coeffs[0])) * float(np.prod(np.maximum(1.0, np.abs(r))))


def discriminant_numpy(coeffs):
    r = np.roots([float(c) for c in coeffs])
    n = len(r)
    prod = complex(1)
    for i in range(n):
        for j in range(i + 1, n):
            prod *= (r[i] - r[j]) ** 2
    return float(coeffs[0]) ** (2 * n - 2) * prod
