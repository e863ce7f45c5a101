"""Independent reference computations used by the tests.

Nothing here imports the package's numerical kernels: sums use exact
integers or mpmath, and lattices are walked with plain loops.
"""
import itertools
import math
from fractions import Fraction

import mpmath as mp


def binomial_pmf(n, k):
    return float(Fraction(math.comb(n, k), 2**n))


def binomial_window_expectation(n, b, f):
    """sum over |k - n/2| <= floor(b sqrt n) of C(n,k) 2^-n f((n - 2k)/sqrt n)."""
    h = math.isqrt(int(Fraction(b) ** 2 * n))
    half = n // 2
    terms = []
    for k in range(max(0, half - h), min(n, half + h) + 1):
        terms.append(binomial_pmf(n, k) * f((n - 2 * k) / math.sqrt(n)))
    return math.fsum(terms)


def binomial_dn(n, b):
    h = math.isqrt(int(Fraction(b) ** 2 * n))
    half = n // 2
    pre = 2.0 / math.sqrt(2.0 * math.pi * n)
    return math.fsum(abs(binomial_pmf(n, half + j) - pre * math.exp(-2.0 * j * j / n))
                     for j in range(-h, h + 1) if 0 <= half + j <= n)


def window_points(n, m, h):
    """Brute-force list of count vectors in the window, built from counts rather than offsets."""
    base = n // m
    out = []
    for counts in itertools.product(range(n + 1), repeat=m - 1):
        last = n - sum(counts)
        if last < 0:
            continue
        if all(abs(k - base) <= h for k in counts):
            out.append(counts + (last,))
    return out


def exact_multinomial_pmf(n, counts):
    m = len(counts)
    num = math.factorial(n)
    for k in counts:
        num //= math.factorial(k)
    return Fraction(num, m**n)


def mp_quantile(name):
    if name == "twopoint":
        return lambda u: mp.mpf(-1) if u < 0.5 else mp.mpf(1)
    if name == "uniform":
        return lambda u: mp.sqrt(3) * (2 * u - 1)
    if name == "normal":
        return lambda u: mp.sqrt(2) * mp.erfinv(2 * u - 1)
    raise KeyError(name)


def mp_haar_coeff(name, j, k, dps=30):
    """c_{j,k} = 2^{j/2} (int over left half - int over right half) of Q, by mpmath quadrature."""
    with mp.workdps(dps):
        q = mp_quantile(name)
        a = mp.mpf(k) / 2**j
        mid = (mp.mpf(2 * k) + 1) / 2 ** (j + 1)
        b = mp.mpf(k + 1) / 2**j
        left = mp.quad(q, [a, mid])
        right = mp.quad(q, [mid, b])
        return float(mp.sqrt(2**j) * (left - right))
