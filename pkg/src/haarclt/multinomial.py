"""Equiprobable multinomial on the centered lattice.

Counts k_i = n/m + j_i with sum(j_i) = 0. The window keeps
|j_i| <= floor(b sqrt(n)) for i < m and sets j_m = -(j_1 + ... + j_{m-1});
points whose counts would go negative carry zero multinomial mass and are
skipped on every side of the comparison.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import kernels
from .errors import BudgetError, DomainError
from .functions import get_function

DEFAULT_BUDGET = 10**8

# Coefficient q of the quartic term -q m^3/n^3 sum j^4 in the Stirling exponent.
# Expanding -(n/m + j + 1/2) log(1 + m j/n) to fourth order gives 1/12;
# THIRD_QUARTIC keeps the value that omits the -x^4/4 term of the logarithm.
TAYLOR_QUARTIC = 1.0 / 12.0
THIRD_QUARTIC = 1.0 / 3.0


def _is_power_of_two(m: int) -> bool:
    return m >= 2 and m & (m - 1) == 0


def floor_b_sqrt_n(b: float, n: int) -> int:
    """floor(b * sqrt(n)) computed exactly from the binary value of b."""
    if b < 0:
        raise DomainError("b is nonnegative")
    t = Fraction(b) ** 2 * n
    return math.isqrt(t.numerator // t.denominator)


@dataclass(frozen=True)
class JVector:
    entries: tuple
    n: int

    def __post_init__(self):
        entries = tuple(int(j) for j in self.entries)
        object.__setattr__(self, "entries", entries)
        m = len(entries)
        if m < 2 or self.n % m:
            raise DomainError(f"m={m} must divide n={self.n}")
        if sum(entries) != 0:
            raise DomainError("entries must sum to 0")
        if any(self.n // m + j < 0 for j in entries):
            raise DomainError("every count n/m + j_i must be nonnegative")

    @property
    def m(self) -> int:
        return len(self.entries)

    @property
    def counts(self) -> tuple:
        base = self.n // self.m
        return tuple(base + j for j in self.entries)


@dataclass(frozen=True)
class LatticeWindow:
    n: int
    m: int
    b: float
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("n is positive")
        if not _is_power_of_two(self.m):
            raise DomainError(f"m={self.m} is not a power of two >= 2")
        if self.n % self.m:
            raise DomainError(f"m={self.m} does not divide n={self.n}")
        if not self.b > 0:
            raise DomainError("b is positive")
        if self.candidates > self.budget:
            raise BudgetError(
                f"window has {self.candidates} candidate points, budget is {self.budget}")

    @property
    def halfwidth(self) -> int:
        return floor_b_sqrt_n(self.b, self.n)

    @property
    def candidates(self) -> int:
        return (2 * self.halfwidth + 1) ** (self.m - 1)


def multinomial_log_pmf(n: int, counts) -> float:
    """log of m^{-n} n! / (k_1! ... k_m!)."""
    counts = [int(k) for k in counts]
    if any(k < 0 for k in counts) or sum(counts) != n:
        raise DomainError(f"counts must be nonnegative and sum to n={n}")
    m = len(counts)
    if n % m:
        return math.lgamma(n + 1) - math.fsum(math.lgamma(k + 1) for k in counts) - n * math.log(m)
    # measured from the central point, the large log-factorials never appear
    base = n // m
    terms = [kernels.log_center_pmf(n, m)]
    for k in counts:
        if k > base:
            terms.extend(-math.log1p(t / base) for t in range(1, k - base + 1))
        else:
            terms.extend(math.log1p(-t / base) for t in range(1, base - k))
    return math.fsum(terms)


def tail_cutoff_b0(epsilon: float, integer: bool = False):
    """Least b with 1/b**2 < epsilon.

    The real answer is the first float strictly above 1/sqrt(epsilon) that
    satisfies the inequality; ``integer=True`` returns the least integer.
    """
    if not 0.0 < epsilon < 1.0:
        raise DomainError(f"epsilon must lie in (0, 1), got {epsilon!r}")
    if integer:
        # decimal reading of epsilon, so that 0.01 means exactly 1/100
        eps = Fraction(repr(float(epsilon)))
        b = math.isqrt(int(1 / eps))
        while b * b * eps <= 1:
            b += 1
        return b
    b = math.nextafter(1.0 / math.sqrt(epsilon), math.inf)
    while not 1.0 / (b * b) < epsilon:
        b = math.nextafter(b, math.inf)
    return b


def enumerate_lattice(win: LatticeWindow):
    """Yield the window's JVectors in lexicographic order of (j_1, ..., j_{m-1})."""
    h, m, n = win.halfwidth, win.m, win.n
    base = n // m
    for head in itertools.product(range(-h, h + 1), repeat=m - 1):
        last = -sum(head)
        if base + last < 0 or any(base + j < 0 for j in head):
            continue
        yield JVector(head + (last,), n)


def window_checksum(vectors, halfwidth: int) -> tuple:
    """(count, checksum) of visited lattice points, matching the kernel's hash."""
    count = 0
    total = 0
    width = 2 * halfwidth + 1
    for v in vectors:
        lin = 0
        mul = 1
        for j in v.entries[:-1]:
            lin += (j + halfwidth) * mul
            mul *= width
        total += (lin * kernels.HASH_MUL) % kernels.HASH_MOD
        count += 1
    return count, total


def log_dn(m: int, n: int) -> float:
    """log of sqrt(m) (m / (2 pi n))^{(m-1)/2}."""
    return 0.5 * math.log(m) + 0.5 * (m - 1) * math.log(m / (2.0 * math.pi * n))


def stirling_exponent(n: int, entries, quartic: float = TAYLOR_QUARTIC) -> float:
    """The polynomial exponent H(n, j) with the O(1/n) remainder dropped."""
    m = len(entries)
    s2 = math.fsum(j * j for j in entries)
    s3 = math.fsum(j**3 for j in entries)
    s4 = math.fsum(j**4 for j in entries)
    nf = float(n)
    return ((m * m / (4 * nf * nf) - m / (2 * nf)) * s2
            + (m * m / (6 * nf * nf) - m**3 / (6 * nf**3)) * s3
            - quartic * m**3 / nf**3 * s4)


def stirling_log_approx(n: int, j, quartic: float = TAYLOR_QUARTIC) -> float:
    """log d_n + H(n, j), the Stirling/Taylor approximation of the log pmf.

    ``quartic`` selects the j^4 coefficient: ``TAYLOR_QUARTIC`` (1/12, the
    fourth-order Taylor coefficient) or ``THIRD_QUARTIC`` (1/3).
    """
    if not isinstance(j, JVector):
        j = JVector(tuple(j), n)
    if j.n != n:
        raise DomainError("JVector belongs to a different n")
    return log_dn(j.m, n) + stirling_exponent(n, j.entries, quartic)


def stirling_ratio_max(m: int, n: int, b: float = 1.0, quartic: float = TAYLOR_QUARTIC,
                       threads: int = 1) -> float:
    """max over the window of |exp(stirling_log_approx - exact log pmf) - 1|."""
    win = LatticeWindow(n, m, b)
    sums = kernels.lattice_sums(n, m, win.halfwidth, np.zeros(m), quartic=quartic, threads=threads)
    return sums.stirling_ratio_max


def _expansion_outcomes(exp):
    return np.asarray(getattr(exp, "outcomes", exp), dtype=float)


def window_sums(exp, n: int, b: float, f="one", threads: int = 1, allow_unbounded: bool = False,
                budget: int = DEFAULT_BUDGET, quartic: float = TAYLOR_QUARTIC) -> kernels.LatticeSums:
    """All lattice sums for an expansion's outcomes over the (n, m, b) window."""
    outcomes = _expansion_outcomes(exp)
    fn = get_function(f, allow_unbounded=allow_unbounded)
    win = LatticeWindow(n, outcomes.size, b, budget)
    return kernels.lattice_sums(n, win.m, win.halfwidth, outcomes, fn.code, fn.params,
                                quartic=quartic, threads=threads)


def multinomial_expectation_truncated(exp, n: int, b: float, f="one", threads: int = 1,
                                      allow_unbounded: bool = False, budget: int = DEFAULT_BUDGET) -> float:
    """Sum of m^{-n} multinomial(n; k) f(sum_i j_i o_i / sqrt(n)) over the window.

    Uses the exact pmf. Since sum(o_i) = 0, sum_i k_i o_i equals sum_i j_i o_i;
    the centered form is used to avoid cancellation.
    """
    return window_sums(exp, n, b, f, threads, allow_unbounded, budget).mult_f


def truncated_mass(m: int, n: int, b: float, threads: int = 1, budget: int = DEFAULT_BUDGET) -> float:
    win = LatticeWindow(n, m, b, budget)
    return kernels.lattice_sums(n, m, win.halfwidth, np.zeros(m), threads=threads).mass
