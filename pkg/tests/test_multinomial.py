import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from haarclt.errors import BudgetError, DomainError
from haarclt.haar import truncate_expansion
from haarclt.multinomial import (THIRD_QUARTIC, TAYLOR_QUARTIC, JVector, LatticeWindow, enumerate_lattice,
                                 floor_b_sqrt_n, log_dn, multinomial_expectation_truncated, multinomial_log_pmf,
                                 stirling_exponent, stirling_log_approx, stirling_ratio_max, tail_cutoff_b0,
                                 truncated_mass, window_checksum, window_sums)
import oracles


def test_log_pmf_examples():
    assert multinomial_log_pmf(4, [2, 2]) == pytest.approx(math.log(0.375), abs=1e-15)
    assert multinomial_log_pmf(2, [2, 0, 0, 0]) == pytest.approx(math.log(1 / 16), abs=1e-15)
    assert multinomial_log_pmf(10, [10, 0]) == pytest.approx(-10 * math.log(2), abs=1e-14)
    with pytest.raises(DomainError):
        multinomial_log_pmf(4, [2, 1])
    with pytest.raises(DomainError):
        multinomial_log_pmf(4, [5, -1])


@pytest.mark.parametrize("n,counts", [(10000, (5000, 5000)), (10000, (4700, 5300)), (1024, (200, 300, 256, 268)),
                                      (12, (0, 0, 12, 0)), (100, (1, 99))])
def test_log_pmf_relative_accuracy(n, counts):
    exact = float(oracles.exact_multinomial_pmf(n, counts))
    assert math.exp(multinomial_log_pmf(n, counts)) == pytest.approx(exact, rel=1e-14)


@pytest.mark.parametrize("m", [2, 4])
@pytest.mark.parametrize("n", [4, 8, 12])
def test_pmf_sums_to_one(m, n):
    if n % m:
        return
    total = math.fsum(math.exp(multinomial_log_pmf(n, c))
                      for c in itertools.product(range(n + 1), repeat=m) if sum(c) == n)
    assert total == pytest.approx(1.0, abs=1e-13)


def test_tail_cutoff():
    assert tail_cutoff_b0(0.01, integer=True) == 11
    assert tail_cutoff_b0(0.25, integer=True) == 3
    b = tail_cutoff_b0(0.01)
    assert 10.0 < b < 10.0 + 1e-12 and 1 / b**2 < 0.01
    assert 1.0 < tail_cutoff_b0(0.999999) < 1.000001
    for bad in (0.0, 1.0, -1.0):
        with pytest.raises(DomainError):
            tail_cutoff_b0(bad)


def test_floor_b_sqrt_n_is_exact():
    assert floor_b_sqrt_n(3.0, 100) == 30
    assert floor_b_sqrt_n(0.5, 16) == 2
    assert floor_b_sqrt_n(4.0, 6400) == 320
    # the double nearest 0.7 lies below 0.7, although 0.7 * 10 rounds to 7.0
    assert 0.7 * 10 == 7.0 and floor_b_sqrt_n(0.7, 100) == 6


def test_window_examples():
    win = LatticeWindow(4, 2, 1.0)
    assert [v.entries for v in enumerate_lattice(win)] == [(-2, 2), (-1, 1), (0, 0), (1, -1), (2, -2)]
    win = LatticeWindow(16, 4, 0.5)
    vecs = list(enumerate_lattice(win))
    # 125 candidates, 4 of which have j_4 < -4
    assert win.candidates == 125 and len(vecs) == 121
    assert len(oracles.window_points(16, 4, 2)) == 121
    assert all(sum(v.entries) == 0 for v in vecs)


def test_window_errors():
    with pytest.raises(DomainError):
        LatticeWindow(10, 4, 1.0)
    with pytest.raises(DomainError):
        LatticeWindow(12, 3, 1.0)
    with pytest.raises(DomainError):
        LatticeWindow(16, 4, 0.0)
    with pytest.raises(BudgetError):
        LatticeWindow(64, 8, 2.0)
    with pytest.raises(DomainError):
        JVector((1, 0), 4)
    with pytest.raises(DomainError):
        JVector((-3, 3), 4)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([2, 4]), st.integers(min_value=1, max_value=10), st.floats(min_value=0.2, max_value=2.0))
def test_window_matches_brute_force(m, mult, b):
    n = m * mult
    win = LatticeWindow(n, m, b)
    got = sorted(v.counts for v in enumerate_lattice(win))
    assert got == sorted(oracles.window_points(n, m, win.halfwidth))


@settings(max_examples=20, deadline=None)
@given(st.sampled_from([2, 4]), st.integers(min_value=1, max_value=8), st.floats(min_value=0.3, max_value=1.5))
def test_kernel_visits_the_enumerated_points(m, mult, b):
    n = m * mult
    win = LatticeWindow(n, m, b)
    count, checksum = window_checksum(enumerate_lattice(win), win.halfwidth)
    sums = window_sums(np.zeros(m), n, b)
    assert (sums.count, sums.checksum) == (count, checksum)


def test_stirling_examples():
    assert math.exp(log_dn(2, 100)) == pytest.approx(math.sqrt(1 / (50 * math.pi)), rel=1e-14)
    exact = oracles.binomial_pmf(100, 50)
    assert exact == pytest.approx(0.0795892, abs=1e-7)
    approx = math.exp(stirling_log_approx(100, (0, 0)))
    assert approx == pytest.approx(0.0797885, abs=1e-7)
    assert approx / exact - 1 == pytest.approx(1 / 400, rel=0.01)
    assert stirling_exponent(100, (0, 0)) == 0.0
    # cubic power sums cancel for (5, -5)
    j = (5, -5)
    assert math.fsum(x**3 for x in j) == 0
    exact = oracles.binomial_pmf(100, 55)
    assert abs(math.exp(stirling_log_approx(100, j)) / exact - 1) <= 2 / 100


def test_quartic_coefficient_choice():
    # 1/12 is the fourth-order Taylor coefficient; 1/3 is the alternative reading
    for n in (256, 1024):
        taylor = stirling_ratio_max(2, n, 1.0, quartic=TAYLOR_QUARTIC)
        third = stirling_ratio_max(2, n, 1.0, quartic=THIRD_QUARTIC)
        assert taylor < third


def test_truncated_expectation_binomial_oracle():
    exp = truncate_expansion("twopoint", 0)
    for n in (100, 400, 2500, 10000):
        got = multinomial_expectation_truncated(exp, n, 3.0, "cos")
        assert abs(got - oracles.binomial_window_expectation(n, 3.0, math.cos)) <= 1e-12


def test_truncated_expectation_properties():
    exp = truncate_expansion("uniform", 1)
    one = multinomial_expectation_truncated(exp, 64, 1.0, "one")
    assert 0 < one <= 1 and one == truncated_mass(4, 64, 1.0)
    assert abs(multinomial_expectation_truncated(truncate_expansion("twopoint", 0), 100, 3.0, "sin")) <= 1e-12
    # for m = 2 the window is closed under j -> -j, which flips the sign of S
    assert abs(multinomial_expectation_truncated(truncate_expansion("normal", 0), 64, 2.0, "tanh")) <= 1e-12


@pytest.mark.parametrize("m,n,b", [(2, 36, 3.0), (2, 400, 3.0), (4, 64, 2.0), (4, 256, 1.0)])
def test_chebyshev_mass_bound(m, n, b):
    assert 1 - truncated_mass(m, n, b) <= 1 / b**2
