"""Headline quantities: the windowed discrepancy D_n, the weak-convergence gap and Monte Carlo checks."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .distributions import get_distribution, sample_iid_sums
from .errors import DomainError
from .functions import get_function
from .gaussian import MAX_BOX_DIM, gaussian_expectation_reference, hyperplane_box_mass
from .haar import truncate_expansion, truncation_defect
from .multinomial import (DEFAULT_BUDGET, TAYLOR_QUARTIC, LatticeWindow, enumerate_lattice,
                          multinomial_log_pmf, window_sums)
from .kernels import lattice_sums

DN_SLACK_CONSTANT = 5.0
DEFAULT_EPSILON = 0.01


def theorem1_bound(m: int, n: int) -> float:
    """2 m^2 / (3 sqrt(2 pi n))."""
    if m < 2 or n < 1:
        raise DomainError("need m >= 2 and n >= 1")
    return 2.0 * m * m / (3.0 * math.sqrt(2.0 * math.pi * n))


@dataclass(frozen=True)
class DnReport:
    n: int
    m: int
    b: float
    dn_value: float
    bound: float
    per_term_max: float
    lattice_count: int
    used_stirling: bool
    slack: float
    halfwidth: int
    window_mass: float
    checksum: int

    @property
    def within_bound(self) -> bool:
        return self.dn_value <= self.bound + self.slack


def compute_dn(m: int, n: int, b: float, use_stirling: bool = False, quartic: float = TAYLOR_QUARTIC,
               threads: int = 1, budget: int = DEFAULT_BUDGET) -> DnReport:
    """Sum over the window of |m^{-n} multinomial - m^{m/2} (2 pi n)^{-(m-1)/2} e^{-(m/2)|j|^2/n}|.

    The exact pmf is used unless ``use_stirling`` selects d_n e^{H}.
    """
    win = LatticeWindow(n, m, b, budget)
    if n < b * b * m * m:
        warnings.warn(f"n={n} < b^2 m^2 = {b * b * m * m:g}: outside the Stirling accuracy regime",
                      stacklevel=2)
    sums = lattice_sums(n, m, win.halfwidth, np.zeros(m), quartic=quartic, threads=threads)
    return DnReport(
        n=n, m=m, b=b,
        dn_value=sums.dn_stirling if use_stirling else sums.dn,
        bound=theorem1_bound(m, n),
        per_term_max=sums.per_term_max,
        lattice_count=sums.count,
        used_stirling=use_stirling,
        slack=DN_SLACK_CONSTANT / n,
        halfwidth=win.halfwidth,
        window_mass=sums.mass,
        checksum=sums.checksum,
    )


def dn_sweep(m: int, ns, b: float, **kwargs) -> list:
    return [compute_dn(m, n, b, **kwargs) for n in ns]


def rate_slope(reports) -> float:
    """Least-squares slope of log D_n against log n."""
    x = np.log([r.n for r in reports])
    y = np.log([r.dn_value for r in reports])
    return float(np.polyfit(x, y, 1)[0])


def dn_terms(m: int, n: int, b: float, budget: int = 10**6):
    """Per-lattice-point rows (j_1..j_m, pmf, gaussian weight, |difference|)."""
    win = LatticeWindow(n, m, b, budget)
    log_pre = 0.5 * m * math.log(m) - 0.5 * (m - 1) * math.log(2.0 * math.pi * n)
    for v in enumerate_lattice(win):
        pmf = math.exp(multinomial_log_pmf(n, v.counts))
        w = math.exp(log_pre - 0.5 * m * sum(j * j for j in v.entries) / n)
        yield v.entries, pmf, w, abs(pmf - w)


def lemma1_variance_bound(sigmaM: float) -> float:
    """(1 - s^2) + 2 (1 - s) sqrt(1 - s^2) + (1 - s)^2 for s = sigma_M."""
    if not 0.0 < sigmaM <= 1.0:
        raise DomainError(f"sigma_M must lie in (0, 1], got {sigmaM!r}")
    d = 1.0 - sigmaM
    rest = 1.0 - sigmaM * sigmaM
    return rest + 2.0 * d * math.sqrt(rest) + d * d


@dataclass(frozen=True)
class DeltaReport:
    multinomial_value: float
    riemann_value: float
    reference_value: float
    gap: float
    components: dict
    budget_epsilon: float
    n: int = 0
    M: int = 0
    m: int = 0
    b: float = 0.0
    f: str = ""
    dist: str = ""
    epsilon: float = DEFAULT_EPSILON
    sup_norm: float = 1.0
    sigmaM: float = 1.0
    truncation_defect: float = 0.0
    variance_bound: float = 0.0
    stirling_value: float = 0.0
    dn_value: float = 0.0
    lattice_count: int = 0

    @property
    def triangle_ok(self) -> bool:
        c = self.components
        return self.gap <= c["multinomial_vs_riemann"] + c["riemann_vs_reference"] + 1e-12


def clt_gap(dist, M: int, n: int, b: float, f="cos", epsilon: float = DEFAULT_EPSILON, threads: int = 1,
            ref_tol: float = 1e-12, box_grid_step: float = None, budget: int = DEFAULT_BUDGET,
            allow_unbounded: bool = False) -> DeltaReport:
    """Run the truncation -> multinomial -> Riemann -> reference chain for E f(S_n / sqrt n)."""
    dist = get_distribution(dist)
    fn = get_function(f, allow_unbounded=allow_unbounded)
    m = 2 ** (M + 1)
    if n % m:
        raise DomainError(f"m = 2^(M+1) = {m} does not divide n = {n}")
    LatticeWindow(n, m, b, budget)
    exp = truncate_expansion(dist, M)
    sums = window_sums(exp, n, b, fn, threads=threads, allow_unbounded=allow_unbounded, budget=budget)
    ref = gaussian_expectation_reference(fn, tol=ref_tol, allow_unbounded=allow_unbounded)
    if m <= MAX_BOX_DIM:
        step = box_grid_step or (0.005 if m == 2 else 0.1)
        box_deficit = 1.0 - hyperplane_box_mass(m, b, step)
    else:
        box_deficit = None
    mult, riem = sums.mult_f, sums.riem_f
    components = {
        "truncation_mass_deficit": 1.0 - sums.mass,
        "box_mass_deficit": box_deficit,
        "riemann_vs_reference": abs(riem - ref),
        "multinomial_vs_riemann": abs(mult - riem),
        "sup_norm_times_dn": fn.sup_norm * sums.dn,
    }
    return DeltaReport(
        multinomial_value=mult,
        riemann_value=riem,
        reference_value=ref,
        gap=abs(mult - ref),
        components=components,
        budget_epsilon=epsilon * (9.0 * fn.sup_norm + 2.0),
        n=n, M=M, m=m, b=b, f=fn.spec(), dist=dist.name, epsilon=epsilon, sup_norm=fn.sup_norm,
        sigmaM=exp.sigmaM,
        truncation_defect=truncation_defect(exp),
        variance_bound=lemma1_variance_bound(min(exp.sigmaM, 1.0)),
        stirling_value=sums.stirling_f,
        dn_value=sums.dn,
        lattice_count=sums.count,
    )


def monte_carlo_gap(dist, n: int, trials: int, f="cos", seed: int = 0, allow_unbounded: bool = False):
    """(sample mean of f(S_n / sqrt n), its standard error)."""
    if trials < 2:
        raise DomainError("trials must be at least 2")
    if trials < 100:
        warnings.warn("fewer than 100 trials: standard error is unreliable", stacklevel=2)
    fn = get_function(f, allow_unbounded=allow_unbounded)
    values = fn(sample_iid_sums(get_distribution(dist), n, trials, seed))
    mean = math.fsum(values) / trials
    var = math.fsum((values - mean) ** 2) / (trials - 1)
    return mean, math.sqrt(var / trials)
