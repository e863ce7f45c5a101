"""Gaussian side: reference expectations, hyperplane box mass and the matched Riemann sum."""
from __future__ import annotations

import math

import numpy as np
from scipy import integrate

from .errors import BudgetError, DomainError, NumericError
from .functions import INDICATOR_SMOOTH, get_function
from .multinomial import DEFAULT_BUDGET, _is_power_of_two, window_sums

REFERENCE_HALFWIDTH = 10.0
MAX_BOX_DIM = 4
MAX_BOX_POINTS = 2 * 10**7
B1_RESOLUTION = 1e-3


def gaussian_expectation_reference(f="one", tol: float = 1e-12, allow_unbounded: bool = False) -> float:
    """E f(Y) for standard normal Y, by adaptive quadrature on [-10, 10]."""
    if tol < 1e-14:
        raise DomainError("tol must be at least 1e-14")
    fn = get_function(f, allow_unbounded=allow_unbounded)
    points = None
    if fn.code == INDICATOR_SMOOTH:
        a, b, w = fn.params
        points = [p for p in (a - w, a, b, b + w) if -REFERENCE_HALFWIDTH < p < REFERENCE_HALFWIDTH] or None
    norm = 1.0 / math.sqrt(2.0 * math.pi)
    val, err = integrate.quad(lambda y: float(fn(y)) * norm * math.exp(-0.5 * y * y),
                              -REFERENCE_HALFWIDTH, REFERENCE_HALFWIDTH,
                              epsabs=tol, epsrel=0.0, limit=500, points=points)
    if not err <= tol:
        raise NumericError(f"reference quadrature error {err:.3g} exceeds {tol:.3g}", achieved=err, estimate=val)
    return val


def _box_cells(m, b, grid_step):
    half = b * math.sqrt(m)
    cells = max(1, math.ceil(2.0 * half / grid_step))
    if cells ** (m - 1) > MAX_BOX_POINTS:
        raise BudgetError(f"midpoint grid needs {cells ** (m - 1)} points, budget is {MAX_BOX_POINTS}")
    step = 2.0 * half / cells
    nodes = -half + step * (np.arange(cells) + 0.5)
    return nodes, step


def hyperplane_box_mass(m: int, b: float, grid_step: float = 0.01) -> float:
    """Midpoint-rule mass of the box |y_i| <= b sqrt(m), i < m, on the hyperplane sum(y) = 0.

    The density is sqrt(m) (2 pi)^{-(m-1)/2} exp(-|y|^2 / 2) with
    y_m = -(y_1 + ... + y_{m-1}); its total over the hyperplane is 1.
    """
    if not _is_power_of_two(m):
        raise DomainError(f"m={m} is not a power of two >= 2")
    if m > MAX_BOX_DIM:
        raise BudgetError(f"box integral limited to m <= {MAX_BOX_DIM}")
    if b < 0 or not grid_step > 0:
        raise DomainError("b >= 0 and grid_step > 0 required")
    if b == 0:
        return 0.0
    nodes, step = _box_cells(m, b, grid_step)
    pref = math.sqrt(m) / (2.0 * math.pi) ** ((m - 1) / 2.0) * step ** (m - 1)
    if m == 2:
        vals = np.exp(-0.5 * 2.0 * nodes * nodes)
        return pref * math.fsum(vals)
    # m == 4: slice over y_1, vectorize over (y_2, y_3)
    y2, y3 = np.meshgrid(nodes, nodes, indexing="ij")
    base = y2 * y2 + y3 * y3
    part = y2 + y3
    parts = []
    for y1 in nodes:
        q = y1 * y1 + base + (y1 + part) ** 2
        parts.append(math.fsum(np.exp(-0.5 * q).ravel()))
    return pref * math.fsum(parts)


def select_b1(epsilon: float, m: int, grid_step: float = None, resolution: float = B1_RESOLUTION) -> float:
    """Least b (to ``resolution``) whose box complement mass is below epsilon."""
    if not 0.0 < epsilon < 1.0:
        raise DomainError(f"epsilon must lie in (0, 1), got {epsilon!r}")
    if grid_step is None:
        grid_step = 0.005 if m == 2 else 0.1

    def deficit(b):
        return 1.0 - hyperplane_box_mass(m, b, grid_step)

    lo, hi = 0.0, 1.0
    while not deficit(hi) < epsilon:
        lo, hi = hi, 2.0 * hi
        if hi > 64:
            raise NumericError("box mass never reaches 1 - epsilon", achieved=deficit(hi))
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        if deficit(mid) < epsilon:
            hi = mid
        else:
            lo = mid
    return hi


def gaussian_riemann_sum(exp, n: int, b: float, f="one", threads: int = 1, allow_unbounded: bool = False,
                         budget: int = DEFAULT_BUDGET) -> float:
    """m^{m/2} (2 pi n)^{-(m-1)/2} sum f(sum_i o_i j_i / sqrt(n)) exp(-(m/2) sum j_i^2 / n).

    Runs over exactly the lattice points of the multinomial window.
    """
    return window_sums(exp, n, b, f, threads, allow_unbounded, budget).riem_f


def find_n0(exp, b: float, f="one", tol: float = 1e-2, n_start: int = None, n_max: int = 2**20,
            threads: int = 1) -> dict:
    """First n of a doubling schedule with |Riemann sum - E f(Y)| <= tol.

    Returns the schedule that was tried so the caller can see the trend.
    """
    outcomes = np.asarray(getattr(exp, "outcomes", exp), dtype=float)
    m = outcomes.size
    ref = gaussian_expectation_reference(f)
    n = n_start or m
    tried = []
    while n <= n_max:
        gap = abs(gaussian_riemann_sum(outcomes, n, b, f, threads) - ref)
        tried.append((n, gap))
        if gap <= tol:
            return {"n0": n, "schedule": tried, "reference": ref}
        n *= 2
    return {"n0": None, "schedule": tried, "reference": ref}
