"""Haar expansion of a quantile function truncated at level M.

Coefficients are stored level-major: c_{j,k} lives at index 2**j - 1 + k.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .distributions import DistributionSpec, get_distribution, normal_quantile
from .errors import BudgetError, DegenerateExpansionError, DomainError, NumericError

MAX_LEVEL = 20
DEFAULT_ETA = 1e-8
COEFF_TOL = 1e-10


def haar_eval(j: int, k: int, x: float) -> float:
    """H_{j,k}(x) for x in [0, 1)."""
    if j < 0 or not 0 <= k <= 2**j - 1:
        raise DomainError(f"need 0 <= k <= 2**j - 1, got j={j}, k={k}")
    scale = 2.0**j
    y = x * scale - k
    if 0.0 <= y < 0.5:
        return math.sqrt(scale)
    if 0.5 <= y < 1.0:
        return -math.sqrt(scale)
    return 0.0


def clipped_tail_variance(dist: DistributionSpec, eta: float = DEFAULT_ETA) -> float:
    """Variance carried by the quantile on [0, eta] and [1 - eta, 1]."""
    if dist.kind == "normal":
        q = float(normal_quantile(eta))
        lower = _normal_lower_second_moment(q)
        return 2.0 * lower
    if dist.kind == "uniform":
        # integral of 3(2u-1)^2 over [0, eta], both tails
        return 2.0 * 0.5 * (1.0 - (1.0 - 2.0 * eta) ** 3)
    vals = np.asarray(dist.values)
    return float(eta * (vals[0] ** 2 + vals[-1] ** 2))


def _normal_lower_second_moment(q: float) -> float:
    from scipy.special import ndtr

    return float(ndtr(q)) - q * math.exp(-0.5 * q * q) / math.sqrt(2.0 * math.pi)


def _quad_piece(dist, a, b, tol):
    if b <= a:
        return 0.0
    points = None
    if dist.is_discrete:
        inner = [c for c in dist.cum[:-1] if a < c < b]
        points = inner or None
    val, err = integrate.quad(lambda u: float(dist.quantile(u)), a, b, epsabs=tol, epsrel=0.0,
                              limit=200, points=points)
    if not err <= tol:
        raise NumericError(f"quadrature reached {err:.3g} > {tol:.3g} on [{a}, {b}]", achieved=err, estimate=val)
    return val


def haar_coeff(dist, j: int, k: int, method: str = "exact", eta: float = DEFAULT_ETA,
               tol: float = COEFF_TOL) -> float:
    """c_{j,k} = integral of X * H_{j,k} over [0, 1].

    ``method="exact"`` integrates the quantile in closed form on each half of
    the support. ``method="quad"`` uses adaptive quadrature with the domain
    clipped to [eta, 1 - eta].
    """
    dist = get_distribution(dist)
    if j < 0 or not 0 <= k <= 2**j - 1:
        raise DomainError(f"need 0 <= k <= 2**j - 1, got j={j}, k={k}")
    a = k / 2.0**j
    mid = (k + 0.5) / 2.0**j
    b = (k + 1) / 2.0**j
    amp = 2.0 ** (j / 2.0)
    if method == "exact":
        return amp * (dist.partial_mean(a, mid) - dist.partial_mean(mid, b))
    if method == "quad":
        lo, hi = max(a, eta), min(b, 1.0 - eta)
        left = _quad_piece(dist, lo, min(mid, hi), tol / (2 * amp))
        right = _quad_piece(dist, max(mid, lo), hi, tol / (2 * amp))
        return amp * (left - right)
    raise DomainError(f"unknown method {method!r}")


@dataclass(frozen=True)
class HaarExpansion:
    M: int
    coeffs: np.ndarray
    sigmaM: float
    outcomes: np.ndarray
    dist_name: str = ""
    method: str = "exact"
    clipped_variance: float = 0.0
    # squared coefficient norm; kept separately so 1 - energy avoids a sqrt round trip
    energy: float = None

    def __post_init__(self):
        if self.energy is None:
            object.__setattr__(self, "energy", math.fsum(float(c) * c for c in self.coeffs))

    @property
    def m(self) -> int:
        return 2 ** (self.M + 1)

    def coeff(self, j: int, k: int) -> float:
        if not 0 <= j <= self.M or not 0 <= k <= 2**j - 1:
            raise DomainError(f"(j, k) = ({j}, {k}) outside the stored levels")
        return float(self.coeffs[2**j - 1 + k])

    def level(self, j: int) -> np.ndarray:
        return self.coeffs[2**j - 1 : 2 ** (j + 1) - 1]

    def evaluate(self, x):
        """X_M(x), evaluated from the coefficients and the binary digits of x."""
        x = np.asarray(x, dtype=float)
        total = np.zeros_like(x)
        for j in range(self.M + 1):
            k = np.floor(x * 2**j).astype(np.int64)
            digit = np.floor(x * 2 ** (j + 1)).astype(np.int64) & 1
            total = total + 2.0 ** (j / 2.0) * self.level(j)[k] * np.where(digit == 1, -1.0, 1.0)
        return total / self.sigmaM

    def records(self):
        for j in range(self.M + 1):
            for k in range(2**j):
                yield j, k, float(self.coeffs[2**j - 1 + k])


def _cell_outcomes(coeffs: np.ndarray, M: int, sigma: float) -> np.ndarray:
    m = 2 ** (M + 1)
    cells = np.arange(m, dtype=np.int64)
    out = np.zeros(m)
    for j in range(M + 1):
        k = cells >> (M + 1 - j)
        digit = (cells >> (M - j)) & 1
        out += 2.0 ** (j / 2.0) * coeffs[2**j - 1 + k] * np.where(digit == 1, -1.0, 1.0)
    return out / sigma


def truncate_expansion(dist, M: int, method: str = "exact", eta: float = DEFAULT_ETA) -> HaarExpansion:
    """Coefficients up to level M, sigma_M and the m = 2**(M+1) cell values.

    Cell values are X_M at the midpoint of each dyadic cell of width 1/m.
    """
    dist = get_distribution(dist)
    if M < 0:
        raise DomainError("M is nonnegative")
    if M > MAX_LEVEL:
        raise BudgetError(f"M={M} exceeds the supported maximum {MAX_LEVEL}")
    coeffs = np.empty(2 ** (M + 1) - 1)
    energy = None
    if method == "exact" and dist.kind == "uniform":
        # Q is linear with slope 2 sqrt(3): c_{j,k} = -(sqrt(3)/2) 2^{-3j/2}, level energy (3/4) 4^{-j}
        for j in range(M + 1):
            coeffs[2**j - 1 : 2 ** (j + 1) - 1] = -0.5 * math.sqrt(3.0) * 2.0 ** (-1.5 * j)
        energy = 1.0 - 0.25 ** (M + 1)
    elif method == "exact":
        # G(u) = int_0^u X on the finest dyadic grid; c_{j,k} = 2^{j/2} (2 G(mid) - G(a) - G(b))
        grid = dist.cumulative_mean(np.arange(2 ** (M + 1) + 1) / 2.0 ** (M + 1))
        for j in range(M + 1):
            step = 2 ** (M - j)
            g = grid[::step]
            coeffs[2**j - 1 : 2 ** (j + 1) - 1] = 2.0 ** (j / 2.0) * (2.0 * g[1::2] - g[0:-1:2] - g[2::2])
    else:
        for j in range(M + 1):
            for k in range(2**j):
                coeffs[2**j - 1 + k] = haar_coeff(dist, j, k, method=method, eta=eta)
    if energy is None:
        energy = math.fsum(c * c for c in coeffs)
    sigma = math.sqrt(energy)
    if sigma == 0.0:
        raise DegenerateExpansionError("all Haar coefficients up to level M vanish")
    clipped = clipped_tail_variance(dist, eta) if method == "quad" else 0.0
    return HaarExpansion(M, coeffs, sigma, _cell_outcomes(coeffs, M, sigma), dist.name, method, clipped,
                         energy)


def truncation_defect(exp: HaarExpansion) -> float:
    """1 - sigma_M**2, the coefficient energy left beyond level M."""
    return 1.0 - exp.energy


def from_records(M, records, sigmaM=None, outcomes=None, dist_name="", method="exact") -> HaarExpansion:
    """Rebuild an expansion from (j, k, c) records.

    Missing ``sigmaM``/``outcomes`` are recomputed from the coefficients.
    """
    coeffs = np.full(2 ** (M + 1) - 1, np.nan)
    for j, k, c in records:
        if not 0 <= j <= M or not 0 <= k <= 2**j - 1:
            raise DomainError(f"record (j={j}, k={k}) outside level {M}")
        coeffs[2**j - 1 + k] = c
    if np.isnan(coeffs).any():
        raise DomainError("coefficient records are incomplete")
    if sigmaM is None:
        sigmaM = math.sqrt(math.fsum(c * c for c in coeffs))
    if sigmaM == 0.0:
        raise DegenerateExpansionError("all Haar coefficients vanish")
    if outcomes is None:
        outcomes = _cell_outcomes(coeffs, M, sigmaM)
    return HaarExpansion(M, coeffs, float(sigmaM), np.asarray(outcomes, dtype=float), dist_name, method)
