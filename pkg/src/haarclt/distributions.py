"""Mean-zero, unit-variance laws given by their quantile functions.

A law Z is represented on ([0, 1], Lebesgue) by its quantile
``X(u) = inf{y : P(Z <= y) >= u}``. Countably many independent copies are
obtained from a single uniform by reading the binary digits of u along the
columns of a diagonally enumerated digit matrix.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.special import ndtr

from . import kernels
from .errors import DomainError, PrecisionError

SQRT3 = math.sqrt(3.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)

MEAN_TOL = 1e-12
VAR_TOL = 1e-10
PROB_SUM_TOL = 1e-12
NORMAL_QUANTILE_TOL = 1e-12

KINDS = ("twopoint", "uniform", "normal", "discrete")


@dataclass(frozen=True)
class DistributionSpec:
    """A standardized distribution.

    ``kind`` is one of ``twopoint`` (+-1 with probability 1/2 each),
    ``uniform`` (on [-sqrt 3, sqrt 3]), ``normal`` or ``discrete``. For the
    discrete family ``probs`` and ``values`` hold the table, sorted by value
    with repeated values merged.
    """

    kind: str
    probs: tuple = ()
    values: tuple = ()
    name: str = ""
    _cum: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown distribution kind {self.kind!r}")
        if self.kind == "twopoint":
            object.__setattr__(self, "probs", (0.5, 0.5))
            object.__setattr__(self, "values", (-1.0, 1.0))
        if self.kind in ("twopoint", "discrete"):
            self._init_table()
        if not self.name:
            object.__setattr__(self, "name", self.kind)

    def _init_table(self):
        probs = [float(p) for p in self.probs]
        values = [float(v) for v in self.values]
        if len(probs) != len(values) or not probs:
            raise DomainError("discrete table needs matching, non-empty probability and value lists")
        if any(p < 0 or not math.isfinite(p) for p in probs) or any(not math.isfinite(v) for v in values):
            raise DomainError("probabilities must be nonnegative and values finite")
        if abs(math.fsum(probs) - 1.0) > PROB_SUM_TOL:
            raise DomainError(f"probabilities sum to {math.fsum(probs)!r}, not 1")
        merged: dict[float, list] = {}
        for p, v in zip(probs, values):
            if p > 0:
                merged.setdefault(v, []).append(p)
        vs = sorted(merged)
        ps = [math.fsum(merged[v]) for v in vs]
        mean = math.fsum(p * v for p, v in zip(ps, vs))
        var = math.fsum(p * v * v for p, v in zip(ps, vs)) - mean * mean
        if abs(mean) > MEAN_TOL:
            raise DomainError(f"table mean is {mean!r}, expected 0")
        if abs(var - 1.0) > VAR_TOL:
            raise DomainError(f"table variance is {var!r}, expected 1")
        cum = np.cumsum(ps)
        cum[-1] = 1.0
        object.__setattr__(self, "probs", tuple(ps))
        object.__setattr__(self, "values", tuple(vs))
        object.__setattr__(self, "_cum", cum)

    @property
    def is_discrete(self) -> bool:
        return self.kind in ("twopoint", "discrete")

    @property
    def cum(self) -> np.ndarray:
        """Right endpoints of the quantile's constancy intervals (discrete only)."""
        return self._cum

    def cdf(self, y):
        y = np.asarray(y, dtype=float)
        if self.kind == "uniform":
            return np.clip((y + SQRT3) / (2 * SQRT3), 0.0, 1.0)
        if self.kind == "normal":
            return ndtr(y)
        idx = np.searchsorted(np.asarray(self.values), y, side="right")
        cum0 = np.concatenate(([0.0], self._cum))
        return cum0[idx]

    def quantile(self, u):
        """Vectorized quantile; no domain check (see :func:`quantile_eval`)."""
        u = np.asarray(u, dtype=float)
        if self.kind == "uniform":
            return SQRT3 * (2.0 * u - 1.0)
        if self.kind == "normal":
            return normal_quantile(u)
        idx = np.minimum(np.searchsorted(self._cum, u, side="left"), len(self.values) - 1)
        return np.asarray(self.values)[idx]

    def partial_mean(self, a: float, b: float) -> float:
        """Integral of the quantile over [a, b], a subset of [0, 1]."""
        if self.kind == "uniform":
            return SQRT3 * (b - a) * (a + b - 1.0)
        if self.kind == "normal":
            return _phi_of_quantile(a) - _phi_of_quantile(b)
        lo = 0.0
        pieces = []
        for p_hi, v in zip(self._cum, self.values):
            width = min(b, p_hi) - max(a, lo)
            if width > 0:
                pieces.append(width * v)
            lo = p_hi
        return math.fsum(pieces)

    def cumulative_mean(self, u):
        """G(u) = integral of the quantile over [0, u], vectorized."""
        u = np.asarray(u, dtype=float)
        if self.kind == "uniform":
            return SQRT3 * u * (u - 1.0)
        if self.kind == "normal":
            q = normal_quantile(np.clip(u, 1e-300, 1.0 - 2**-53))
            out = -_INV_SQRT_2PI * np.exp(-0.5 * q * q)
            return np.where((u <= 0.0) | (u >= 1.0), 0.0, out)
        lo = np.concatenate(([0.0], self._cum[:-1]))
        widths = np.clip(u[..., None] - lo, 0.0, self._cum - lo)
        return (widths * np.asarray(self.values)).sum(axis=-1)

    def describe(self) -> dict:
        out = {"kind": self.kind, "name": self.name}
        if self.kind == "discrete":
            out["probs"] = list(self.probs)
            out["values"] = list(self.values)
        return out


def _phi_of_quantile(u: float) -> float:
    if u <= 0.0 or u >= 1.0:
        return 0.0
    y = float(normal_quantile(u))
    return _INV_SQRT_2PI * math.exp(-0.5 * y * y)


def normal_quantile(u, tol: float = NORMAL_QUANTILE_TOL):
    """Standard normal quantile by bracketed bisection on the CDF.

    Returns ``inf{y : Phi(y) >= u}`` to absolute accuracy ``tol``.
    """
    u = np.asarray(u, dtype=float)
    # bisect in the lower tail, where Phi keeps full relative precision; 1 - u is exact for u >= 1/2
    upper = u > 0.5
    v = np.where(upper, 1.0 - u, u)
    lo = np.full(u.shape, -40.0)
    hi = np.full(u.shape, 40.0)
    iterations = int(math.ceil(math.log2(80.0 / tol)))
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        above = ndtr(mid) >= v
        hi = np.where(above, mid, hi)
        lo = np.where(above, lo, mid)
    out = 0.5 * (lo + hi)
    out = np.where(upper, -out, out)
    out = np.where(u <= 0.0, -np.inf, np.where(u >= 1.0, np.inf, out))
    return out if out.ndim else float(out)


def twopoint() -> DistributionSpec:
    return DistributionSpec("twopoint")


def uniform() -> DistributionSpec:
    return DistributionSpec("uniform")


def normal() -> DistributionSpec:
    return DistributionSpec("normal")


def discrete(probs, values, name: str = "discrete") -> DistributionSpec:
    return DistributionSpec("discrete", tuple(probs), tuple(values), name=name)


def load_table(path) -> DistributionSpec:
    """Read a discrete law from lines of ``probability value``.

    Blank lines and ``#`` comments are ignored.
    """
    probs, values = [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise DomainError(f"{path}:{lineno}: expected 'probability value'")
            try:
                probs.append(float(parts[0]))
                values.append(float(parts[1]))
            except ValueError:
                raise DomainError(f"{path}:{lineno}: not a decimal number") from None
    return discrete(probs, values, name=str(path))


def get_distribution(name) -> DistributionSpec:
    """Resolve a built-in name or a path to a probability table."""
    if isinstance(name, DistributionSpec):
        return name
    builtin = {"twopoint": twopoint, "uniform": uniform, "normal": normal}
    if name in builtin:
        return builtin[name]()
    try:
        return load_table(name)
    except FileNotFoundError:
        raise DomainError(f"unknown distribution {name!r} (not a built-in name or a readable table)") from None


def quantile_eval(dist: DistributionSpec, u: float) -> float:
    """Quantile at a single point of the open unit interval."""
    if not 0.0 < u < 1.0:
        raise DomainError(f"quantile argument must lie in (0, 1), got {u!r}")
    return float(dist.quantile(u))


def bit_position(row: int, col: int) -> int:
    """Index of the binary digit stored at (row, col) of the digit matrix.

    Entries are numbered along anti-diagonals: (1,1)->1, (2,1)->2, (1,2)->3,
    (3,1)->4, ...
    """
    if row < 1 or col < 1:
        raise DomainError("row and col are positive")
    d = row + col - 1
    return d * (d - 1) // 2 + col


def _known_bits(u) -> float:
    """Number of binary digits after the point that the representation fixes."""
    if isinstance(u, Fraction) or u == 0:
        return math.inf
    mantissa, exponent = math.frexp(float(u))
    # u = mantissa * 2**exponent with 0.5 <= mantissa < 1: leading digit at -exponent + 1
    return -exponent + 53


def binary_digit(u, k: int, precision=None) -> int:
    """k-th binary digit of u in [0, 1), zero-tail expansion for dyadics.

    ``precision`` caps the number of trustworthy digits; it defaults to the
    53 significant bits of a float (unbounded for ``Fraction`` input).
    """
    if k < 1:
        raise DomainError("digit index starts at 1")
    known = _known_bits(u) if precision is None else precision
    if k > known:
        raise PrecisionError(f"digit {k} requested but only {known} are known")
    frac = Fraction(u)
    if not 0 <= frac < 1:
        raise DomainError(f"u must lie in [0, 1), got {u!r}")
    return int(frac * 2**k) & 1


def project_uniform(u, i: int, depth: int, precision=None) -> float:
    """Uniform number built from column i of the digit matrix, truncated to ``depth`` digits."""
    if i < 1 or depth < 1:
        raise DomainError("column index and depth are positive")
    total = Fraction(0)
    for r in range(1, depth + 1):
        if binary_digit(u, bit_position(r, i), precision):
            total += Fraction(1, 2**r)
    return float(total)


def iid_copies(dist: DistributionSpec, u, count: int, depth: int) -> np.ndarray:
    """X(P_1(u)), ..., X(P_count(u)) from a single uniform u."""
    pts = np.array([project_uniform(u, i, depth) for i in range(1, count + 1)])
    # P_i(u) may be 0 at finite depth; nudge into the open interval by half a cell
    pts = pts + 2.0 ** -(depth + 1)
    return dist.quantile(pts)


def sample_iid_sums(dist: DistributionSpec, n: int, trials: int, seed: int) -> np.ndarray:
    """Realizations of (X_1 + ... + X_n) / sqrt(n), one per trial.

    Trial t draws its n uniforms from a Philox stream keyed by ``seed`` with
    counter offset t, so any subset of trials reproduces independently.
    """
    if n < 1 or trials < 1:
        raise DomainError("n and trials are positive")
    key = int(seed) % 2**128
    out = np.empty(trials)
    scale = 1.0 / math.sqrt(n)
    for t in range(trials):
        gen = np.random.Generator(np.random.Philox(key=key, counter=[0, 0, 0, t]))
        # random() yields multiples of 2^-53 in [0, 1); shift onto cell midpoints in (0, 1)
        u = gen.random(n) + 2.0**-54
        if dist.is_discrete:
            out[t] = kernels.discrete_quantile_sum(u, dist.cum, np.asarray(dist.values)) * scale
        else:
            out[t] = math.fsum(dist.quantile(u)) * scale
    return out
