"""Hot loops over the centered multinomial lattice.

Every quantity the laboratory needs from the lattice window is accumulated in
one pass: exact multinomial mass and f-moment, Gaussian Riemann weights and
f-moment, the pointwise discrepancy sum D_n (exact and Stirling variants) and
a few diagnostics. Two interchangeable implementations exist, a numba one and
a vectorized numpy one; ``_accel.USE_NUMBA`` picks the default.

Sums are compensated (Neumaier) within a partition of the j_1 range and
partitions are combined with ``math.fsum`` in partition order.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _accel
from ._accel import njit
from .functions import eval_code

MASS, MULT_F, RIEM_W, RIEM_F, DN, DN_STIRLING, STIRLING_F = range(7)
N_SUMS = 7
HASH_MUL = 2654435761
HASH_MOD = 2**32

_NUMPY_CHUNK = 1 << 18


@dataclass(frozen=True)
class LatticeSums:
    mass: float
    mult_f: float
    riem_w: float
    riem_f: float
    dn: float
    dn_stirling: float
    stirling_f: float
    count: int
    checksum: int
    per_term_max: float
    stirling_ratio_max: float
    partitions: int
    backend: str


def log_factorials(n: int) -> np.ndarray:
    return np.array([math.lgamma(k + 1.0) for k in range(n + 1)])


def _stirling_remainder(x: int) -> float:
    """log(x!) - [(x + 1/2) log x - x + log(2 pi)/2]."""
    if x < 16:
        if x == 0:
            return 0.0
        return math.lgamma(x + 1.0) - ((x + 0.5) * math.log(x) - x + 0.5 * math.log(2.0 * math.pi))
    inv = 1.0 / x
    inv2 = inv * inv
    return inv * (1 / 12 - inv2 * (1 / 360 - inv2 * (1 / 1260 - inv2 * (1 / 1680 - inv2 / 1188))))


def log_center_pmf(n: int, m: int) -> float:
    """log of m^{-n} n! / ((n/m)!)^m, without cancelling large log-factorials."""
    base = n // m
    return (0.5 * m * math.log(m) - 0.5 * (m - 1) * math.log(2.0 * math.pi * n)
            + _stirling_remainder(n) - m * _stirling_remainder(base))


def centered_log_weights(n: int, m: int, reach: int) -> np.ndarray:
    """w[k] = log((n/m)! / k!) + (k - n/m) log(n/m) for |k - n/m| <= reach.

    Since the offsets k_i - n/m sum to zero, the exact log pmf is
    log_center_pmf(n, m) + sum_i w[k_i]. Each entry is a compensated sum of
    same-signed log1p terms, so it carries only a few ulps of error. Entries
    outside the reach are NaN.
    """
    base = n // m
    w = np.full(n + 1, np.nan)
    w[base] = 0.0
    s = c = 0.0
    for t in range(1, min(reach, n - base) + 1):
        s, c = _two_sum_acc(s, c, -math.log1p(t / base))
        w[base + t] = s + c
    s = c = 0.0
    for r in range(1, min(reach, base) + 1):
        s, c = _two_sum_acc(s, c, math.log1p(-(r - 1) / base))
        w[base - r] = s + c
    return w


def _two_sum_acc(s, c, x):
    t = s + x
    c += (s - t) + x if abs(s) >= abs(x) else (x - t) + s
    return t, c


def _coefficients(n, m, quartic):
    nf = float(n)
    c2 = m * m / (4.0 * nf * nf) - m / (2.0 * nf)
    c3 = m * m / (6.0 * nf * nf) - m**3 / (6.0 * nf**3)
    c4 = quartic * m**3 / nf**3
    log_pre = 0.5 * m * math.log(m) - 0.5 * (m - 1) * math.log(2.0 * math.pi * nf)
    return c2, c3, c4, log_pre


@njit(cache=True, nogil=True)
def _neumaier(sums, comps, idx, x):
    s = sums[idx]
    t = s + x
    if abs(s) >= abs(x):
        comps[idx] += (s - t) + x
    else:
        comps[idx] += (x - t) + s
    sums[idx] = t


@njit(cache=True, nogil=True)
def _lattice_numba(n, m, h, lo, hi, outcomes, logw, log_center, fcode, p0, p1, p2, c2, c3, c4, log_pre,
                   sums, comps, istats, fstats):
    base = n // m
    log_norm = log_center
    sqn = math.sqrt(n)
    half_m_over_n = 0.5 * m / n
    width = 2 * h + 1
    js = np.zeros(m, dtype=np.int64)
    for j1 in range(lo, hi):
        js[0] = j1
        for t in range(1, m - 1):
            js[t] = -h
        while True:
            s = 0
            for t in range(m - 1):
                s += js[t]
            js[m - 1] = -s
            valid = True
            for t in range(m):
                if base + js[t] < 0:
                    valid = False
                    break
            if valid:
                lp = log_norm
                x = 0.0
                s2 = 0.0
                s3 = 0.0
                s4 = 0.0
                for t in range(m):
                    jt = js[t]
                    lp += logw[base + jt]
                    x += outcomes[t] * jt
                    q = float(jt) * jt
                    s2 += q
                    s3 += q * jt
                    s4 += q * q
                x /= sqn
                fx = eval_code(fcode, p0, p1, p2, x)
                pmf = math.exp(lp)
                w = math.exp(log_pre - half_m_over_n * s2)
                ls = log_pre + c2 * s2 + c3 * s3 - c4 * s4
                ps = math.exp(ls)
                diff = abs(pmf - w)
                _neumaier(sums, comps, 0, pmf)
                _neumaier(sums, comps, 1, pmf * fx)
                _neumaier(sums, comps, 2, w)
                _neumaier(sums, comps, 3, w * fx)
                _neumaier(sums, comps, 4, diff)
                _neumaier(sums, comps, 5, abs(ps - w))
                _neumaier(sums, comps, 6, ps * fx)
                if diff > fstats[0]:
                    fstats[0] = diff
                rel = abs(math.expm1(ls - lp))
                if rel > fstats[1]:
                    fstats[1] = rel
                lin = 0
                mul = 1
                for t in range(m - 1):
                    lin += (js[t] + h) * mul
                    mul *= width
                istats[0] += 1
                istats[1] += (lin * 2654435761) % 4294967296
            t = m - 2
            while t >= 1:
                if js[t] < h:
                    js[t] += 1
                    break
                js[t] = -h
                t -= 1
            if t < 1:
                break


def _lattice_numpy(n, m, h, lo, hi, outcomes, logw, log_center, fcode, p0, p1, p2, c2, c3, c4, log_pre,
                   sums, comps, istats, fstats):
    from .functions import TestFunction

    f = TestFunction("", fcode, (p0, p1, p2))
    base = n // m
    log_norm = log_center
    sqn = math.sqrt(n)
    width = 2 * h + 1
    inner = width ** (m - 2)
    total = (hi - lo) * inner
    outcomes = np.asarray(outcomes, dtype=float)
    for start in range(0, total, _NUMPY_CHUNK):
        flat = np.arange(start, min(start + _NUMPY_CHUNK, total), dtype=np.int64)
        js = np.empty((flat.size, m), dtype=np.int64)
        js[:, 0] = lo + flat // inner
        rest = flat % inner
        # last free coordinate varies fastest (lexicographic order)
        for t in range(m - 2, 0, -1):
            js[:, t] = rest % width - h
            rest //= width
        js[:, m - 1] = -js[:, : m - 1].sum(axis=1)
        js = js[(js + base >= 0).all(axis=1)]
        if js.size == 0:
            continue
        lp = log_norm + logw[js + base].sum(axis=1)
        jf = js.astype(float)
        q = jf * jf
        s2 = q.sum(axis=1)
        s3 = (q * jf).sum(axis=1)
        s4 = (q * q).sum(axis=1)
        x = (jf * outcomes).sum(axis=1) / sqn
        fx = f(x)
        pmf = np.exp(lp)
        w = np.exp(log_pre - (0.5 * m / n) * s2)
        ls = log_pre + c2 * s2 + c3 * s3 - c4 * s4
        ps = np.exp(ls)
        diff = np.abs(pmf - w)
        for idx, terms in enumerate((pmf, pmf * fx, w, w * fx, diff, np.abs(ps - w), ps * fx)):
            _neumaier_py(sums, comps, idx, math.fsum(terms))
        fstats[0] = max(fstats[0], float(diff.max()))
        fstats[1] = max(fstats[1], float(np.abs(np.expm1(ls - lp)).max()))
        mul = width ** np.arange(m - 1, dtype=np.int64)
        lin = ((js[:, : m - 1] + h) * mul).sum(axis=1)
        istats[0] += js.shape[0]
        istats[1] += int(((lin * HASH_MUL) % HASH_MOD).sum())


def _neumaier_py(sums, comps, idx, x):
    s = sums[idx]
    t = s + x
    if abs(s) >= abs(x):
        comps[idx] += (s - t) + x
    else:
        comps[idx] += (x - t) + s
    sums[idx] = t


def _split(lo, hi, parts):
    parts = max(1, min(parts, hi - lo))
    edges = [lo + (hi - lo) * p // parts for p in range(parts + 1)]
    return list(zip(edges[:-1], edges[1:]))


def lattice_sums(n: int, m: int, halfwidth: int, outcomes, fcode: int = 0, fparams=(0.0, 0.0, 0.0),
                 quartic: float = 1.0 / 12.0, threads: int = 1, use_numba=None) -> LatticeSums:
    """Accumulate all window sums over |j_i| <= halfwidth, i < m.

    ``quartic`` is the coefficient q of the -q m^3/n^3 sum j^4 term in the
    Stirling exponent. ``threads`` sets the number of j_1 partitions, which
    are evaluated concurrently.
    """
    # the numba kernel exists only when numba is enabled at import time
    use_numba = _accel.USE_NUMBA and (use_numba is None or use_numba)
    kernel = _lattice_numba if use_numba else _lattice_numpy
    outcomes = np.ascontiguousarray(outcomes, dtype=float)
    logw = centered_log_weights(n, m, (m - 1) * halfwidth)
    log_center = log_center_pmf(n, m)
    c2, c3, c4, log_pre = _coefficients(n, m, quartic)
    p0, p1, p2 = (float(v) for v in fparams)
    parts = _split(-halfwidth, halfwidth + 1, threads)

    def run(bounds):
        sums = np.zeros(N_SUMS)
        comps = np.zeros(N_SUMS)
        istats = np.zeros(2, dtype=np.int64)
        fstats = np.zeros(2)
        kernel(n, m, halfwidth, bounds[0], bounds[1], outcomes, logw, log_center, fcode, p0, p1, p2,
               c2, c3, c4, log_pre, sums, comps, istats, fstats)
        return sums, comps, istats, fstats

    if len(parts) == 1:
        results = [run(parts[0])]
    else:
        with ThreadPoolExecutor(max_workers=len(parts)) as pool:
            results = list(pool.map(run, parts))

    totals = [math.fsum([v for r in results for v in (r[0][i], r[1][i])]) for i in range(N_SUMS)]
    return LatticeSums(
        mass=totals[MASS],
        mult_f=totals[MULT_F],
        riem_w=totals[RIEM_W],
        riem_f=totals[RIEM_F],
        dn=totals[DN],
        dn_stirling=totals[DN_STIRLING],
        stirling_f=totals[STIRLING_F],
        count=int(sum(int(r[2][0]) for r in results)),
        checksum=int(sum(int(r[2][1]) for r in results)),
        per_term_max=max(float(r[3][0]) for r in results),
        stirling_ratio_max=max(float(r[3][1]) for r in results),
        partitions=len(parts),
        backend="numba" if use_numba else "numpy",
    )


@njit(cache=True, nogil=True)
def _discrete_sum_numba(u, cum, values):
    last = values.shape[0] - 1
    total = 0.0
    comp = 0.0
    for i in range(u.shape[0]):
        k = np.searchsorted(cum, u[i])
        if k > last:
            k = last
        x = values[k]
        t = total + x
        if abs(total) >= abs(x):
            comp += (total - t) + x
        else:
            comp += (x - t) + total
        total = t
    return total + comp


def _discrete_sum_numpy(u, cum, values):
    idx = np.minimum(np.searchsorted(cum, u, side="left"), values.shape[0] - 1)
    return math.fsum(values[idx])


def discrete_quantile_sum(u, cum, values) -> float:
    """Sum of the discrete quantile over an array of uniforms."""
    if _accel.USE_NUMBA:
        return float(_discrete_sum_numba(u, cum, values))
    return _discrete_sum_numpy(u, cum, values)
