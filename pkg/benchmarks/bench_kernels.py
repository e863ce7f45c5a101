"""Time the numba kernels against the pure-numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 3]

Each row runs the same lattice window on both backends and checks that the
results agree before reporting timings. With ``HAARCLT_DISABLE_NUMBA=1`` only
the numpy column is filled.
"""
import argparse
import math
import time

import numpy as np

from haarclt import _accel
from haarclt.functions import get_function
from haarclt.haar import truncate_expansion
from haarclt.kernels import _discrete_sum_numpy, discrete_quantile_sum, lattice_sums
from haarclt.multinomial import floor_b_sqrt_n

WINDOWS = [
    # (label, dist, M, n, b)
    ("m=2 n=10000 b=3", "twopoint", 0, 10000, 3.0),
    ("m=4 n=256 b=2", "uniform", 1, 256, 2.0),
    ("m=4 n=1024 b=2", "uniform", 1, 1024, 2.0),
    ("m=8 n=64 b=0.5", "normal", 2, 64, 0.5),
]


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def bench_lattice(repeat):
    fn = get_function("cos")
    rows = []
    for label, dist, M, n, b in WINDOWS:
        exp = truncate_expansion(dist, M)
        h = floor_b_sqrt_n(b, n)

        def call(flag):
            return lattice_sums(n, exp.m, h, exp.outcomes, fn.code, fn.params, use_numba=flag)

        t_np, slow = best_of(lambda: call(False), repeat)
        t_nb = None
        if _accel.USE_NUMBA:
            call(True)  # compile outside the timed runs
            t_nb, fast = best_of(lambda: call(True), repeat)
            assert fast.checksum == slow.checksum and abs(fast.dn - slow.dn) <= 1e-13
        rows.append((label, slow.count, t_np, t_nb))
    return rows


def bench_discrete(repeat, size=10**7):
    u = np.random.default_rng(0).random(size)
    cum = np.array([0.5, 1.0])
    vals = np.array([-1.0, 1.0])
    t_np, slow = best_of(lambda: _discrete_sum_numpy(u, cum, vals), repeat)
    t_nb = None
    if _accel.USE_NUMBA:
        discrete_quantile_sum(u[:10], cum, vals)
        t_nb, fast = best_of(lambda: discrete_quantile_sum(u, cum, vals), repeat)
        assert fast == slow
    return [(f"two-point quantile sum, {size:.0e} draws", size, t_np, t_nb)]


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    print(f"backend default: {_accel.backend()}")
    print(f"{'workload':<38}{'points':>10}{'numpy s':>11}{'numba s':>11}{'speedup':>9}")
    for label, count, t_np, t_nb in bench_lattice(args.repeat) + bench_discrete(args.repeat):
        nb = f"{t_nb:11.4f}" if t_nb is not None else f"{'-':>11}"
        speed = f"{t_np / t_nb:9.1f}" if t_nb else f"{'-':>9}"
        print(f"{label:<38}{count:>10}{t_np:11.4f}{nb}{speed}")


if __name__ == "__main__":
    main()
