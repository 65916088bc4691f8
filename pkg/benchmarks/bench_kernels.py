"""Compare the compiled and numpy kernel backends.

    python3 benchmarks/bench_kernels.py [--mc-samples N] [--traj N] [--repeat R]

Prints wall time per call (best of R) and the speed-up for the collapse
Monte Carlo sampler and the classical-channel trajectory loop.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from gravlab._kernels import _pykernels

try:
    from gravlab._kernels import _ckernels
except ImportError:
    _ckernels = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cc_args(n_traj, n_steps):
    rs = np.random.default_rng(0)
    psi0 = np.full(4, 0.5, dtype=complex)
    M = np.abs(rs.normal(size=(4, 4)))
    K = np.abs(rs.normal(size=(4, 4)))
    return (psi0, M, K + K.T, None, 1e-3, 1e-2, n_steps, 1, 0, n_traj, 10, True, False, 0.0,
            1.0, 1.0)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--mc-samples", type=int, default=2_000_000)
    ap.add_argument("--traj", type=int, default=2000)
    ap.add_argument("--steps", type=int, default=200)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    cases = {
        f"dp_mc_moments ({args.mc_samples:.0e} samples)":
            lambda k: k.dp_mc_moments(np.array([0.7, 0.2, 0.0]), 1.0, 1, 0, args.mc_samples),
        f"cc_run ({args.traj} traj x {args.steps} steps, 4 sites)":
            lambda k: k.cc_run(*cc_args(args.traj, args.steps)),
    }
    print(f"{'kernel':<44} {'numpy [s]':>10} {'cython [s]':>11} {'speed-up':>9}")
    for name, call in cases.items():
        t_py = best_of(lambda: call(_pykernels), args.repeat)
        if _ckernels is None:
            print(f"{name:<44} {t_py:>10.3f} {'n/a':>11} {'n/a':>9}")
            continue
        t_c = best_of(lambda: call(_ckernels), args.repeat)
        print(f"{name:<44} {t_py:>10.3f} {t_c:>11.3f} {t_py / t_c:>8.1f}x")


if __name__ == "__main__":
    main()
