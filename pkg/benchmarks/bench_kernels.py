"""Time the compiled and numpy stepping loops on identical ensembles.

Usage: ``python benchmarks/bench_kernels.py [--repeat 3]``.  Prints wall time
per backend, the speedup and the largest coefficient difference.
"""
import argparse
import math
import time

import numpy as np

from shsim import kernels
from shsim.dynamics import ModelParams
from shsim.geometry import NoiseModel
from shsim.integrator import SimConfig, simulate_ensemble
from shsim.spectral import build_basis

# explicit schemes need dt * mu_max <= 2, which caps them at 6 modes on (0, pi) for dt = 1e-3
CASES = [
    # (label, n_modes, n_exp, scheme, ensemble, T, dt)
    ("n_exp=1 exp_euler", 16, 1, "exp_euler_ito", 64, 1.0, 1e-3),
    ("n_exp=1 heun", 6, 1, "heun_strat", 128, 1.0, 1e-3),
    ("n_exp=2 euler", 6, 2, "euler_ito", 128, 1.0, 1e-3),
    ("n_exp=2 exp_euler", 32, 2, "exp_euler_ito", 16, 0.5, 1e-3),
]


def best_time(fn, repeat):
    best, out = math.inf, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if kernels.BACKEND != "compiled":
        print("compiled core not available; only the numpy backend will run")
    print(f"{'case':<20} {'python s':>10} {'compiled s':>11} {'speedup':>8} {'max diff':>10}")
    for label, n_modes, n_exp, scheme, ens, T, dt in CASES:
        b = build_basis(math.pi, n_modes, n_exp=n_exp)
        cfg = SimConfig(b, NoiseModel.default(b, 2), T=T, dt=dt, scheme=scheme,
                        params=ModelParams(n_exp), record_every=100)
        idx = range(ens)
        tp, a = best_time(lambda: simulate_ensemble(cfg, idx, backend="python"), args.repeat)
        if kernels.BACKEND == "compiled":
            tc, c = best_time(lambda: simulate_ensemble(cfg, idx, backend="compiled"), args.repeat)
            diff = float(np.max(np.abs(a.states - c.states)))
            print(f"{label:<20} {tp:>10.3f} {tc:>11.3f} {tp / tc:>8.1f} {diff:>10.1e}")
        else:
            print(f"{label:<20} {tp:>10.3f} {'-':>11} {'-':>8} {'-':>10}")


if __name__ == "__main__":
    main()
