"""Benchmark the compiled kernels against the pure-Python fallback.

Runs the same master-equation and reduced-model scenarios through both
backends, reports wall time and speedup, and checks that the trajectories
agree (identical stepping logic, so differences are at rounding level).

Usage: python benchmarks/bench_backends.py [--repeat N]
"""

import argparse
import time

import numpy as np

from spinpump.backend import _fallback
from spinpump.operators import ground_maximally_mixed
from spinpump.params import Constant, ModulationSchedule, PhysicalParams

try:
    from spinpump.backend import _core
except ImportError:
    _core = None


def master_args(p, sched, t_grid, rtol=1e-8, atol=1e-10):
    kind, p0, ts, ths = sched.kernel_args()
    max_step = min(0.05 * 2 * np.pi / max(abs(sched.omega), abs(p.omega_B), 1.0),
                   0.1 / p.gamma_e)
    rho0 = ground_maximally_mixed()
    return (rho0, t_grid, p.omega_B, p.Omega, p.gamma_e, p.gamma, sched.omega,
            kind, p0, ts, ths, rtol, atol, max_step, 0.0)


def bloch_args(p, sched, t_grid, rtol=1e-8, atol=1e-10):
    kind, p0, ts, ths = sched.kernel_args()
    max_step = min(0.05 * 2 * np.pi / max(abs(sched.omega), abs(p.omega_B), 1.0),
                   0.1 / max(2 * (p.gamma + p.Gamma), 1e-300))
    m0 = np.array([0.0, 0.0, 0.0, 2.0 / 3.0, 0.0, 0.0])
    return (m0, t_grid, p.omega_B, p.Gamma, p.gamma, sched.omega,
            kind, p0, ts, ths, 0, 1.0, 0, 0, rtol, atol, max_step, 0.0)


def run(fn, args, repeat):
    best = np.inf
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    opts = ap.parse_args()

    p = PhysicalParams(omega_B=0.05, Omega=0.05, gamma_e=1.0, gamma=1e-4)
    sched = ModulationSchedule(omega=0.05, profile=Constant(0.2))

    scenarios = [
        ("master, 100 modulation periods",
         "integrate_master_grid", master_args(p, sched, np.linspace(0, 100 * 2 * np.pi / 0.05, 201))),
        ("bloch,  100 modulation periods",
         "integrate_bloch_grid", bloch_args(p, sched, np.linspace(0, 100 * 2 * np.pi / 0.05, 201))),
    ]

    print(f"{'scenario':<36} {'python':>10} {'cython':>10} {'speedup':>8}  agreement")
    for label, fn_name, args in scenarios:
        t_py, out_py = run(getattr(_fallback, fn_name), args, opts.repeat)
        if _core is None:
            print(f"{label:<36} {t_py:>9.3f}s {'n/a':>10} {'':>8}  (compiled backend unavailable)")
            continue
        t_cy, out_cy = run(getattr(_core, fn_name), args, opts.repeat)
        dev = float(np.max(np.abs(np.asarray(out_py[0]) - np.asarray(out_cy[0]))))
        print(f"{label:<36} {t_py:>9.3f}s {t_cy:>9.3f}s {t_py / t_cy:>7.1f}x  max|d| = {dev:.2e}")


if __name__ == "__main__":
    main()
