"""Time the compiled and numpy kernels on the same workloads.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 3]
"""

import argparse
import time

import numpy as np

import tunnelmoments.dynamics as dyn
from tunnelmoments import _backend
from tunnelmoments.dynamics import IntegratorConfig, calibrate_well_depth, ground_state_init, integrate
from tunnelmoments.potentials import Coulomb3D, GaussianWell1D, HalfCycleSin3, Lab, Static

W = 0.05811


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def rhs_loop(cls, model, pulse, n=20000):
    system = cls(model, pulse, Lab(), 0.25)
    d = model.dim
    y = np.concatenate([np.full(d, 0.3), np.zeros(d), np.ones(d), np.zeros(d)])

    def run():
        for i in range(n):
            system.rhs(0.01 * i, y)

    return run


def full_run(cls, model, pulse, t_end):
    gs = ground_state_init(model)

    def run():
        old = dyn.System
        dyn.System = cls
        try:
            integrate(gs.state, model, pulse, cfg=IntegratorConfig(t_end=t_end))
        finally:
            dyn.System = old

    return run


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    try:
        cy = _backend.system_class("cython")
    except ImportError:
        raise SystemExit("compiled extension not built; run `pip install -e . --no-build-isolation`")
    py = _backend.system_class("python")

    gauss = GaussianWell1D(calibrate_well_depth(-2.0 / 9.0))
    argon = Coulomb3D(alpha_I=7.0)
    workloads = [
        ("rhs x20000, 1-D Gaussian well", lambda c: rhs_loop(c, gauss, HalfCycleSin3(0.14, W))),
        ("rhs x20000, 3-D polarizable Coulomb", lambda c: rhs_loop(c, argon, Static((0, 0, 0.015)))),
        ("integrate 1-D half cycle to t=150", lambda c: full_run(c, gauss, HalfCycleSin3(0.14, W), 150.0)),
        ("integrate 3-D static field to t=100", lambda c: full_run(c, argon, Static((0, 0, 0.015)), 100.0)),
    ]
    print(f"{'workload':40s} {'cython [s]':>11s} {'python [s]':>11s} {'speed-up':>9s}")
    for name, make in workloads:
        tc = best_of(make(cy), args.repeat)
        tp = best_of(make(py), args.repeat)
        print(f"{name:40s} {tc:11.4f} {tp:11.4f} {tp / tc:8.1f}x")


if __name__ == "__main__":
    main()
