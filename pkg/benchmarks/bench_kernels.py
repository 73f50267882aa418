"""Compare the compiled and pure-Python kernels.

Run with ``python3 benchmarks/bench_kernels.py [--repeat N]``.
"""
import argparse
import time

import numpy as np

from syntrophy import _core
from syntrophy.dynamics import ATOL, RTOL, max_step, settle_targets
from syntrophy.equilibria import all_equilibria
from syntrophy.growth import ChemostatConfig, GrowthModel

MODEL = GrowthModel("monod_product", 8, 1, 2, 4, 2, 1)
CONFIG = ChemostatConfig(0.95, 3.0, 3.0)


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(n_batch):
    D = CONFIG.D
    xs = np.linspace(0.0, CONFIG.s1_in, 2000)
    stable = [e for e in all_equilibria(MODEL, CONFIG, D) if e.stability == "stable_node"]
    targets, radii, speeds = settle_targets(stable, D)
    rng = np.random.default_rng(0)
    x1 = rng.uniform(0, CONFIG.s1_in, n_batch)
    Y0 = np.column_stack([x1, rng.uniform(0, 1, n_batch) * (x1 + CONFIG.s2_in)])

    def graph(py):
        return lambda: _core.graph_values(MODEL, CONFIG, 1, D, xs, force_python=py)

    def trajectory(py):
        return lambda: _core.integrate(MODEL, CONFIG, D, [2.5, 0.5, 3.3, 0.2], 200.0 / D, RTOL, ATOL,
                                       force_python=py, max_step=max_step(D))

    def batch(py):
        return lambda: _core.integrate_batch(MODEL, CONFIG, D, Y0, 500.0 / D, RTOL, ATOL,
                                             targets=targets, radii=radii, speeds=speeds,
                                             force_python=py, max_step=max_step(D))

    return [("graph_values x2000", graph), ("4D trajectory to 200/D", trajectory),
            (f"basin batch of {n_batch}", batch)]


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--batch", type=int, default=200)
    args = ap.parse_args()
    if _core.ck is None:
        print("compiled kernels are not built; only the Python timings are shown")
    print(f"{'case':<26}{'compiled [s]':>14}{'python [s]':>14}{'speedup':>10}")
    for name, make in cases(args.batch):
        t_py = _best(make(True), args.repeat)
        if _core.ck is None:
            print(f"{name:<26}{'-':>14}{t_py:>14.4f}{'-':>10}")
            continue
        t_c = _best(make(False), args.repeat)
        print(f"{name:<26}{t_c:>14.4f}{t_py:>14.4f}{t_py / t_c:>9.1f}x")


if __name__ == "__main__":
    main()
