"""Compare the compiled and numpy RK4 kernels.

    python3 benchmarks/bench_kernels.py [--repeat 5]

The dispatching ``rk4_linear`` switches from the compiled kernel to numpy
above ``COMPILED_MAX_DIM``; this table is where that threshold comes from.
Sizes cover a single subsystem (Liouvillian 16x16), a subsystem with two
and three photons (36x36, 64x64) and the two-subsystem joint space (256x256).
"""
import argparse
import time

import numpy as np

from qdcavity.composition import joint_liouvillian
from qdcavity.integrate import compiled_rk4_linear, python_rk4_linear
from qdcavity.model import SubsystemParams, TruncationSpec, build_liouvillian

PARAMS = SubsystemParams(1.0, 0.3, 0.3, 0.3)


def cases():
    yield "subsystem n_max=1", build_liouvillian(PARAMS), 2, 2000
    yield "subsystem n_max=2", build_liouvillian(PARAMS, TruncationSpec(2)), 2, 2000
    yield "subsystem n_max=3", build_liouvillian(PARAMS, TruncationSpec(3)), 2, 2000
    yield "joint n_max=1", joint_liouvillian(PARAMS, PARAMS), 1, 500


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    print(f"{'case':<20}{'n':>6}{'steps':>8}{'numpy [s]':>12}{'cython [s]':>12}{'speedup':>9}")
    for label, L, cols, steps in cases():
        n = L.shape[0]
        y0 = rng.normal(size=(n, cols)) + 1j * rng.normal(size=(n, cols))
        h, substeps, samples = 0.005, 10, steps // 10
        t_py = best_of(lambda: python_rk4_linear(L, y0, h, substeps, samples), args.repeat)
        if compiled_rk4_linear is None:
            print(f"{label:<20}{n:>6}{steps:>8}{t_py:>12.4f}{'n/a':>12}{'':>9}")
            continue
        a = python_rk4_linear(L, y0, h, substeps, samples)
        b = compiled_rk4_linear(L, y0, h, substeps, samples)
        assert np.abs(a - b).max() <= 1e-10 * max(1.0, np.abs(a).max())
        t_cy = best_of(lambda: compiled_rk4_linear(L, y0, h, substeps, samples), args.repeat)
        print(f"{label:<20}{n:>6}{steps:>8}{t_py:>12.4f}{t_cy:>12.4f}{t_py / t_cy:>9.2f}")


if __name__ == "__main__":
    main()
