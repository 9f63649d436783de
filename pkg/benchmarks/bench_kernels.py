#!/usr/bin/env python3
"""Benchmark the compiled propagation kernel against the pure-Python twin.

Three workloads dominate real runs: resonance-style energy scans with norm
quadrature, eigenvalue root scans without norms, and fine-grid solves of the
oracle class.  Run after `python setup.py build_ext --inplace`:

    python benchmarks/bench_kernels.py
"""

import time

import numpy as np

import qcloak as qc
from qcloak import _kernel_py
from qcloak.propagate import _acoustic_arrays

try:
    from qcloak import _kernel
except ImportError:
    _kernel = None


def timeit(fn, reps):
    t0 = time.perf_counter()
    for _ in range(reps):
        fn()
    return (time.perf_counter() - t0) / reps


def workloads():
    cs, ca = qc.DOUBLED_CORE
    layers = qc.homogenize(qc.truncate(1.005, cs, ca), 50)
    system = qc.AcousticSystem(layers, qc.CorePotential.step(-71.45, 0.9))
    edges, k2, w = _acoustic_arrays(system, 0.5)

    fine_n = 10_000
    fine_edges = [3.0 * i / fine_n for i in range(fine_n + 1)]
    rng = np.random.default_rng(0)
    fine_k2 = list(0.5 + 0.3 * np.sin(np.linspace(0, 20, fine_n)))
    fine_w = list(1.0 + 0.2 * rng.random(fine_n - 1)) + [1.0]

    samp = list(np.linspace(0.01, 3.0, 600))

    yield ("resonance scan step (52 shells, norms)", 200,
           lambda k: k.propagate(0, edges, k2, w, 1.0, True, None))
    yield ("eigenvalue scan step (52 shells, no norms)", 500,
           lambda k: k.propagate(5, edges, k2, w, 1.0, False, None))
    yield ("fine-grid solve (10k shells, no norms)", 5,
           lambda k: k.propagate(0, fine_edges, fine_k2, fine_w, 1.0,
                                 False, None))
    yield ("field sampling (52 shells, 600 samples)", 50,
           lambda k: k.propagate(2, edges, k2, w, 1.0, False, samp))


def main():
    print(f"active backend: {qc.KERNEL_BACKEND}")
    if _kernel is None:
        print("compiled kernel not built; showing pure-Python timings only")
    header = f"{'workload':45s} {'python':>10s} {'compiled':>10s} {'speedup':>8s}"
    print(header)
    print("-" * len(header))
    for name, reps, job in workloads():
        t_py = timeit(lambda: job(_kernel_py), reps)
        if _kernel is not None:
            t_c = timeit(lambda: job(_kernel), reps)
            print(f"{name:45s} {t_py*1e3:8.2f}ms {t_c*1e3:8.2f}ms "
                  f"{t_py/t_c:7.1f}x")
        else:
            print(f"{name:45s} {t_py*1e3:8.2f}ms {'-':>10s} {'-':>8s}")


if __name__ == "__main__":
    main()
