"""Benchmark the residual kernels: numba-compiled loops vs pure numpy.

Usage: python benchmarks/bench_kernels.py [n_samples]
"""

import sys
import time

import numpy as np

from popa_algebra import (CanonicalSolution, ComplexReImSolution,
                          DegenerateExpSolution, DegenerateForm,
                          PartitionSolution, PartitionSpec, hadamard,
                          complex_plane, rho_of)
from popa_algebra import _kernels
from popa_algebra.solutions import GROUP_REJECT_EPS


def bench_case(name, sol, n, repeats=5):
    rng = np.random.default_rng(0)
    d = sol.algebra.dim
    X = rng.uniform(-0.4, 0.4, size=(n, d))
    Y = rng.uniform(-0.4, 0.4, size=(n, d))
    fam, mult, M, w, axis, r, g = sol._kernel_args()
    rho = rho_of(sol).coords
    unit = sol.algebra.unit().coords
    args = (fam, mult, M, w, axis, r, g, rho, unit, X, Y, GROUP_REJECT_EPS)

    def run(force_numpy):
        best = float("inf")
        for _ in range(repeats):
            t0 = time.perf_counter()
            out = _kernels.gs_residual_batch(*args, force_numpy=force_numpy)
            best = min(best, time.perf_counter() - t0)
        return best, out

    t_np, out_np = run(True)
    if _kernels.NUMBA_ENABLED:
        _kernels.gs_residual_batch(*args)  # trigger compilation outside timing
        t_nb, out_nb = run(False)
        agree = (np.allclose(out_np[0], out_nb[0], atol=1e-13)
                 and np.array_equal(out_np[2], out_nb[2]))
        print(f"{name:28s} numpy {t_np * 1e3:8.2f} ms   numba {t_nb * 1e3:8.2f} ms"
              f"   speedup {t_np / t_nb:5.2f}x   agree={agree}")
    else:
        print(f"{name:28s} numpy {t_np * 1e3:8.2f} ms   (numba disabled)")


def main():
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 200_000
    print(f"n_samples = {n}, numba enabled = {_kernels.NUMBA_ENABLED}")
    d6 = hadamard(6)
    cases = [
        ("canonical d=6", CanonicalSolution(d6.element([1, -0.5, 0.5, 2, 0.3, -0.7]))),
        ("partition d=6", PartitionSolution(PartitionSpec(
            ((0, 1, 2), (3, 4), (5,)), np.array([1.0, 2.0, -1.0, 0.5, 0.7, 3.0])))),
        ("exponential d=2", DegenerateExpSolution(DegenerateForm.ONE_EXP,
                                                  axis=0, gamma_exp=1.3)),
        ("affine power d=2", DegenerateExpSolution(DegenerateForm.AFFINE_POWER,
                                                   axis=0, rho=0.7, gamma_exp=1.8)),
        ("complex re-im", ComplexReImSolution(0.4, 1.5)),
        ("canonical complex", CanonicalSolution(complex_plane().element([0.5, 0.7]))),
    ]
    for name, sol in cases:
        bench_case(name, sol, n)


if __name__ == "__main__":
    main()
