"""Compare the compiled and numpy ascent kernels.

Usage: python3 benchmarks/bench_kernels.py [--repeat 5]

Three measurements, each checked for agreement between the backends:

* search: one multi-start ascent as extraction runs it (range projectors of
  a random separable mixture, stop on |dG| < 1e-12), plus the single-row
  polish of the winner;
* throughput: a fixed 300 iterations for all 64 starts, no early exit;
* extraction: 20 full certificates at n=3, k=3, each backend in a fresh
  subprocess.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from bosesep import states
from bosesep._kernels import _pure
from bosesep.bosonic import monomial_tables
from bosesep.linalg import SystemShape, range_projector
from bosesep.separability import _pt_range_projector

try:
    from bosesep._kernels import _ext
except ImportError:
    _ext = None

SHAPES = [(3, 3, 6), (4, 3, 12), (3, 4, 9), (5, 3, 20)]
RESTARTS = 64

EXTRACT_SNIPPET = """
import time
from bosesep import states, BACKEND
from bosesep.linalg import SystemShape
from bosesep.separability import extract_certificate
shape = SystemShape(3, 3)
t0 = time.perf_counter()
for s in range(20):
    extract_certificate(states.random_separable_mixture(shape, 1 + s % 9, s), seed=s)
print(BACKEND, time.perf_counter() - t0)
"""


def projectors(n, k, r, seed=0):
    shape = SystemShape(n, k)
    rho = states.random_separable_mixture(shape, r, seed, "symmetric").matrix
    return range_projector(rho), _pt_range_projector(rho, shape)


def starts(n, seed=1):
    rng = np.random.default_rng(seed)
    return rng.standard_normal((RESTARTS, n)) + 1j * rng.standard_normal((RESTARTS, n))


def search(kernel, q, q_pt, tables, f0):
    f, g, _ = kernel(q, q_pt, *tables, f0, 500, 1e-12, np.inf, 0.0)
    best = f[int(np.argmax(g))][None, :]
    return kernel(q, q_pt, *tables, best, 5000, np.inf, 1e-14, 0.0)


def throughput(kernel, q, q_pt, tables, f0):
    return kernel(q, q_pt, *tables, f0, 300, 0.0, 0.0, 0.0)


def best_of(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def table(title, runner, repeat):
    print(title)
    print(f"{'shape':>10} {'numpy [ms]':>12} {'cython [ms]':>12} {'speedup':>8} {'max |dG|':>10}")
    for n, k, r in SHAPES:
        q, q_pt = projectors(n, k, r)
        tables = (*monomial_tables(n, k), *monomial_tables(n, k - 1))
        f0 = starts(n)
        label = f"n={n},k={k}"
        t_pure = best_of(lambda: runner(_pure.ascend, q, q_pt, tables, f0), repeat)
        if _ext is None:
            print(f"{label:>10} {1e3 * t_pure:12.1f}")
            continue
        t_ext = best_of(lambda: runner(_ext.ascend, q, q_pt, tables, f0), repeat)
        diff = np.max(np.abs(runner(_pure.ascend, q, q_pt, tables, f0)[1]
                             - runner(_ext.ascend, q, q_pt, tables, f0)[1]))
        print(f"{label:>10} {1e3 * t_pure:12.1f} {1e3 * t_ext:12.1f} {t_pure / t_ext:8.1f} {diff:10.1e}")
    print()


def main():
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    if _ext is None:
        print("compiled extension not built; only the numpy backend is available\n")

    table(f"search: {RESTARTS} starts, stop on |dG| < 1e-12, then polish (best of {args.repeat})",
          search, args.repeat)
    table(f"throughput: {RESTARTS} starts x 300 iterations (best of {args.repeat})",
          throughput, args.repeat)

    print("extraction: 20 certificates at n=3,k=3")
    for pure in ("1", "0"):
        env = dict(os.environ, BOSESEP_PURE_PYTHON=pure)
        out = subprocess.run([sys.executable, "-c", EXTRACT_SNIPPET], env=env,
                             capture_output=True, text=True, check=True)
        backend, seconds = out.stdout.split()
        print(f"{backend:>10} {float(seconds):8.2f} s")


if __name__ == "__main__":
    main()
