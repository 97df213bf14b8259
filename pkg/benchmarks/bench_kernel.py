"""Compare the compiled and NumPy log-Delta kernels and time a full energy.

Run with ``python benchmarks/bench_kernel.py``.
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from casimirstack import _kernel_py

try:
    from casimirstack import _kernel
except ImportError:
    _kernel = None


def grid(n_l, n_k, d=2e-9, temperature=94.0):
    zeta_1 = 2.579e5 * temperature / 94.0
    zeta = np.arange(n_l) * zeta_1
    u = (np.arange(n_k) + 0.5) / n_k
    k = u / (1 - u) / d
    ones = np.ones(n_l)
    return zeta, ones, ones, k, d


def bench_kernels(n_l, n_k, m, repeat):
    zeta, e_in, e_out, k, d = grid(n_l, n_k)
    args = (zeta, e_in, e_out, k, d, 49593.3, True, m, True)
    rows = []
    backends = [("numpy", _kernel_py.log_delta_grid)]
    if _kernel is not None:
        backends.insert(0, ("cython", _kernel.log_delta_grid))
    ref = None
    for name, fn in backends:
        t = min(timeit.repeat(lambda: fn(*args), number=1, repeat=repeat))
        out = fn(*args)
        if ref is None:
            ref = out
            dev = 0.0
        else:
            dev = max(float(np.max(np.abs(out[0] - ref[0]))), float(np.max(np.abs(out[1] - ref[1]))))
        rows.append((name, t, n_l * n_k / t, dev))
    return rows


def bench_energy(pure):
    env = dict(os.environ)
    if pure:
        env["CASIMIRSTACK_PURE_PYTHON"] = "1"
    code = ("import time; from casimirstack import StackSpec, casimir_energy, BACKEND;"
            "s = StackSpec.plasma_sheets(19, 2e-9, 49593.3, 94.0); t = time.perf_counter();"
            "e = casimir_energy(s); print(BACKEND, time.perf_counter() - t, e.e_per_area)")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    backend, t, e = out.stdout.split()
    return backend, float(t), float(e)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-l", type=int, default=2000)
    ap.add_argument("--n-k", type=int, default=300)
    ap.add_argument("--cells", type=int, default=10)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    print(f"kernel grid: {args.n_l} Matsubara x {args.n_k} k points, {args.cells} cells, TM")
    print(f"{'backend':>8} {'seconds':>10} {'points/s':>12} {'max |dlog|':>12}")
    for name, t, rate, dev in bench_kernels(args.n_l, args.n_k, args.cells, args.repeat):
        print(f"{name:>8} {t:10.4f} {rate:12.4g} {dev:12.3g}")
    print("\nfull energy, N = 19 plasma sheets, d = 2 nm, T = 94 K")
    for pure in (False, True):
        backend, t, e = bench_energy(pure)
        print(f"{backend:>8} {t:10.3f} s  E/A = {e:.12e} J/m^2")


if __name__ == "__main__":
    main()
