"""Time the compiled kernels against the NumPy fallback.

    python3 benchmarks/bench_kernels.py [--n 256] [--repeat 5]

Prints one line per kernel with the best-of-``repeat`` wall time of each
backend and the speedup. Also times one end-to-end surface integration
with each backend active.
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from dirac_moutard import _kernels
from dirac_moutard._kernels import python_backend as py


def best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def kernel_cases(n, rng):
    f = rng.normal(size=(n, n, 3)) + 1j * rng.normal(size=(n, n, 3))
    g = rng.normal(size=(n, n, 3)) + 1j * rng.normal(size=(n, n, 3))
    v = rng.normal(size=(n, n, 2)) + 1j * rng.normal(size=(n, n, 2))
    active = np.ones((n, n), bool)
    a = rng.normal(size=(n, n, 2, 2)) + 1j * rng.normal(size=(n, n, 2, 2))
    b = rng.normal(size=(n, n, 2, 2)) + 1j * rng.normal(size=(n, n, 2, 2))
    c = n // 2
    return {
        "cumtrapz_canonical": lambda k: k.cumtrapz_canonical(f, g, 0.1, 0.1, c, c),
        "propagate_signs": lambda k: k.propagate_signs(v, c, c, active),
        "mat2_mul": lambda k: k.mat2_mul(a, b),
        "mat2_inv": lambda k: k.mat2_inv(a, 1e-14),
    }


_E2E = ("import time, warnings; from dirac_moutard import scenarios, _kernels; "
        "from dirac_moutard.weierstrass import integrate_surface; "
        "sc = scenarios.sphere_offset({n}); warnings.simplefilter('ignore'); "
        "t = time.perf_counter(); integrate_surface(sc.psi, sc.grid, sc.base, sc.x0, U=sc.U); "
        "print(_kernels.BACKEND, time.perf_counter() - t)")


def end_to_end(n):
    rows = []
    for pure in ("0", "1"):
        env = dict(os.environ, DIRAC_MOUTARD_PURE=pure)
        out = subprocess.run([sys.executable, "-c", _E2E.format(n=n)], env=env,
                             capture_output=True, text=True, check=True).stdout.split()
        rows.append((out[0], float(out[1])))
    return rows


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=256, help="grid nodes per axis")
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)
    cy = _kernels.compiled_backend
    if cy is None:
        print("compiled kernels not built; nothing to compare")
        return 1
    rng = np.random.default_rng(0)
    print(f"grid {args.n} x {args.n}, best of {args.repeat}")
    print(f"{'kernel':22s} {'python [ms]':>12s} {'cython [ms]':>12s} {'speedup':>8s}")
    for name, fn in kernel_cases(args.n, rng).items():
        tp = best(lambda: fn(py), args.repeat)
        tc = best(lambda: fn(cy), args.repeat)
        print(f"{name:22s} {1e3 * tp:12.2f} {1e3 * tc:12.2f} {tp / tc:8.1f}")
    print("integrate_surface (sphere_offset):")
    for backend, t in end_to_end(args.n):
        print(f"  {backend:8s} {1e3 * t:10.1f} ms")
    return 0


if __name__ == "__main__":
    sys.exit(main())
