"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py --qubits 10 15 --repeat 20
"""

import argparse
import timeit

import numpy as np

from riqs import _kernels_py as py

try:
    from riqs import _kernels as cy
except ImportError:
    cy = None


def cases(n, rng):
    psi = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    psi /= np.linalg.norm(psi)
    u = np.array([[1, 1], [-1, 1]], dtype=complex) / np.sqrt(2)
    c = rng.uniform(size=(n, n))
    c = c + c.T
    np.fill_diagonal(c, 0)
    return {
        "apply_1q": lambda m: m.apply_1q(psi, n, n // 2, u),
        "apply_uniform_1q": lambda m: m.apply_uniform_1q(psi, n, u),
        "ising_diagonal": lambda m: m.ising_diagonal(n, c),
        "collective_moments": lambda m: m.collective_moments(psi, n),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--qubits", type=int, nargs="+", default=[10, 15])
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    if cy is None:
        print("compiled extension not built; only the fallback is timed")
    rng = np.random.default_rng(0)
    print(f"{'kernel':20s} {'n':>3s} {'python ms':>10s} {'cython ms':>10s} {'speedup':>8s}")
    for n in args.qubits:
        for name, fn in cases(n, rng).items():
            t_py = min(timeit.repeat(lambda: fn(py), number=1, repeat=args.repeat)) * 1e3
            if cy is None:
                print(f"{name:20s} {n:3d} {t_py:10.3f} {'-':>10s} {'-':>8s}")
                continue
            t_cy = min(timeit.repeat(lambda: fn(cy), number=1, repeat=args.repeat)) * 1e3
            print(f"{name:20s} {n:3d} {t_py:10.3f} {t_cy:10.3f} {t_py / t_cy:8.1f}")


if __name__ == "__main__":
    main()
