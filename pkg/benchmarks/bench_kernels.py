"""Compare the compiled and numpy Pauli kernels on Heisenberg chains.

Usage: python3 benchmarks/bench_kernels.py [--sizes 10,12,14,16] [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from dbqite import _pykernels
from dbqite.hamiltonian import heisenberg_chain
from dbqite.statevector import random_state

try:
    from dbqite import _kernels
except ImportError:  # extension not built
    _kernels = None


def bench(L: int, repeat: int):
    H = heisenberg_chain(L)
    xm, zm, ph, co = H._masks
    coeffs = ph * co
    psi = random_state(L, np.random.default_rng(0)).amplitudes.copy()
    thetas = np.full(xm.size, 0.01)
    rows = []
    for name, impl in (("python", _pykernels), ("cython", _kernels)):
        if impl is None:
            continue
        t_sum = min(timeit.repeat(lambda: impl.apply_pauli_sum(psi, xm, zm, coeffs),
                                  number=1, repeat=repeat))
        buf = psi.copy()
        t_rot = min(timeit.repeat(lambda: impl.apply_rotations_inplace(buf, xm, zm, ph, thetas),
                                  number=1, repeat=repeat))
        rows.append((name, t_sum, t_rot))
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="10,12,14,16")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    print(f"{'L':>3} {'backend':>8} {'H psi [ms]':>11} {'rotations [ms]':>15}")
    for L in (int(x) for x in args.sizes.split(",")):
        rows = bench(L, args.repeat)
        for name, t_sum, t_rot in rows:
            print(f"{L:>3} {name:>8} {1e3 * t_sum:>11.3f} {1e3 * t_rot:>15.3f}")
        if len(rows) == 2:
            print(f"{L:>3} {'speedup':>8} {rows[0][1] / rows[1][1]:>10.1f}x {rows[0][2] / rows[1][2]:>14.1f}x")


if __name__ == "__main__":
    main()
