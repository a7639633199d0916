"""Time the numba kernels against their numpy fallbacks.

    python benchmarks/bench_kernels.py [--repeat 5]

Both backends are imported directly, so the env flag does not matter here.
Outputs agree to rounding; the max abs difference is printed per kernel.
"""

import argparse
import timeit

import numpy as np

from boussym import _kernels as kr
from boussym.taylor import basis


def _duffing_args(batch, nsteps):
    rng = np.random.default_rng(0)
    phi0 = rng.uniform(-1, 1, batch)
    dphi0 = rng.uniform(-1, 1, batch)
    K = rng.uniform(0, 3, batch)
    dt = np.full(batch, 1e-3)
    return phi0, dphi0, K, dt, nsteps, 100


def cases():
    tb = basis(6, 3)
    rng = np.random.default_rng(1)
    a, b = rng.standard_normal(tb.size), rng.standard_normal(tb.size)
    targs = (a, b, tb._ia, tb._ib, tb._ik, tb.size)
    dargs = _duffing_args(8, 20000)
    return [
        ("taylor_mul (6 vars, degree 3)", kr.taylor_mul_numba, kr.taylor_mul_numpy, targs, 2000),
        ("rk4_duffing (8 x 20000 steps)", kr.rk4_duffing_numba, kr.rk4_duffing_numpy, dargs, 1),
        ("yoshida8_duffing (8 x 20000 steps)", kr.yoshida8_duffing_numba, kr.yoshida8_duffing_numpy,
         dargs + (kr.YOSHIDA8_STAGES,), 1),
    ]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not kr.NUMBA_AVAILABLE:
        print("numba not importable; nothing to compare")
        return
    print(f"{'kernel':38s} {'numba [s]':>11s} {'numpy [s]':>11s} {'speedup':>8s} {'max diff':>9s}")
    for name, fast, slow, fargs, number in cases():
        out_fast, out_slow = fast(*fargs), slow(*fargs)  # also triggers compilation
        diff = max(float(np.max(np.abs(np.asarray(x) - np.asarray(y))))
                   for x, y in zip(np.atleast_2d(out_fast), np.atleast_2d(out_slow)))
        tf = min(timeit.repeat(lambda: fast(*fargs), number=number, repeat=args.repeat)) / number
        ts = min(timeit.repeat(lambda: slow(*fargs), number=number, repeat=args.repeat)) / number
        print(f"{name:38s} {tf:11.3e} {ts:11.3e} {ts / tf:8.1f} {diff:9.1e}")


if __name__ == "__main__":
    main()
