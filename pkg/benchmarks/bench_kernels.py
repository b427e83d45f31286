"""Time the numba-compiled kernels against their numpy fallbacks.

Run with ``python3 benchmarks/bench_kernels.py``.  Both paths get identical
inputs and their outputs are compared before timing.  With
``QPQ_DISABLE_NUMBA=1`` the ``loop`` column runs as plain Python.
"""

import argparse
import timeit

import numpy as np

from qpq import backend_name, kernels


def _honest_case(rng, sessions, L):
    signs = rng.integers(0, 2, size=(sessions, L), dtype=np.int64)
    shifts = rng.integers(1, L, size=sessions, dtype=np.int64)
    u = rng.random(sessions)
    db = rng.integers(0, 2, size=L - 1, dtype=np.int64)
    return signs, shifts, u, db, (L - 1) // 2


def _sample_case(rng, draws, rows, cols):
    cdf = kernels.build_cdf(rng.random((rows, cols)))
    return cdf, rng.integers(0, rows, size=draws), rng.random(draws)


def _pmin_case(rng, L):
    z = rng.standard_normal(L) + 1j * rng.standard_normal(L)
    return (z / np.linalg.norm(z),)


def _same(a, b):
    if isinstance(a, tuple):
        return all(_same(x, y) for x, y in zip(a, b))
    return np.allclose(a, b, rtol=0, atol=1e-12)


def bench(label, loop, numpy_impl, args, repeat):
    assert _same(loop(*args), numpy_impl(*args)), label
    t_loop = min(timeit.repeat(lambda: loop(*args), number=1, repeat=repeat))
    t_np = min(timeit.repeat(lambda: numpy_impl(*args), number=1, repeat=repeat))
    print(f"{label:<32} {t_loop * 1e3:>10.2f} {t_np * 1e3:>10.2f} {t_np / t_loop:>8.2f}x")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)

    print(f"backend: {backend_name()}")
    print(f"{'kernel':<32} {'loop ms':>10} {'numpy ms':>10} {'speedup':>9}")
    for sessions, L in ((10_000, 5), (10_000, 65), (100_000, 17)):
        bench(f"honest_batch B={sessions} L={L}", kernels.honest_batch_loop,
              kernels.honest_batch_numpy, _honest_case(rng, sessions, L), args.repeat)
    for draws, rows, cols in ((100_000, 3, 8), (100_000, 1000, 16), (100_000, 7, 130)):
        bench(f"sample_rows n={draws} R={rows} M={cols}", kernels.sample_rows_loop,
              kernels.sample_rows_numpy, _sample_case(rng, draws, rows, cols), args.repeat)
    for L in (4, 64, 512):
        bench(f"pmin_terms L={L}", kernels.pmin_terms_loop, kernels.pmin_terms_numpy,
              _pmin_case(rng, L), args.repeat)


if __name__ == "__main__":
    main()
