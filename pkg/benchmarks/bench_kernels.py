#!/usr/bin/env python3
"""Time each hot kernel's numba build against its numpy fallback.

Run from the repo root after an editable install:

    python3 benchmarks/bench_kernels.py

Both builds are importable side by side regardless of the
SPECMERGE_DISABLE_NUMBA flag, so this script always measures both. The
first numba call per kernel triggers JIT compilation; a warmup pass
keeps that out of the timings.
"""

import time

import numpy as np

from specmerge import _kernels as k

REPEATS = 7


def best_of(fn, *args):
    best = float("inf")
    for _ in range(REPEATS):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    rng = np.random.default_rng(7)

    x = rng.standard_normal(5000)
    y = rng.standard_normal(5000)
    acov = rng.standard_normal(101)
    wgt = np.abs(rng.standard_normal(101))
    freqs = np.linspace(0.0, 0.5, 512, endpoint=False)
    cpos = rng.standard_normal(101)
    cneg = rng.standard_normal(101)
    rows = np.abs(rng.standard_normal((60, 512))) + 0.1
    rows /= rows.sum(axis=1, keepdims=True) * (freqs[1] - freqs[0])
    eps = rng.standard_normal(100_000)

    cases = [
        ("autocov T=5000 h=200", k._autocov_nb, k._autocov_np, (x, 200)),
        ("crosscov T=5000 h=200", k._crosscov_nb, k._crosscov_np, (x, y, 200)),
        ("lag_window_eval a=100 n=512",
         k._lag_window_eval_nb, k._lag_window_eval_np, (acov, wgt, freqs)),
        ("cross_spectrum_eval a=100 n=512",
         k._cross_spectrum_eval_nb, k._cross_spectrum_eval_np,
         (cpos, cneg, wgt, freqs)),
        ("tvd_matrix 60x512", k._tvd_matrix_nb, k._tvd_matrix_np,
         (rows, freqs[1] - freqs[0])),
        ("tvd_vec 1x60x512", k._tvd_vec_nb, k._tvd_vec_np,
         (rows[0], rows, freqs[1] - freqs[0])),
        ("ar2_recursion T=100000", k._ar2_recursion_nb, k._ar2_recursion_np,
         (0.9, -0.5, eps)),
    ]

    print(f"{'kernel':34s} {'numba':>10s} {'numpy':>10s} {'numpy/numba':>12s}")
    for name, fn_nb, fn_np, args in cases:
        fn_nb(*args)  # JIT warmup
        t_nb = best_of(fn_nb, *args)
        t_np = best_of(fn_np, *args)
        print(f"{name:34s} {t_nb * 1e3:9.3f}ms {t_np * 1e3:9.3f}ms "
              f"{t_np / t_nb:11.1f}x")


if __name__ == "__main__":
    main()
