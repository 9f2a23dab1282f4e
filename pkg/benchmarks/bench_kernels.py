"""Benchmark the numba kernels against the pure-numpy fallback.

Times the two hot elementwise denoisers at full sweep sizes and one
end-to-end solve per backend. Run from the repository root:

    python benchmarks/bench_kernels.py [--reps 200] [--trials 3]
"""

import argparse
import time

import numpy as np

from onebit_jce import _kernels
from onebit_jce.channel import ChannelModelConfig, assemble_channel, sample_rays
from onebit_jce.frontend import CfoParams, gen_training, simulate_rx, snr_to_radius
from onebit_jce.gamp import gamp_solve, initial_prior
from onebit_jce.lifting import build_operator

D, M = 16384, 1024  # lifted dimension and measurement count of the reference sweep


def bench_kernels(backend, reps, rng):
    _kernels.set_backend(backend)
    r = rng.standard_normal(D) + 1j * rng.standard_normal(D)
    tau_r = 10 ** rng.uniform(-3, 0, size=D)
    p = rng.standard_normal(M) + 1j * rng.standard_normal(M)
    tau_p = 10 ** rng.uniform(-3, 0, size=M)
    y = np.sign(rng.standard_normal(M)) + 1j * np.sign(rng.standard_normal(M))

    # warm-up (jit compile on the numba path)
    _kernels.bg_denoise(r, tau_r, 0.1, 0j, 1.0)
    _kernels.onebit_denoise(p, tau_p, y)

    t0 = time.perf_counter()
    for _ in range(reps):
        _kernels.bg_denoise(r, tau_r, 0.1, 0j, 1.0)
    bg = (time.perf_counter() - t0) / reps

    t0 = time.perf_counter()
    for _ in range(reps):
        _kernels.onebit_denoise(p, tau_p, y)
    ob = (time.perf_counter() - t0) / reps
    return bg, ob


def bench_solve(backend, trials, rng):
    _kernels.set_backend(backend)
    cfg = ChannelModelConfig()
    elapsed = []
    for _ in range(trials):
        h = assemble_channel(sample_rays(cfg, rng), cfg)
        training = gen_training(16, 64, snr_to_radius(0.0, 16), rng)
        y = simulate_rx(h, training, CfoParams(0.3436), rng).ravel()
        op = build_operator(training, 16)
        t0 = time.perf_counter()
        gamp_solve(op, y, initial_prior(op))
        elapsed.append(time.perf_counter() - t0)
    return float(np.median(elapsed))


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--reps", type=int, default=200, help="kernel repetitions")
    parser.add_argument("--trials", type=int, default=3, help="end-to-end solves")
    args = parser.parse_args()

    results = {}
    for backend in ("numpy", "numba"):
        try:
            rng = np.random.default_rng(0)
            bg, ob = bench_kernels(backend, args.reps, rng)
            solve = bench_solve(backend, args.trials, rng)
            results[backend] = (bg, ob, solve)
        except ValueError as err:
            print(f"{backend}: unavailable ({err})")

    print(f"{'backend':>8} {'bg_denoise':>14} {'onebit_denoise':>16} {'full solve':>12}")
    for backend, (bg, ob, solve) in results.items():
        print(f"{backend:>8} {bg * 1e6:>11.1f} us {ob * 1e6:>13.1f} us {solve * 1e3:>9.1f} ms")
    if len(results) == 2:
        np_r, nb_r = results["numpy"], results["numba"]
        print(f"{'speedup':>8} {np_r[0] / nb_r[0]:>13.2f}x {np_r[1] / nb_r[1]:>15.2f}x "
              f"{np_r[2] / nb_r[2]:>11.2f}x")


if __name__ == "__main__":
    main()
