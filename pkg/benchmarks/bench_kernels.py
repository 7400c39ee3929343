"""Time the numba kernels against their numpy fallbacks.

Usage: python3 benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from inid_dp import _kernels as k


def cases(gen):
    t = gen.standard_normal((200_000, 20))
    d = gen.uniform(0.1, 1.0, 20)
    scale = gen.uniform(0.5, 2.0, 20)
    x = gen.standard_normal(100_000)
    X = gen.standard_normal((2000, 50))
    y = np.sign(gen.standard_normal(2000))
    steps = np.full(50, 0.1)
    clips = np.full(50, 1.0)
    noise = 0.01 * gen.standard_normal(50)

    def cd(fn):
        theta = np.zeros(50)
        margin = np.zeros(2000)
        for _ in range(10):
            fn(X, y, theta, margin, steps, clips, noise, k.LOGISTIC, k.REG_L1, 0.01)

    return {
        "gaussian_loss (200k x 20)": (lambda f: f(t, d, scale), "gaussian_loss"),
        "laplace_loss (200k x 20)": (lambda f: f(t, d, scale), "laplace_loss"),
        "pairwise_abs_diff (100k)": (lambda f: f(x), "pairwise_abs_diff"),
        "cd_pass x10 (2000 x 50)": (cd, "cd_pass"),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not k.HAS_NUMBA:
        print("numba unavailable (or disabled); nothing to compare")
        return
    gen = np.random.default_rng(0)
    print(f"{'kernel':<28}{'numpy ms':>10}{'numba ms':>10}{'speedup':>9}")
    for name, (run, base) in cases(gen).items():
        np_fn, nb_fn = getattr(k, base + "_np"), getattr(k, base + "_nb")
        run(nb_fn)  # compile
        t_np = min(timeit.repeat(lambda: run(np_fn), number=1, repeat=args.repeat))
        t_nb = min(timeit.repeat(lambda: run(nb_fn), number=1, repeat=args.repeat))
        print(f"{name:<28}{1e3 * t_np:>10.2f}{1e3 * t_nb:>10.2f}{t_np / t_nb:>8.1f}x")


if __name__ == "__main__":
    main()
