"""Solve random density matrices and report roundtrip error, bounds and timing."""

import argparse
import time

import numpy as np

from lazyens.hermitian import random_density
from lazyens.solver import ensemble_average, kl_from_uniform, solve


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--count", type=int, default=100)
    ap.add_argument("--n-max", type=int, default=8)
    ap.add_argument("--min-eigenvalue", type=float, default=0.02)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    rows = []
    t0 = time.perf_counter()
    for _ in range(args.count):
        n = int(rng.integers(2, args.n_max + 1))
        rho = random_density(n, rng, args.min_eigenvalue)
        ens, rep = solve(rho)
        resid = np.linalg.norm(ensemble_average(ens).matrix - rho)
        lmin = np.linalg.eigvalsh(rho)[0]
        rows.append((n, rep.iterations, resid, rep.y_range * lmin, kl_from_uniform(ens, rho), rep.bounds_ok))
    elapsed = time.perf_counter() - t0

    rows = np.array(rows, dtype=float)
    print(f"{args.count} solves in {elapsed:.2f} s")
    print(f"iterations: median {np.median(rows[:, 1]):.0f}, max {rows[:, 1].max():.0f}")
    print(f"max roundtrip residual: {rows[:, 2].max():.2e}")
    print(f"(y_n - y_1) * lambda_min: max {rows[:, 3].max():.3f} (bound 2)")
    print(f"KL range: {rows[:, 4].min():.4f} .. {rows[:, 4].max():.4f}")
    print(f"bound violations: {int(np.sum(rows[:, 5] == 0))}")


if __name__ == "__main__":
    main()
