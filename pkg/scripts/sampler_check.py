"""Sample from the solved ensemble and compare against rho and the exact KL."""

import argparse
import time

import numpy as np

from lazyens.hermitian import random_density
from lazyens.sampler import estimate_kl, sample
from lazyens.solver import kl_from_uniform, solve


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=4)
    ap.add_argument("--count", type=int, default=10**6)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--min-eigenvalue", type=float, default=0.05)
    args = ap.parse_args()

    rho = random_density(args.n, np.random.default_rng(args.seed), args.min_eigenvalue)
    ens, rep = solve(rho)
    t0 = time.perf_counter()
    batch = sample(ens, args.count, args.seed)
    elapsed = time.perf_counter() - t0
    est, se = estimate_kl(ens, batch)
    exact = kl_from_uniform(ens, rho)

    print(f"n={args.n}, eigenvalues of rho: {np.round(np.linalg.eigvalsh(rho), 4)}")
    print(f"{args.count} samples in {elapsed:.2f} s, acceptance rate {batch.accept_rate:.4f}")
    print(f"max entrywise |z|: {batch.max_abs_z(rho):.2f}")
    print(f"KL exact {exact:.6f}, estimate {est:.6f} +/- {se:.6f} (z = {(est - exact) / se:+.2f})")


if __name__ == "__main__":
    main()
