"""Gibbs die for a range of target means, with the M=2.5 case in detail."""

import argparse

import numpy as np

from lazyens.die import solve_beta

PRINTED_PROBS = np.array([0.3476, 0.2396, 0.1654, 0.1143, 0.0788, 0.0543])


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--values", default="1,2,3,4,5,6")
    ap.add_argument("--means", default="1.5,2.0,2.5,3.0,3.5,4.5,5.5")
    args = ap.parse_args()
    values = np.array([float(v) for v in args.values.split(",")])

    print(f"{'mean':>6} {'beta':>12} {'entropy':>10}  probs")
    for m in (float(v) for v in args.means.split(",")):
        die = solve_beta(values, m)
        probs = " ".join(f"{p:.4f}" for p in die.probs)
        print(f"{m:6.2f} {die.beta:12.8f} {die.entropy:10.6f}  {probs}")

    if args.values == "1,2,3,4,5,6":
        die = solve_beta(values, 2.5)
        diff = die.probs - PRINTED_PROBS
        ratios = PRINTED_PROBS[1:] / PRINTED_PROBS[:-1]
        print()
        print("reference list:   ", " ".join(f"{p:.4f}" for p in PRINTED_PROBS))
        print("exact at M=2.5:   ", " ".join(f"{p:.6f}" for p in die.probs))
        print("difference:       ", " ".join(f"{d:+.1e}" for d in diff))
        print(f"reference ratios:  {ratios.min():.4f} .. {ratios.max():.4f} "
              f"(a Gibbs law has constant ratio {np.exp(-die.beta):.4f})")
        # best single beta for the reference list, in max-norm
        grid = np.linspace(0.36, 0.38, 20001)
        w = np.exp(-np.outer(grid, values))
        err = np.abs(w / w.sum(axis=1, keepdims=True) - PRINTED_PROBS).max(axis=1)
        k = int(np.argmin(err))
        print(f"best beta for the reference list: {grid[k]:.6f}, max error {err[k]:.2e}")


if __name__ == "__main__":
    main()
