"""Observed order of the RK4 oracle against exact propagation."""

import argparse

import numpy as np

from scallop_switch.simulate import convergence_scenarios, observed_order


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--n", type=int, default=10)
    args = ap.parse_args()
    steps = (4e-3, 2e-3, 1e-3)
    for name, err in convergence_scenarios(args.seed, args.n, steps):
        errs = " ".join(f"{e:.3e}" for e in err)
        print(f"{name:28s} errors [{errs}] order {observed_order(steps, err):.3f}")


if __name__ == "__main__":
    np.set_printoptions(precision=4)
    main()
