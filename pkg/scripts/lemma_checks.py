"""Decay checks of the scalar/coupled recursions on random valid constants.

For each draw, reports the decay check at 0.9 and 1.5 times the rate gap
delta1 - delta2 (expected: pass, then fail).
"""
import argparse

import numpy as np

from siu.lemma_lab import decay_rate_check, random_config, simulate_coupled, simulate_modified


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--draws", type=int, default=10)
    p.add_argument("--T", type=int, default=10**6)
    p.add_argument("--seed", type=int, default=2024)
    args = p.parse_args()

    rng = np.random.default_rng(args.seed)
    print("system,delta1,delta2,check@0.9gap,check@1.5gap,v_T")
    for name, sim in (("modified", simulate_modified), ("coupled", simulate_coupled)):
        for _ in range(args.draws):
            cfg = random_config(rng)
            tr = sim(cfg, args.T)
            gap = cfg.delta1 - cfg.delta2
            lo = decay_rate_check(tr, 0.9 * gap)
            hi = decay_rate_check(tr, 1.5 * gap)
            print(f"{name},{cfg.delta1:.3f},{cfg.delta2:.3f},{lo},{hi},{tr.v[-1]:.3e}")


if __name__ == "__main__":
    main()
