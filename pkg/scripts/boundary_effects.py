"""Finite-horizon deficit of Cov(X - E X) relative to the stationary t A.

Only the stationary Y_r enters A. At horizon T = t / eps^2 the functional
misses the boundary strips of width M at both ends, so the ratio of the
sample covariance to t A should approach 1 like 1 - c / T. This script
records that ratio along an eps ladder; nothing is asserted.

    python3 scripts/boundary_effects.py --n 10000 --t 1 --eps 0.5 0.35 0.25
"""
import argparse

import numpy as np

from schro_renorm import fk
from schro_renorm.config import ExperimentConfig
from schro_renorm.experiments import compute_constants, covariance_for


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=10_000)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--eps", type=float, nargs="+", default=[0.5, 0.35, 0.25])
    p.add_argument("--seed", type=int, default=ExperimentConfig().rng_seed)
    args = p.parse_args(argv)

    cfg = ExperimentConfig().replace(rng_seed=args.seed)
    R = covariance_for(cfg)
    A = compute_constants(cfg).A
    print(f"A = [[{A.a11:.4g}, {A.a12:.4g}], [{A.a12:.4g}, {A.a22:.4g}]] from {A.n_samples} samples")
    print(f"{'eps':>6} {'T':>7} {'re/re':>8} {'re/im':>8} {'im/im':>8} {'1 - c/T fit c':>14}")
    for eps in args.eps:
        b = fk.sample_functionals(args.t, eps, args.n, args.seed, R, cfg.fk_delta)
        X = b.X - fk.mean_X_discrete(args.t, eps, R, cfg.fk_delta)
        T = args.t / eps ** 2
        ratios = [np.mean(X.real ** 2) / (args.t * A.a11),
                  np.mean(X.real * X.imag) / (args.t * A.a12),
                  np.mean(X.imag ** 2) / (args.t * A.a22)]
        c = T * (1.0 - np.mean([ratios[0], ratios[2]]))
        print(f"{eps:6.3g} {T:7.3g} " + " ".join(f"{r:8.4f}" for r in ratios) + f" {c:14.3g}")


if __name__ == "__main__":
    main()
