"""Mean-square gap between the rescaled field and its limit as eps shrinks.

Prints R_eps from quadrature for both examples at (t, x) = (1, 20), with an
optional shared-noise Monte Carlo column on a finer frequency grid.

    python3 scripts/convergence_study.py --mc-seeds 2000
"""

import argparse

from frbe_fields.kernels import KernelSpec
from frbe_fields.simulate import FrequencyGrid, ScalingParams, mc_mean_square_gap, mean_square_gap
from frbe_fields.spectral import ModelParams, example_spectrum

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--levels", type=int, default=5, help="eps = 1, 1/2, ..., 2^-(levels-1)")
    ap.add_argument("--mc-seeds", type=int, default=0)
    ap.add_argument("--t", type=float, default=1.0)
    ap.add_argument("--x", type=float, default=20.0)
    ap.add_argument("--rho3", type=float, default=1.0)
    args = ap.parse_args()

    mp = ModelParams(alpha=1.0, beta=0.5, gamma_b=1.0, mu=1.0)
    ks = KernelSpec(nu=0.5, a=1.0)
    fine = FrequencyGrid(0.001, 10000, 0.0)
    for case, grid in (("cyclic", FrequencyGrid(0.01, 1000, 0.0)), ("origin", FrequencyGrid(0.01, 1000, 0.5))):
        sp = example_spectrum(case)
        sc = ScalingParams.for_model(mp, sp, args.rho3)
        print(f"{case}:  eps         R_quad       R_mc (fine grid)")
        for k in range(args.levels):
            eps = 2.0**-k
            r = mean_square_gap(mp, sp, ks, grid, sc, eps, args.t, args.x)
            line = f"  {eps:10.5f}  {r:.6e}"
            if args.mc_seeds > 1:
                mc = mc_mean_square_gap(mp, sp, ks, fine, sc, eps, args.t, args.x, range(args.mc_seeds))
                line += f"  {mc.estimate:.6e} +- {mc.std_err:.1e}"
            print(line)
