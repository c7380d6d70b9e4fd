"""Audit the equilibrium over a parameter sweep and print one line per point.

Runs the closed form against the dense solve and both certificates at each
(n, theta, rho T, N). Exits non-zero if any point fails.
"""

import argparse
import sys

import numpy as np

from owgame import GridSpec, ModelParams, full_audit


def main(N_max: int, step: int, trials: int) -> int:
    failed = 0
    for n in (2, 3, 5, 10):
        for theta in (0.0, 0.05, (n - 1) / 4, 0.5):
            for rhoT in (0.5, 1.0, 2.0):
                p = ModelParams.create(rhoT, 1.0, theta, np.linspace(-1.0, 2.0, n))
                worst = None
                for N in range(2, N_max + 1, step):
                    rep = full_audit(p, GridSpec.uniform(N, 1.0), trials=trials)
                    failed += not rep.passed
                    if worst is None or rep.kkt_spread > worst.kkt_spread:
                        worst = rep
                print(f"n={n:2d} theta={theta:<5g} rhoT={rhoT:<3g} worst kkt {worst.kkt_spread:.1e} "
                      f"gap {worst.solver_gap:.1e} margin {worst.perturbation_margin:.1e}")
    print(f"failed points: {failed}")
    return 1 if failed else 0


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--N-max", type=int, default=400)
    ap.add_argument("--step", type=int, default=7)
    ap.add_argument("--trials", type=int, default=100)
    a = ap.parse_args()
    sys.exit(main(a.N_max, a.step, a.trials))
