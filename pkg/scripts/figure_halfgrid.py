"""Half-grid instantaneous costs: paths on a fine grid and sup-errors along N.

For each mode the script stores the sup-error table and, for the largest N,
the inventory paths V, W next to g, f so the localised oscillation can be
plotted.
"""

import argparse
import csv
from pathlib import Path

import numpy as np

from owgame import GridSpec, ModelParams, eval_f, eval_g, halfgrid_convergence, solve_halfgrid
from owgame.asymptotics import path_from_vectors
from owgame.serialize import fmt_float


def main(out: Path, n: int, theta: float, N_list: list[int]) -> None:
    out.mkdir(parents=True, exist_ok=True)
    zero_net = [1.0, -1.0] + [0.0] * (n - 2)
    for mode, x in (("second", zero_net), ("first", [1.0] * n)):
        p = ModelParams.create(1.0, 1.0, theta, x)
        rows = halfgrid_convergence(p, N_list, mode)
        with open(out / f"halfgrid_{mode}_errors.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["N", "sup_X_error", "sup_V_first_half", "sup_V_second_half"])
            for r in rows:
                w.writerow([r.N] + [fmt_float(v) for v in (r.sup_X_error, r.sup_V_first_half, r.sup_V_second_half)])
        N = max(N_list)
        grid = GridSpec.uniform(N, p.T)
        t = np.linspace(0.0, p.T, 2 * N + 1)
        path = path_from_vectors(p, grid, solve_halfgrid(p, grid, mode), t)
        with open(out / f"halfgrid_{mode}_paths_N{N}.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "V", "W", "g", "f"])
            for row in zip(t, path.V, path.W, eval_g(t, p), eval_f(t, p)):
                w.writerow([fmt_float(v) for v in row])


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path("results"))
    ap.add_argument("--n", type=int, default=10)
    ap.add_argument("--theta", type=float, default=1.0)
    ap.add_argument("--N-list", default="100,200,400,800")
    a = ap.parse_args()
    main(a.out, a.n, a.theta, [int(s) for s in a.N_list.split(",")])
