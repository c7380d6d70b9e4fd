"""Regenerate the data behind the theta > 0 convergence plots of V and W.

Writes one CSV per theta with V, W, g, f and the scaled errors on a fine
time grid, for n = 10 and rho = T = 1.
"""

import argparse
from pathlib import Path

from owgame.cli import main


def run(out: Path, N_list: str, t_grid: int) -> None:
    out.mkdir(parents=True, exist_ok=True)
    for theta in ("0.05", "0.1", "0.25"):
        main(["limits", "--n", "10", "--rho", "1", "--T", "1", "--theta", theta,
              "--N-list", N_list, "--t-grid", str(t_grid), "--output", str(out / f"limits_theta{theta}.csv")])


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path("results"))
    ap.add_argument("--N-list", default="25,50,100,200")
    ap.add_argument("--t-grid", type=int, default=200)
    a = ap.parse_args()
    run(a.out, a.N_list, a.t_grid)
