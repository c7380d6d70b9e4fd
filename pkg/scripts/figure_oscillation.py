"""Theta = 0 inventories for an even and an odd N with the eight cluster points."""

import argparse
from pathlib import Path

from owgame.cli import main

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path("results"))
    ap.add_argument("--N-list", default="100,101")
    ap.add_argument("--t-grid", type=int, default=200)
    a = ap.parse_args()
    a.out.mkdir(parents=True, exist_ok=True)
    main(["oscillate", "--n", "10", "--rho", "1", "--T", "1", "--N-list", a.N_list,
          "--t-grid", str(a.t_grid), "--output", str(a.out / "oscillate.csv")])
