"""Monte Carlo returns to the box centre before exit, for the simple and non-backtracking walks."""

import argparse
from pathlib import Path

from nbwalk.cli import main

ap = argparse.ArgumentParser(description=__doc__)
ap.add_argument("--out", default="results")
ap.add_argument("--trials", default="2000")
ap.add_argument("--seed", default="0")
args = ap.parse_args()
out = Path(args.out)
out.mkdir(parents=True, exist_ok=True)

for walk in ("srw", "nbrw"):
    for dims in ("2", "3"):
        path = out / f"returns_{walk}_{dims}d.csv"
        main(["walk", "--walk", walk, "--dims", dims, "--sizes", "16,32,64" if dims == "2" else "16,32",
              "--trials", args.trials, "--seed", args.seed, "--out", str(path)])
        print(path.read_text(), end="")
