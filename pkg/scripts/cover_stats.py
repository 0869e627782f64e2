"""Cover-tree coupling statistics (regeneration success and increment tails) on complete graphs."""

import argparse
from pathlib import Path

from nbwalk.cli import main

ap = argparse.ArgumentParser(description=__doc__)
ap.add_argument("--out", default="results")
ap.add_argument("--regenerations", default="100000")
ap.add_argument("--seed", default="0")
args = ap.parse_args()
out = Path(args.out)
out.mkdir(parents=True, exist_ok=True)

for n in (4, 6, 8):
    main(["cover", "--generator", "complete", "--param", f"n={n}", "--regenerations", args.regenerations,
          "--seed", args.seed, "--out", str(out / f"cover_K{n}.csv")])
    print(f"K{n}:", (out / f"cover_K{n}.csv").read_text().splitlines()[1])
