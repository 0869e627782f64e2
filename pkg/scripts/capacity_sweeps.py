"""Box capacity sweeps in two and three dimensions plus the shell-subdivision comparison."""

import argparse
from pathlib import Path

from nbwalk.cli import main

ap = argparse.ArgumentParser(description=__doc__)
ap.add_argument("--out", default="results")
ap.add_argument("--quick", action="store_true", help="small sizes for a smoke run")
args = ap.parse_args()
out = Path(args.out)
out.mkdir(parents=True, exist_ok=True)

sizes2 = "5,9,13" if args.quick else "8,16,32"
sizes3 = "5,9" if args.quick else "8,12,16"
radii = "2,3" if args.quick else "2,3,4,5,6"
codes = [
    main(["capacity", "--dims", "2", "--sizes", sizes2, "--out", str(out / "capacity_2d.csv")]),
    main(["capacity", "--dims", "3", "--sizes", sizes3, "--walks", "srw,nbrw_sym", "--out", str(out / "capacity_3d.csv")]),
    main(["capacity", "--experiment", "subdivision", "--dims", "3", "--sizes", radii,
          "--out", str(out / "subdivision_3d.csv")]),
]
raise SystemExit(max(codes))
