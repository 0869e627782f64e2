"""Exact identity suites over the small generator suite and the abelian family, merged into one report."""

import argparse
from pathlib import Path

from nbwalk.cli import main

ap = argparse.ArgumentParser(description=__doc__)
ap.add_argument("--out", default="results")
ap.add_argument("--n", default="4", help="trajectory length for the symmetry suites")
args = ap.parse_args()
out = Path(args.out)
out.mkdir(parents=True, exist_ok=True)

runs = {
    "bowtie_k1": ["--generator", "bowtie"],
    "bowtie_k2": ["--generator", "bowtie", "--k", "2"],
    "k4_k2": ["--generator", "complete", "--param", "n=4", "--k", "2"],
    "chords_k2": ["--generator", "chords", "--param", "n=6", "--k", "2"],
    "k4_k3": ["--generator", "complete", "--param", "n=4", "--k", "3"],
    "bowtie_vertex_k2": ["--generator", "bowtie", "--k", "2", "--mode", "vertex"],
}
codes, files = {}, []
for name, argv in runs.items():
    path = out / f"identities_{name}.json"
    codes[name] = main(["identities", *argv, "--n", args.n, "--out", str(path)])
    files.append(str(path))
for factors in ("5,5", "4,6", "7,3"):
    path = out / f"abelian_{factors.replace(',', 'x')}.json"
    codes[f"abelian_{factors}"] = main(["abelian", "--factors", factors, "--out", str(path)])
    files.append(str(path))
main(["report", *files, "--out", str(out / "identities_merged.json"), "--csv", str(out / "identities_merged.csv")])
for name, code in codes.items():
    print(f"{name:24s} exit {code}")
