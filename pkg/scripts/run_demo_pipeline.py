#!/usr/bin/env python3
"""Drive both analysis pipelines end-to-end on the demo data.

Generates demo data if missing, then runs freq-compare, bayes-compare
(with all three priors), omnibus, a Poisson regression, and a scenario
prediction, leaving all artifacts under the output directory.
"""

import argparse
import subprocess
import sys
from pathlib import Path

from benchbayes.cli import main as benchbayes_main


def run(argv):
    print(f"\n$ benchbayes {' '.join(argv)}")
    code = benchbayes_main(argv)
    if code != 0:
        sys.exit(code)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--data", default="demo_data")
    parser.add_argument("--out", default="demo_out")
    parser.add_argument("--seed", type=int, default=42)
    args = parser.parse_args()

    data = Path(args.data)
    if not (data / "rosetta.csv").exists():
        subprocess.run(
            [
                sys.executable,
                str(Path(__file__).with_name("generate_demo_data.py")),
                "--out",
                str(data),
            ],
            check=True,
        )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    run(
        [
            "freq-compare",
            "--data", str(data / "rosetta.csv"),
            "--correction", "bh",
            "--out", str(out / "freq_table.md"),
            "--dot", str(out / "freq_graph.dot"),
        ]
    )
    run(
        [
            "bayes-compare",
            "--data", str(data / "rosetta.csv"),
            "--bench", str(data / "bench.csv"),
            "--prior", "all",
            "--out", str(out / "bayes_table.md"),
            "--dot", str(out / "bayes_graph.dot"),
            "--posteriors", str(out / "posteriors"),
        ]
    )
    run(["omnibus", "--data", str(data / "rosetta.csv")])
    run(
        [
            "regress",
            "--data", str(data / "debug.csv"),
            "--model", "poisson",
            "--seed", str(args.seed),
            "--out", str(out / "poisson_fit.csv"),
        ]
    )
    run(
        [
            "predict",
            "--fit", str(out / "poisson_fit.csv"),
            "--scenario", str(data / "scenario.toml"),
            "--draws", "20000",
            "--seed", str(args.seed),
        ]
    )
    print(f"\nartifacts in {out}/")


if __name__ == "__main__":
    main()
