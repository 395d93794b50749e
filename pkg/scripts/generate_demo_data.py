#!/usr/bin/env python3
"""Generate a small synthetic dataset trio for driving the CLI.

Writes rosetta.csv (runtime measurements), bench.csv (an independent
benchmark set for data-derived priors), debug.csv (a count-outcome
experiment), and scenario.toml into the target directory.
"""

import argparse
from pathlib import Path

import numpy as np

LANG_SPEED = {
    "C": 1.0,
    "C#": 1.8,
    "F#": 2.6,
    "Go": 1.4,
    "Haskell": 2.4,
    "Java": 1.7,
    "Python": 3.5,
    "Ruby": 4.2,
}

SCENARIO = """\
[ability]
low = 0.8
medium = 0.1
high = 0.1

[treatment]
manual = 0.1
auto = 0.9

[experience]
B = 0.5
M = 0.5
"""


def performance_rows(rng, n_tasks):
    lines = ["language,task,variant,seconds"]
    for t in range(n_tasks):
        task = f"task{t:02d}"
        base = rng.lognormal(0.0, 0.8)
        for lang, factor in LANG_SPEED.items():
            for variant in range(rng.integers(1, 4)):
                seconds = base * factor * rng.lognormal(0.0, 0.25)
                lines.append(f"{lang},{task},{variant},{seconds:.6f}")
    return "\n".join(lines) + "\n"


def experiment_rows(rng, n_subjects):
    beta = {"intercept": -0.4, "treatment": 0.5, "experience": 0.6, "ability": 0.5}
    lines = ["subject,treatment,system,lab,experience,ability,fixed"]
    for i in range(n_subjects):
        treatment = rng.integers(0, 2)
        system = rng.integers(0, 2)
        lab = rng.integers(0, 2)
        experience = rng.integers(0, 2)
        ability = rng.integers(0, 3)
        eta = (
            beta["intercept"]
            + beta["treatment"] * treatment
            + beta["experience"] * experience
            + beta["ability"] * ability
        )
        fixed = rng.poisson(np.exp(eta))
        lines.append(
            f"s{i:02d},{('manual', 'auto')[treatment]},{('J', 'X')[system]},"
            f"{('1', '2')[lab]},{('B', 'M')[experience]},"
            f"{('low', 'medium', 'high')[ability]},{fixed}"
        )
    return "\n".join(lines) + "\n"


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="demo_data", help="target directory")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--tasks", type=int, default=20)
    parser.add_argument("--subjects", type=int, default=60)
    args = parser.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(args.seed)
    (out / "rosetta.csv").write_text(performance_rows(rng, args.tasks))
    (out / "bench.csv").write_text(performance_rows(rng, max(args.tasks // 2, 4)))
    (out / "debug.csv").write_text(experiment_rows(rng, args.subjects))
    (out / "scenario.toml").write_text(SCENARIO)
    print(f"wrote rosetta.csv, bench.csv, debug.csv, scenario.toml to {out}/")


if __name__ == "__main__":
    main()
