"""Command-line interface: pairwise comparison pipelines, the omnibus test,
regression fits, and scenario prediction.

Exit codes: 0 success, 2 input/format error, 3 degenerate data, 4 sampler
diagnostics failure. The BB_SEED environment variable supplies a default
seed; an explicit --seed wins.
"""

from __future__ import annotations

import argparse
import itertools
import json
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - Python 3.10
    import tomli as tomllib

from . import dataio, freqstats, inference, regression, report, speedup
from .errors import (
    BenchBayesError,
    CycleError,
    DegenerateDataError,
    DegeneratePriorError,
    DiagnosticsError,
    DomainError,
    EmptyComparisonError,
    FormatError,
    InputError,
    MixingError,
    PriorDataError,
    SamplerInitError,
    UnknownLanguageError,
)

EXIT_INPUT = 2
EXIT_DEGENERATE = 3
EXIT_DIAGNOSTICS = 4

_INPUT_ERRORS = (
    FormatError,
    InputError,
    DomainError,
    UnknownLanguageError,
    PriorDataError,
    CycleError,
    FileNotFoundError,
)
_DEGENERATE_ERRORS = (DegenerateDataError, DegeneratePriorError, EmptyComparisonError)
_DIAGNOSTIC_ERRORS = (DiagnosticsError, MixingError, SamplerInitError)

PRIOR_CLI_NAMES = {
    "uniform": "uniform",
    "centered": "centered_normal",
    "shifted": "shifted_normal",
}


def _load_performance(path: str) -> dataio.PerformanceDataset:
    with open(path, "rb") as handle:
        return dataio.load_performance_csv(handle)


def _resolve_seed(value) -> int:
    if value is not None:
        return value
    env = os.environ.get("BB_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise DomainError(f"BB_SEED must be an integer, got {env!r}") from None
    return 0


def _table_format(path: str) -> str:
    return "markdown" if path.endswith((".md", ".markdown")) else "csv"


def _safe_name(language: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]", "-", language.replace("#", "sharp"))


def _pair_runtimes(ds, lang1, lang2):
    common = sorted(set(ds.tasks(lang1)) & set(ds.tasks(lang2)))
    if not common:
        raise EmptyComparisonError(f"{lang1} and {lang2} share no tasks")
    x = [ds.optimal(lang1, t) for t in common]
    y = [ds.optimal(lang2, t) for t in common]
    return x, y


def freq_pair_records(ds, correction: str, alpha: float):
    """Per-pair signed-rank p (jointly corrected), Cliff's delta, and speedup
    median/mean over all language pairs."""
    languages = ds.languages
    pairs = list(itertools.combinations(languages, 2))

    def analyze(pair):
        lang1, lang2 = pair
        x, y = _pair_runtimes(ds, lang1, lang2)
        speedups = dataio.paired_speedups(ds, lang1, lang2).values
        test = freqstats.wilcoxon_signed_rank(x, y)
        delta = freqstats.cliffs_delta(x, y)
        return {
            "lang1": lang1,
            "lang2": lang2,
            "p_raw": test.p_value,
            "delta": delta,
            "m": float(np.median(speedups)),
            "mu": float(np.mean(speedups)),
        }

    with ThreadPoolExecutor(max_workers=min(8, len(pairs))) as pool:
        rows = list(pool.map(analyze, pairs))
    adjusted = freqstats.adjust_pvalues([r["p_raw"] for r in rows], correction)
    for row, p in zip(rows, adjusted):
        row["p"] = p
    return rows


def cmd_freq_compare(args) -> int:
    ds = _load_performance(args.data)
    correction = "benjamini_hochberg" if args.correction == "bh" else args.correction
    rows = freq_pair_records(ds, correction, args.alpha)
    records = [
        {"lang1": r["lang1"], "lang2": r["lang2"], "p": r["p"], "delta": r["delta"],
         "m": r["m"], "mu": r["mu"]}
        for r in rows
    ]
    table = report.emit_table(records, _table_format(args.out))
    Path(args.out).write_text(table)
    levels = report.LevelRules(weak=args.alpha, strong=args.alpha / 5.0)
    graph = report.build_graph(
        [report.FreqPairRecord(r["lang1"], r["lang2"], r["p"], r["delta"]) for r in rows],
        levels,
    )
    reduced, was_transitive = report.transitive_reduction(graph)
    Path(args.dot).write_text(report.emit_dot(reduced if was_transitive else graph))
    significant = sum(1 for r in rows if r["p"] < args.alpha)
    print(f"{len(rows)} pairs, {significant} significant at alpha={args.alpha} "
          f"({correction} correction)")
    print(f"table -> {args.out}")
    print(f"graph -> {args.dot} (transitive: {'yes' if was_transitive else 'no'})")
    return 0


def bayes_pair_reports(ds, bench, kinds, grid):
    """Sensitivity comparisons for every language pair under each prior kind."""
    languages = ds.languages
    pairs = list(itertools.combinations(languages, 2))

    def analyze(pair):
        lang1, lang2 = pair
        data = dataio.paired_speedups(ds, lang1, lang2)
        bench_pair = None
        if bench is not None:
            bench_pair = dataio.paired_speedups(bench, lang1, lang2)
        out = {}
        for kind in kinds:
            prior = speedup.make_prior(kind, bench_pair)
            out[kind] = speedup.compare_pair(data, prior, grid)
        return (lang1, lang2), out

    with ThreadPoolExecutor(max_workers=min(8, len(pairs))) as pool:
        return dict(pool.map(analyze, pairs))


def _parse_grid(text: str) -> speedup.GridSpec:
    match = re.fullmatch(r"(\d+)x(\d+)", text)
    if not match:
        raise DomainError(f"--grid must look like 1999x200, got {text!r}")
    return speedup.GridSpec(n_s=int(match.group(1)), n_sigma=int(match.group(2)))


def _suffixed(path: str, label: str) -> Path:
    p = Path(path)
    return p.with_name(f"{p.stem}.{label}{p.suffix}")


def cmd_bayes_compare(args) -> int:
    ds = _load_performance(args.data)
    bench = _load_performance(args.bench) if args.bench else None
    if args.prior == "all":
        kinds = ["uniform"] + (["centered_normal", "shifted_normal"] if bench else [])
    else:
        kinds = [PRIOR_CLI_NAMES[args.prior]]
    if any(k != "uniform" for k in kinds) and bench is None:
        raise PriorDataError(f"--prior {args.prior} needs --bench data")
    grid = _parse_grid(args.grid)
    results = bayes_pair_reports(ds, bench, kinds, grid)

    multi = len(kinds) > 1
    for kind in kinds:
        records = []
        comparisons = []
        for (lang1, lang2), per_prior in sorted(results.items()):
            comparison, _ = per_prior[kind]
            comparisons.append(comparison)
            records.append(
                {
                    "lang1": lang1,
                    "lang2": lang2,
                    "endpoint95": comparison.endpoint95,
                    "endpoint99": comparison.endpoint99,
                    "m": comparison.median,
                    "mu": comparison.mean,
                }
            )
        out_path = _suffixed(args.out, kind) if multi else Path(args.out)
        out_path.write_text(report.emit_table(records, _table_format(args.out)))
        graph = report.build_graph(comparisons)
        reduced, was_transitive = report.transitive_reduction(graph)
        dot_path = _suffixed(args.dot, kind) if multi else Path(args.dot)
        dot_path.write_text(report.emit_dot(reduced if was_transitive else graph))
        conclusive = sum(1 for c in comparisons if c.decision95 != "inconclusive")
        print(f"[{kind}] {conclusive}/{len(comparisons)} pairs conclusive at 95% "
              f"-> {out_path}, {dot_path}")

    if args.posteriors:
        directory = Path(args.posteriors)
        directory.mkdir(parents=True, exist_ok=True)
        for (lang1, lang2), per_prior in sorted(results.items()):
            for kind in kinds:
                _, grid_posterior = per_prior[kind]
                name = f"{_safe_name(lang1)}_vs_{_safe_name(lang2)}.{kind}.csv"
                with open(directory / name, "w") as handle:
                    speedup.export_grid_csv(grid_posterior, handle)
        print(f"posterior grids -> {directory}/")
    return 0


def cmd_omnibus(args) -> int:
    ds = _load_performance(args.data)
    matrix = dataio.complete_task_matrix(ds)
    if not matrix:
        raise DegenerateDataError("no task is implemented by every language")
    languages = ds.languages
    tasks = sorted(matrix)
    groups = {lang: [matrix[t][lang] for t in tasks] for lang in languages}
    result = freqstats.kruskal_wallis(list(groups.values()))
    print(f"complete-task matrix: {len(tasks)} tasks x {len(languages)} languages")
    print(f"Kruskal-Wallis H = {result.statistic:.4f}, p = {result.p_value:.4f}")
    posthoc = freqstats.pairwise_wilcoxon_posthoc(groups)
    strong = sum(1 for p in posthoc.values() if p < 0.01)
    weak = sum(1 for p in posthoc.values() if p < 0.05)
    print(f"pairwise signed-rank post-hoc (BH-adjusted): "
          f"{weak} pairs significant at 95%, {strong} at 99%")
    for (a, b), p in sorted(posthoc.items(), key=lambda kv: kv[1]):
        marker = "**" if p < 0.01 else ("*" if p < 0.05 else "")
        print(f"  {a} vs {b}: p = {p:.4f} {marker}")
    return 0


def cmd_regress(args) -> int:
    with open(args.data, "rb") as handle:
        table = dataio.load_experiment_csv(handle)
    seed = _resolve_seed(args.seed)
    config = inference.SamplerConfig(
        chains=args.chains, warmup=args.warmup, keep=args.keep, seed=seed
    )
    if args.model == "gaussian":
        design = regression.design_from_experiment(table, regression.GAUSSIAN_PREDICTORS)
        fit = regression.bayes_linear_fit(design, config=config)
    else:
        design = regression.design_from_experiment(table, regression.POISSON_PREDICTORS)
        fit = regression.bayes_poisson_fit(design, config=config)

    with open(args.out, "w") as handle:
        regression.write_fit_csv(fit, handle)
    draws_path = args.out + ".draws.csv"
    with open(draws_path, "w") as handle:
        inference.dump_draws(fit.samples, handle)
    meta_path = args.out + ".meta.json"
    with open(meta_path, "w") as handle:
        json.dump({"model": fit.model, "seed": seed, "names": list(fit.samples.parameter_names)}, handle)

    print(f"{args.model} fit on {len(table.rows)} rows (seed {seed})")
    for p in fit.summary.parameters:
        print(
            f"  {p.name}: {p.mean:.3f} +/- {p.sd:.3f} "
            f"[{p.quantiles[2.5]:.3f}, {p.quantiles[97.5]:.3f}] "
            f"rhat={p.rhat:.3f} ess={p.ess:.0f}"
        )
    print(f"fit table -> {args.out}; draws -> {draws_path}; meta -> {meta_path}")
    return 0


def load_scenario(path: str) -> regression.Scenario:
    with open(path, "rb") as handle:
        raw = tomllib.load(handle)
    for section in ("ability", "treatment", "experience"):
        if section not in raw:
            raise DomainError(f"scenario file lacks a [{section}] section")
    return regression.Scenario(
        ability_mix={k: float(v) for k, v in raw["ability"].items()},
        treatment_mix={k: float(v) for k, v in raw["treatment"].items()},
        experience_mix={k: float(v) for k, v in raw["experience"].items()},
    )


def cmd_predict(args) -> int:
    meta_path = args.fit + ".meta.json"
    draws_path = args.fit + ".draws.csv"
    with open(meta_path) as handle:
        meta = json.load(handle)
    with open(draws_path) as handle:
        samples = inference.load_draws(handle, seed=meta.get("seed", 0))
    fit = regression.PosteriorFit(meta["model"], inference.summarize(samples), samples, ())
    scenario = load_scenario(args.scenario)
    seed = _resolve_seed(args.seed)
    result = regression.simulate_scenario(fit, scenario, args.draws, seed)
    print(f"mean fixed per person-task: {result.mean_fixed:.4f}")
    print(f"central 90% interval: [{result.interval90[0]:.1f}, {result.interval90[1]:.1f}]")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="benchbayes",
        description="Frequentist and Bayesian comparison of paired benchmark data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    freq = sub.add_parser("freq-compare", help="signed-rank tests over all language pairs")
    freq.add_argument("--data", required=True, help="performance CSV (language,task,variant,seconds)")
    freq.add_argument("--correction", default="none", choices=["none", "bonferroni", "holm", "bh"])
    freq.add_argument("--alpha", type=float, default=0.05,
                      help="weak significance level; strong level is alpha/5")
    freq.add_argument("--out", required=True, help="table output (.md for markdown, else CSV)")
    freq.add_argument("--dot", required=True, help="language relationship graph (DOT)")
    freq.set_defaults(func=cmd_freq_compare)

    bayes = sub.add_parser("bayes-compare", help="grid posteriors over all language pairs")
    bayes.add_argument("--data", required=True)
    bayes.add_argument("--bench", help="external benchmark CSV for data-derived priors")
    bayes.add_argument("--prior", default="uniform", choices=["uniform", "centered", "shifted", "all"])
    bayes.add_argument("--grid", default="1999x200", help="speedup x sigma grid, e.g. 1999x200")
    bayes.add_argument("--out", required=True)
    bayes.add_argument("--dot", required=True)
    bayes.add_argument("--posteriors", help="directory for per-pair s,mass density CSVs")
    bayes.set_defaults(func=cmd_bayes_compare)

    omnibus = sub.add_parser("omnibus", help="Kruskal-Wallis plus pairwise post-hoc")
    omnibus.add_argument("--data", required=True)
    omnibus.set_defaults(func=cmd_omnibus)

    regress = sub.add_parser("regress", help="Bayesian regression on experiment data")
    regress.add_argument("--data", required=True, help="experiment CSV")
    regress.add_argument("--model", required=True, choices=["gaussian", "poisson"])
    regress.add_argument("--chains", type=int, default=4)
    regress.add_argument("--warmup", type=int, default=1000)
    regress.add_argument("--keep", type=int, default=1000)
    regress.add_argument("--seed", type=int, default=None)
    regress.add_argument("--out", required=True, help="fit CSV; sidecars <out>.draws.csv, <out>.meta.json")
    regress.set_defaults(func=cmd_regress)

    predict = sub.add_parser("predict", help="simulate a team scenario from a fitted model")
    predict.add_argument("--fit", required=True, help="fit CSV written by regress")
    predict.add_argument("--scenario", required=True, help="TOML with ability/treatment/experience mixes")
    predict.add_argument("--draws", type=int, default=10_000)
    predict.add_argument("--seed", type=int, default=None)
    predict.set_defaults(func=cmd_predict)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _DIAGNOSTIC_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIAGNOSTICS
    except _DEGENERATE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except BenchBayesError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
