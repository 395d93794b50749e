import numpy as np
import pytest

LANG_SPEED = {"Ada": 1.0, "Basic": 2.5, "Crystal": 1.3, "D": 6.0}


def performance_csv_text(seed=0, languages=LANG_SPEED, n_tasks=12, drop=()):
    """Synthetic runtime table: lognormal noise around per-language speed factors."""
    rng = np.random.default_rng(seed)
    lines = ["language,task,variant,seconds"]
    for t in range(n_tasks):
        task = f"task{t:02d}"
        base = rng.lognormal(0.0, 0.8)
        for lang, factor in languages.items():
            if (lang, task) in drop:
                continue
            for variant in range(1, rng.integers(1, 4)):
                seconds = base * factor * rng.lognormal(0.0, 0.25)
                lines.append(f"{lang},{task},{variant},{seconds:.6f}")
            # variant loop can be empty; always keep one measurement
            seconds = base * factor * rng.lognormal(0.0, 0.25)
            lines.append(f"{lang},{task},0,{seconds:.6f}")
    return "\n".join(lines) + "\n"


def experiment_csv_text(seed=0, n_subjects=48):
    """Synthetic debugging experiment: Poisson counts from a fixed coefficient vector."""
    rng = np.random.default_rng(seed)
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


SCENARIO_TOML = """\
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


@pytest.fixture
def perf_csv_path(tmp_path):
    path = tmp_path / "rosetta.csv"
    path.write_text(performance_csv_text(seed=1))
    return path


@pytest.fixture
def bench_csv_path(tmp_path):
    path = tmp_path / "bench.csv"
    path.write_text(performance_csv_text(seed=2, n_tasks=10))
    return path


@pytest.fixture
def experiment_csv_path(tmp_path):
    path = tmp_path / "debug.csv"
    path.write_text(experiment_csv_text(seed=3))
    return path


@pytest.fixture
def scenario_path(tmp_path):
    path = tmp_path / "scenario.toml"
    path.write_text(SCENARIO_TOML)
    return path
