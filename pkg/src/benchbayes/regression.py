"""Regression reanalysis: frequentist OLS plus Bayesian Gaussian and Poisson
models over the debugging-experiment design, and posterior-predictive team
simulation.

Categorical coding: manual/J/lab-1/B/low -> 0, auto/X/lab-2/M -> 1, ability
low/medium/high -> 0/1/2.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import inference as inf
from . import numkernel as nk
from .dataio import ExperimentTable
from .errors import DiagnosticsError, DomainError, SingularDesignError

GAUSSIAN_PREDICTORS = ("treatment", "system", "lab", "experience", "ability")
POISSON_PREDICTORS = ("treatment", "experience", "ability")

_CODES = {
    "treatment": {"manual": 0.0, "auto": 1.0},
    "system": {"J": 0.0, "X": 1.0},
    "lab": {"1": 0.0, "2": 1.0},
    "experience": {"B": 0.0, "M": 1.0},
    "ability": {"low": 0.0, "medium": 1.0, "high": 2.0},
}

# singular values below this fraction of the largest mean rank deficiency
_RANK_TOL = 1e-10

# linear predictors above this are clamped before exponentiation
ETA_CLAMP = 30.0

RHAT_GATE = 1.05
ESS_GATE = 100.0

DEFAULT_GAUSSIAN_COEF_PRIOR = nk.normal(0.0, 20.0)
DEFAULT_SIGMA_PRIOR = nk.half_normal(10.0)
DEFAULT_POISSON_TREATMENT_PRIOR = nk.normal(0.5, 0.8)
DEFAULT_POISSON_COEF_PRIOR = nk.normal(0.0, 5.0)


@dataclass(frozen=True)
class DesignMatrix:
    names: tuple[str, ...]
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        if x.ndim != 2 or x.shape[1] < 2:
            raise DomainError("design needs an intercept plus at least one predictor")
        if len(self.names) != x.shape[1]:
            raise DomainError("one name per design column required")
        if y.ndim != 1 or len(y) != x.shape[0]:
            raise DomainError("outcome length must match the design rows")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise DomainError("design and outcome must be finite")
        if np.any(y < 0) or np.any(y != np.floor(y)):
            raise DomainError("outcome must be nonnegative integers")


def design_from_experiment(table: ExperimentTable, predictors=GAUSSIAN_PREDICTORS) -> DesignMatrix:
    unknown = [p for p in predictors if p not in _CODES]
    if unknown:
        raise DomainError(f"unknown predictors {unknown}")
    columns = [np.ones(len(table.rows))]
    for name in predictors:
        columns.append(np.array([_CODES[name][getattr(row, name)] for row in table.rows]))
    y = np.array([row.fixed for row in table.rows], dtype=float)
    return DesignMatrix(("intercept",) + tuple(predictors), np.column_stack(columns), y)


@dataclass(frozen=True)
class CoefficientFit:
    name: str
    estimate: float
    std_error: float
    t_statistic: float
    p_value: float
    ci95_lower: float
    ci95_upper: float


@dataclass(frozen=True)
class FreqFit:
    coefficients: tuple[CoefficientFit, ...]
    residual_sd: float
    df: int

    def __getitem__(self, name: str) -> CoefficientFit:
        for c in self.coefficients:
            if c.name == name:
                return c
        raise KeyError(name)


@dataclass(frozen=True)
class PosteriorFit:
    model: str
    summary: inf.PosteriorSummary
    samples: inf.SampleMatrix
    priors: tuple[nk.DistParams, ...]


def _check_rank(x: np.ndarray):
    singular = np.linalg.svd(x, compute_uv=False)
    if singular[-1] <= _RANK_TOL * singular[0]:
        raise SingularDesignError(
            f"design is rank deficient (singular values {singular.round(12)})"
        )


def ols_fit(d: DesignMatrix) -> FreqFit:
    """Least squares with t-based standard errors and estimate +/- 2 SE intervals."""
    n, p = d.x.shape
    df = n - p
    if df < 1:
        raise DomainError(f"need more rows than columns, got {n} rows for {p} columns")
    _check_rank(d.x)
    beta, *_ = np.linalg.lstsq(d.x, d.y, rcond=None)
    residuals = d.y - d.x @ beta
    rss = float(residuals @ residuals)
    sigma2 = rss / df
    xtx_inv = np.linalg.inv(d.x.T @ d.x)
    std_errors = np.sqrt(np.maximum(sigma2 * np.diag(xtx_inv), 0.0))
    t_dist = nk.student_t(df)
    coefficients = []
    for name, est, se in zip(d.names, beta, std_errors):
        if se > 0:
            t_stat = float(est / se)
            p_value = 2.0 * nk.cdf(t_dist, -abs(t_stat))
        else:
            t_stat = math.inf if est != 0 else 0.0
            p_value = 0.0 if est != 0 else 1.0
        coefficients.append(
            CoefficientFit(
                name=name,
                estimate=float(est),
                std_error=float(se),
                t_statistic=t_stat,
                p_value=p_value,
                ci95_lower=float(est - 2.0 * se),
                ci95_upper=float(est + 2.0 * se),
            )
        )
    return FreqFit(tuple(coefficients), residual_sd=math.sqrt(sigma2), df=df)


def _coerce_priors(d: DesignMatrix, priors, default, treatment_default=None):
    if priors is None:
        out = []
        for name in d.names:
            if treatment_default is not None and name == "treatment":
                out.append(treatment_default)
            else:
                out.append(default)
        return tuple(out)
    priors = tuple(priors)
    if len(priors) != len(d.names):
        raise DomainError(f"need one prior per coefficient ({len(d.names)}), got {len(priors)}")
    return priors


def log_posterior(model: str, d: DesignMatrix, priors, params) -> float:
    """Log posterior of the regression models, as handed to the sampler.

    Gaussian parameters are (coefficients..., residual sd); Poisson parameters
    are the coefficients alone. The Gaussian residual-sd prior is half-normal
    with scale 10.
    """
    params = np.asarray(params, dtype=float)
    if model == "gaussian":
        priors = _coerce_priors(d, priors, DEFAULT_GAUSSIAN_COEF_PRIOR)
        if params.shape != (d.x.shape[1] + 1,):
            raise DomainError(f"gaussian model needs {d.x.shape[1] + 1} parameters")
        return _gaussian_log_post(d, priors, DEFAULT_SIGMA_PRIOR, params)
    if model == "poisson":
        priors = _coerce_priors(
            d, priors, DEFAULT_POISSON_COEF_PRIOR, DEFAULT_POISSON_TREATMENT_PRIOR
        )
        if params.shape != (d.x.shape[1],):
            raise DomainError(f"poisson model needs {d.x.shape[1]} parameters")
        return _poisson_log_post(d, priors, params)
    raise DomainError(f"unknown model {model!r}")


def _gaussian_log_post(d, priors, sigma_prior, params) -> float:
    beta, sigma = params[:-1], float(params[-1])
    if sigma <= 0:
        return -math.inf
    residuals = d.y - d.x @ beta
    n = len(d.y)
    loglik = -n * math.log(sigma) - 0.5 * n * math.log(2.0 * math.pi) - float(
        residuals @ residuals
    ) / (2.0 * sigma * sigma)
    logprior = sum(nk.log_density(pr, float(b)) for pr, b in zip(priors, beta))
    logprior += nk.log_density(sigma_prior, sigma)
    return loglik + logprior


def _poisson_log_post(d, priors, params) -> float:
    eta = d.x @ params
    if np.any(eta > ETA_CLAMP):
        warnings.warn("linear predictor clamped at 30 to avoid overflow", stacklevel=3)
        eta = np.minimum(eta, ETA_CLAMP)
    loglik = float(d.y @ eta - np.exp(eta).sum() - _ln_factorials(d.y).sum())
    logprior = sum(nk.log_density(pr, float(b)) for pr, b in zip(priors, params))
    return loglik + logprior


def _ln_factorials(y: np.ndarray) -> np.ndarray:
    return np.array([math.lgamma(v + 1.0) for v in y])


def _gate(summary: inf.PosteriorSummary):
    bad = [
        p for p in summary.parameters
        if p.degenerate or p.rhat > RHAT_GATE or p.ess < ESS_GATE
    ]
    if bad:
        worst = max(bad, key=lambda p: math.inf if p.degenerate else p.rhat)
        raise DiagnosticsError(
            f"convergence gate failed for {', '.join(p.name for p in bad)} "
            f"(worst rhat={worst.rhat:.4f}, ess={worst.ess:.1f}); rerun with more iterations",
            rhat=worst.rhat,
            ess=worst.ess,
        )


def bayes_linear_fit(d: DesignMatrix, priors=None, config=None) -> PosteriorFit:
    """Gaussian-noise linear model sampled by random-walk Metropolis."""
    if d.x.shape[0] - d.x.shape[1] < 1:
        raise DomainError("need more rows than columns")
    _check_rank(d.x)
    priors = _coerce_priors(d, priors, DEFAULT_GAUSSIAN_COEF_PRIOR)
    config = config or inf.SamplerConfig()
    mode, transform = _gaussian_mode(d, priors)

    # sigma is sampled on the log scale (with the change-of-variables term)
    # so the whitened target is close to isotropic; draws are mapped back
    def target(params):
        with_sigma = np.concatenate([params[:-1], [math.exp(params[-1])]])
        return _gaussian_log_post(d, priors, DEFAULT_SIGMA_PRIOR, with_sigma) + params[-1]

    names = d.names + ("sigma",)
    samples = _sample_whitened(target, mode, transform, config, names)
    draws = samples.draws.copy()
    draws[:, :, -1] = np.exp(draws[:, :, -1])
    samples = inf.SampleMatrix(draws, samples.parameter_names, samples.seed, samples.acceptance_rate)
    summary = inf.summarize(samples)
    _gate(summary)
    return PosteriorFit("gaussian", summary, samples, priors + (DEFAULT_SIGMA_PRIOR,))


def _prior_precision(priors) -> tuple[np.ndarray, np.ndarray]:
    """Per-coefficient precision and mean of the normal priors (0 otherwise)."""
    precision = np.zeros(len(priors))
    means = np.zeros(len(priors))
    for j, prior in enumerate(priors):
        if prior.family == "normal":
            means[j] = prior.params[0]
            precision[j] = 1.0 / prior.params[1] ** 2
    return precision, means


def _chol_of_inverse(hessian: np.ndarray) -> np.ndarray:
    covariance = np.linalg.inv(hessian)
    covariance = 0.5 * (covariance + covariance.T)
    jitter = 1e-12 * float(np.trace(covariance)) / len(covariance)
    return np.linalg.cholesky(covariance + jitter * np.eye(len(covariance)))


def _gaussian_mode(d: DesignMatrix, priors) -> tuple[np.ndarray, np.ndarray]:
    """Penalized-least-squares mode and a whitening transform from the local
    curvature.

    Sampling runs in the whitened space so that the diagonal random-walk
    proposal sees a roughly isotropic target; this also absorbs priors that
    pin a coefficient far more tightly than the data would place it.
    """
    n = len(d.y)
    beta_ols, *_ = np.linalg.lstsq(d.x, d.y, rcond=None)
    resid = d.y - d.x @ beta_ols
    df = max(n - d.x.shape[1], 1)
    sigma2 = max(float(resid @ resid) / df, 1e-4)
    precision, means = _prior_precision(priors)
    hessian = d.x.T @ d.x / sigma2 + np.diag(precision)
    beta = np.linalg.solve(hessian, d.x.T @ d.y / sigma2 + precision * means)
    sigma = max(float(np.std(d.y - d.x @ beta)), 0.1)

    # the mode and transform carry log(sigma) in the last slot
    p = d.x.shape[1]
    transform = np.zeros((p + 1, p + 1))
    transform[:p, :p] = _chol_of_inverse(hessian)
    transform[p, p] = 1.0 / math.sqrt(2.0 * n)
    return np.concatenate([beta, [math.log(sigma)]]), transform


def _poisson_mode(d: DesignMatrix, priors) -> tuple[np.ndarray, np.ndarray]:
    """Penalized Newton (IRLS) mode and curvature whitening transform."""
    precision, means = _prior_precision(priors)
    beta = np.zeros(d.x.shape[1])
    beta[0] = math.log(max(float(d.y.mean()), 0.1))
    hessian = np.eye(len(beta))
    for _ in range(50):
        eta = np.minimum(d.x @ beta, ETA_CLAMP)
        rates = np.exp(eta)
        grad = d.x.T @ (d.y - rates) - precision * (beta - means)
        hessian = d.x.T @ (d.x * rates[:, None]) + np.diag(precision)
        step = np.linalg.solve(hessian, grad)
        beta = beta + step
        if np.max(np.abs(step)) < 1e-10:
            break
    return beta, _chol_of_inverse(hessian)


def _sample_whitened(target, mode, transform, config, names) -> inf.SampleMatrix:
    """Run the sampler on target(mode + transform @ z) and map draws back."""

    def whitened(z):
        return target(mode + transform @ z)

    dim = len(mode)
    if isinstance(config.initial, str) and config.initial == "random":
        config = _with_initial(config, np.zeros(dim))
    raw = inf.sample(whitened, dim, config, names=names)
    draws = raw.draws @ transform.T + mode
    return inf.SampleMatrix(draws, raw.parameter_names, raw.seed, raw.acceptance_rate)


def _with_initial(config: inf.SamplerConfig, initial: np.ndarray) -> inf.SamplerConfig:
    return inf.SamplerConfig(
        chains=config.chains,
        warmup=config.warmup,
        keep=config.keep,
        seed=config.seed,
        initial=initial,
        step_scale=config.step_scale,
    )


def bayes_poisson_fit(d: DesignMatrix, priors=None, config=None) -> PosteriorFit:
    """Poisson count model with a log link, sampled by random-walk Metropolis."""
    _check_rank(d.x)
    priors = _coerce_priors(
        d, priors, DEFAULT_POISSON_COEF_PRIOR, DEFAULT_POISSON_TREATMENT_PRIOR
    )
    config = config or inf.SamplerConfig()
    mode, transform = _poisson_mode(d, priors)

    def target(params):
        return _poisson_log_post(d, priors, params)

    samples = _sample_whitened(target, mode, transform, config, d.names)
    summary = inf.summarize(samples)
    _gate(summary)
    return PosteriorFit("poisson", summary, samples, priors)


@dataclass(frozen=True)
class Scenario:
    """Population mixes a simulated team is drawn from."""

    ability_mix: dict[str, float]  # low / medium / high
    treatment_mix: dict[str, float]  # manual / auto
    experience_mix: dict[str, float]  # B / M

    def __post_init__(self):
        for label, mix, keys in (
            ("ability_mix", self.ability_mix, ("low", "medium", "high")),
            ("treatment_mix", self.treatment_mix, ("manual", "auto")),
            ("experience_mix", self.experience_mix, ("B", "M")),
        ):
            if set(mix) != set(keys):
                raise DomainError(f"{label} must have exactly the keys {keys}")
            if any(v < 0 for v in mix.values()):
                raise DomainError(f"{label} probabilities must be nonnegative")
            if abs(sum(mix.values()) - 1.0) > 1e-9:
                raise DomainError(f"{label} must sum to 1, sums to {sum(mix.values())}")


@dataclass(frozen=True)
class ScenarioResult:
    mean_fixed: float
    interval90: tuple[float, float]


def simulate_scenario(fit: PosteriorFit, scenario: Scenario, n_draws: int, seed: int) -> ScenarioResult:
    """Monte Carlo outcome of a team profile under a fitted Poisson model.

    Each draw pairs one posterior sample with one predictor profile sampled
    from the scenario mixes and one Poisson outcome.
    """
    if fit.model != "poisson":
        raise DomainError("scenario simulation needs a poisson fit")
    if n_draws < 1000:
        raise DomainError("need at least 1000 draws")
    names = fit.samples.parameter_names
    required = ("intercept", "treatment", "experience", "ability")
    missing = [name for name in required if name not in names]
    if missing:
        raise DomainError(f"fit lacks coefficients {missing}")
    cols = {name: names.index(name) for name in required}
    pooled = fit.samples.pooled()

    rng = np.random.default_rng(np.random.SeedSequence(seed))
    picks = rng.integers(0, len(pooled), n_draws)
    ability = rng.choice(
        [0.0, 1.0, 2.0],
        size=n_draws,
        p=[scenario.ability_mix[k] for k in ("low", "medium", "high")],
    )
    treatment = rng.choice(
        [0.0, 1.0], size=n_draws, p=[scenario.treatment_mix[k] for k in ("manual", "auto")]
    )
    experience = rng.choice(
        [0.0, 1.0], size=n_draws, p=[scenario.experience_mix[k] for k in ("B", "M")]
    )
    eta = (
        pooled[picks, cols["intercept"]]
        + pooled[picks, cols["treatment"]] * treatment
        + pooled[picks, cols["experience"]] * experience
        + pooled[picks, cols["ability"]] * ability
    )
    rates = np.exp(np.minimum(eta, ETA_CLAMP))
    fixed = rng.poisson(rates)
    lo, hi = np.quantile(fixed, [0.05, 0.95])
    return ScenarioResult(float(fixed.mean()), (float(lo), float(hi)))


def fit_table_rows(fit) -> list[tuple[str, float, float, float, float]]:
    """Rows `(coefficient, estimate, error, lower95, upper95)` for CSV export."""
    if isinstance(fit, FreqFit):
        return [
            (c.name, c.estimate, c.std_error, c.ci95_lower, c.ci95_upper)
            for c in fit.coefficients
        ]
    if isinstance(fit, PosteriorFit):
        return [
            (p.name, p.mean, p.sd, p.quantiles[2.5], p.quantiles[97.5])
            for p in fit.summary.parameters
        ]
    raise DomainError(f"cannot tabulate {type(fit).__name__}")


def write_fit_csv(fit, stream) -> None:
    stream.write("coefficient,estimate,error,lower95,upper95\n")
    for name, est, err, lo, hi in fit_table_rows(fit):
        stream.write(f"{name},{est:.6f},{err:.6f},{lo:.6f},{hi:.6f}\n")
