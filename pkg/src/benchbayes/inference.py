"""Generic Bayesian machinery: discrete updates, Bayes factors, a seeded
random-walk Metropolis sampler, and posterior summaries with split-Rhat/ESS.

Every chain owns an RNG stream spawned from (seed, chain index), so output is
bit-identical across runs and independent of how chains are scheduled.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DomainError,
    MixingError,
    NoPosteriorError,
    SamplerInitError,
)

QUANTILE_PERCENTS = (0.5, 2.5, 5.0, 95.0, 97.5, 99.5)

ADAPT_BATCH = 50
TARGET_ACCEPTANCE = 0.3


@dataclass(frozen=True)
class SamplerConfig:
    chains: int = 4
    warmup: int = 1000
    keep: int = 1000
    seed: int = 0
    initial: object = "random"  # "random" or a length-dim vector
    step_scale: float = 1.0

    def __post_init__(self):
        if self.chains < 2:
            raise DomainError("need at least 2 chains")
        if self.keep < 100:
            raise DomainError("need at least 100 kept iterations per chain")
        if self.warmup < 0:
            raise DomainError("warmup must be nonnegative")
        if self.step_scale <= 0:
            raise DomainError("step_scale must be positive")


@dataclass(frozen=True)
class SampleMatrix:
    """Kept draws with shape (chains, iterations, parameters)."""

    draws: np.ndarray
    parameter_names: tuple[str, ...]
    seed: int
    acceptance_rate: tuple[float, ...]

    def __post_init__(self):
        draws = np.asarray(self.draws, dtype=float)
        draws.setflags(write=False)
        object.__setattr__(self, "draws", draws)
        if draws.ndim != 3:
            raise DomainError("draws must be chains x iterations x parameters")
        chains, kept, dim = draws.shape
        if chains < 2:
            raise DomainError("need at least 2 chains")
        if kept < 100:
            raise DomainError("need at least 100 kept iterations per chain")
        if len(self.parameter_names) != dim:
            raise DomainError("one name per parameter required")
        if not np.all(np.isfinite(draws)):
            raise DomainError("draws must all be finite")

    def pooled(self) -> np.ndarray:
        """All draws flattened to (chains * iterations, parameters)."""
        return self.draws.reshape(-1, self.draws.shape[2])


@dataclass(frozen=True)
class ParameterSummary:
    name: str
    mean: float
    sd: float
    median: float
    quantiles: dict[float, float]
    rhat: float
    ess: float
    degenerate: bool = False

    def mcse(self) -> float:
        """Monte-Carlo standard error of the posterior mean."""
        if self.degenerate:
            return 0.0
        return self.sd / math.sqrt(self.ess)


@dataclass(frozen=True)
class PosteriorSummary:
    parameters: tuple[ParameterSummary, ...]

    def __getitem__(self, name: str) -> ParameterSummary:
        for p in self.parameters:
            if p.name == name:
                return p
        raise KeyError(name)


def discrete_bayes_update(prior, likelihood) -> np.ndarray:
    """Elementwise product of prior and likelihood, renormalized to sum 1."""
    prior = np.asarray(prior, dtype=float)
    likelihood = np.asarray(likelihood, dtype=float)
    if prior.shape != likelihood.shape or prior.ndim != 1:
        raise DomainError("prior and likelihood must be equal-length vectors")
    if abs(prior.sum() - 1.0) > 1e-9:
        raise DomainError(f"prior must sum to 1, sums to {prior.sum()}")
    if np.any(prior < 0) or np.any(likelihood < 0):
        raise DomainError("prior and likelihood must be nonnegative")
    product = prior * likelihood
    total = product.sum()
    if total <= 0.0:
        raise NoPosteriorError("every prior x likelihood product is zero")
    return product / total


def bayes_factor(log_lik_1: float, log_lik_2: float) -> float:
    """Likelihood ratio exp(log_lik_1 - log_lik_2)."""
    if not (math.isfinite(log_lik_1) and math.isfinite(log_lik_2)):
        raise DomainError("log-likelihoods must be finite")
    return math.exp(log_lik_1 - log_lik_2)


def _chain_rng(seed: int, chain: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(chain,)))


def _run_chain(log_target, dim, config: SamplerConfig, chain: int):
    rng = _chain_rng(config.seed, chain)
    if isinstance(config.initial, str) and config.initial == "random":
        x = rng.normal(0.0, 1.0, dim)
    else:
        x = np.asarray(config.initial, dtype=float).copy()
        if x.shape != (dim,):
            raise DomainError(f"initial point must have shape ({dim},)")
    lp = float(log_target(x))
    if math.isnan(lp) or lp == -math.inf:
        raise SamplerInitError(f"log target is {lp} at the chain-{chain} initial point")

    step = config.step_scale
    accepted_batch = 0
    batch_index = 0
    for i in range(config.warmup):
        proposal = x + step * rng.standard_normal(dim)
        lp_new = float(log_target(proposal))
        if math.log(1.0 - rng.random()) < lp_new - lp:
            x, lp = proposal, lp_new
            accepted_batch += 1
        if (i + 1) % ADAPT_BATCH == 0:
            batch_index += 1
            rate = accepted_batch / ADAPT_BATCH
            # Robbins-Monro on log step, damped by batch count
            step *= math.exp((rate - TARGET_ACCEPTANCE) / math.sqrt(batch_index))
            accepted_batch = 0

    draws = np.empty((config.keep, dim))
    accepted = 0
    for i in range(config.keep):
        proposal = x + step * rng.standard_normal(dim)
        lp_new = float(log_target(proposal))
        if math.log(1.0 - rng.random()) < lp_new - lp:
            x, lp = proposal, lp_new
            accepted += 1
        draws[i] = x
    if accepted == 0:
        raise MixingError(f"chain {chain} accepted no proposals after warmup")
    return draws, accepted / config.keep


def sample(log_target, dim: int, config: SamplerConfig | None = None, names=None) -> SampleMatrix:
    """Random-walk Metropolis with a diagonal Gaussian proposal.

    The step size is adapted toward 30% acceptance during warmup and frozen
    afterward; warmup draws are discarded.
    """
    if dim < 1:
        raise DomainError("dim must be >= 1")
    config = config or SamplerConfig()
    if names is None:
        names = tuple(f"p{j}" for j in range(dim))
    results = [_run_chain(log_target, dim, config, c) for c in range(config.chains)]
    draws = np.stack([r[0] for r in results])
    rates = tuple(r[1] for r in results)
    return SampleMatrix(draws, tuple(names), config.seed, rates)


def _split_halves(draws_1d: np.ndarray) -> np.ndarray:
    """(chains, n) -> (2*chains, n//2), dropping the middle draw if n is odd."""
    n = draws_1d.shape[1]
    half = n // 2
    return np.vstack([draws_1d[:, :half], draws_1d[:, n - half :]])


def _split_rhat(chains: np.ndarray) -> float:
    m, n = chains.shape
    chain_means = chains.mean(axis=1)
    w = chains.var(axis=1, ddof=1).mean()
    if w == 0.0:
        return math.nan
    b = n * chain_means.var(ddof=1)
    var_plus = (n - 1) / n * w + b / n
    return math.sqrt(var_plus / w)


def _ess(chains: np.ndarray) -> float:
    """Effective sample size from the initial positive sequence of pair sums."""
    m, n = chains.shape
    w = chains.var(axis=1, ddof=1).mean()
    if w == 0.0:
        return math.nan
    b = n * chains.mean(axis=1).var(ddof=1)
    var_plus = (n - 1) / n * w + b / n

    centered = chains - chains.mean(axis=1, keepdims=True)
    # biased autocovariances per chain via FFT, then averaged
    size = 2 ** math.ceil(math.log2(2 * n))
    freq = np.fft.rfft(centered, size, axis=1)
    acov = np.fft.irfft(freq * np.conj(freq), size, axis=1)[:, :n].real / n
    mean_acov = acov.mean(axis=0)

    rho = 1.0 - (w - mean_acov) / var_plus
    rho[0] = 1.0
    tau = 0.0
    t = 0
    while t + 1 < n:
        pair = rho[t] + rho[t + 1]
        if pair <= 0.0:
            break
        tau += pair
        t += 2
    tau = max(2.0 * tau - 1.0, 1.0)
    return min(m * n / tau, float(m * n))


def summarize(samples: SampleMatrix) -> PosteriorSummary:
    """Pooled moments and quantiles plus split-Rhat and ESS per parameter."""
    chains, kept, dim = samples.draws.shape
    out = []
    for j, name in enumerate(samples.parameter_names):
        series = samples.draws[:, :, j]
        pooled = series.reshape(-1)
        halves = _split_halves(series)
        rhat = _split_rhat(halves)
        ess = _ess(halves)
        degenerate = math.isnan(rhat)
        out.append(
            ParameterSummary(
                name=name,
                mean=float(pooled.mean()),
                sd=float(pooled.std(ddof=1)),
                median=float(np.median(pooled)),
                quantiles={q: float(np.percentile(pooled, q)) for q in QUANTILE_PERCENTS},
                rhat=rhat,
                ess=ess,
                degenerate=degenerate,
            )
        )
    return PosteriorSummary(tuple(out))


def dump_draws(samples: SampleMatrix, stream) -> None:
    """Write draws as CSV `chain,iteration,<parameter names>`."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["chain", "iteration"] + list(samples.parameter_names))
    chains, kept, _ = samples.draws.shape
    for c in range(chains):
        for i in range(kept):
            writer.writerow([c, i] + [repr(float(v)) for v in samples.draws[c, i]])


def load_draws(stream, seed: int = 0) -> SampleMatrix:
    """Read a dump_draws CSV back into a SampleMatrix."""
    reader = csv.reader(stream)
    header = next(reader, None)
    if not header or header[:2] != ["chain", "iteration"]:
        raise DomainError("draw dump must start with chain,iteration,<names>")
    names = tuple(header[2:])
    by_chain: dict[int, list[list[float]]] = {}
    for row in reader:
        if not row:
            continue
        by_chain.setdefault(int(row[0]), []).append([float(v) for v in row[2:]])
    if not by_chain:
        raise DomainError("draw dump has no rows")
    chains = sorted(by_chain)
    draws = np.array([by_chain[c] for c in chains])
    return SampleMatrix(draws, names, seed, tuple(math.nan for _ in chains))
