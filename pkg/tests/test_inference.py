"""Sampler and posterior-summary tests.

The conjugate normal-normal check uses the closed-form posterior as its
oracle; moment checks are tolerant up to 3 Monte-Carlo standard errors.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from benchbayes import inference as inf
from benchbayes.errors import (
    DomainError,
    MixingError,
    NoPosteriorError,
    SamplerInitError,
)


class TestDiscreteBayesUpdate:
    def test_balanced_analyzer_example(self):
        post = inf.discrete_bayes_update([0.01, 0.99], [0.99, 0.01])
        assert post == pytest.approx([0.5, 0.5])

    def test_constant_likelihood_keeps_prior(self):
        post = inf.discrete_bayes_update([0.5, 0.5], [0.37, 0.37])
        assert post == pytest.approx([0.5, 0.5])

    def test_degenerate_prior_persists(self):
        post = inf.discrete_bayes_update([1.0, 0.0], [0.2, 0.9])
        assert post == pytest.approx([1.0, 0.0])

    def test_all_zero_products(self):
        with pytest.raises(NoPosteriorError):
            inf.discrete_bayes_update([0.0, 1.0], [1.0, 0.0])

    def test_length_mismatch(self):
        with pytest.raises(DomainError):
            inf.discrete_bayes_update([0.5, 0.5], [1.0])

    def test_unnormalized_prior_rejected(self):
        with pytest.raises(DomainError):
            inf.discrete_bayes_update([0.5, 0.6], [1.0, 1.0])

    @settings(max_examples=100, deadline=None)
    @given(
        weights=st.lists(st.floats(0.01, 10.0), min_size=2, max_size=8),
        lik=st.lists(st.floats(1e-3, 5.0), min_size=2, max_size=8),
        scale=st.floats(1e-2, 1e2),
    )
    def test_sums_to_one_and_scale_invariant(self, weights, lik, scale):
        size = min(len(weights), len(lik))
        prior = np.asarray(weights[:size]) / np.sum(weights[:size])
        likelihood = np.asarray(lik[:size])
        post = inf.discrete_bayes_update(prior, likelihood)
        assert post.sum() == pytest.approx(1.0, abs=1e-12)
        scaled = inf.discrete_bayes_update(prior, likelihood * scale)
        assert scaled == pytest.approx(post, abs=1e-9)


class TestBayesFactor:
    def test_equal_likelihoods(self):
        assert inf.bayes_factor(-3.2, -3.2) == 1.0

    def test_log_three_apart(self):
        assert inf.bayes_factor(-1.0 + math.log(3), -1.0) == pytest.approx(3.0)

    def test_reciprocity(self):
        assert inf.bayes_factor(-4.0, -9.5) * inf.bayes_factor(-9.5, -4.0) == pytest.approx(1.0)

    def test_non_finite(self):
        with pytest.raises(DomainError):
            inf.bayes_factor(float("inf"), 0.0)


def std_normal_target(x):
    return -0.5 * float(x @ x)


class TestSample:
    def test_same_seed_identical(self):
        cfg = inf.SamplerConfig(chains=2, warmup=200, keep=100, seed=11)
        a = inf.sample(std_normal_target, 1, cfg)
        b = inf.sample(std_normal_target, 1, cfg)
        np.testing.assert_array_equal(a.draws, b.draws)
        assert a.acceptance_rate == b.acceptance_rate

    def test_standard_normal_moments(self):
        cfg = inf.SamplerConfig(seed=7, keep=2000)
        samples = inf.sample(std_normal_target, 1, cfg)
        summary = inf.summarize(samples)["p0"]
        assert abs(summary.mean) < 3.0 * summary.mcse()
        assert summary.sd == pytest.approx(1.0, rel=0.05)

    def test_bivariate_rhat_below_1_01(self):
        cfg = inf.SamplerConfig(seed=9)
        samples = inf.sample(std_normal_target, 2, cfg)
        summary = inf.summarize(samples)
        for p in summary.parameters:
            assert p.rhat < 1.01

    def test_init_error_on_nan(self):
        with pytest.raises(SamplerInitError):
            inf.sample(lambda x: float("nan"), 1, inf.SamplerConfig(seed=1))

    def test_init_error_on_minus_inf(self):
        with pytest.raises(SamplerInitError):
            inf.sample(
                lambda x: -math.inf,
                1,
                inf.SamplerConfig(seed=1, initial=np.array([0.5])),
            )

    def test_mixing_error_when_nothing_accepted(self):
        # accept only the initial point: target is -inf everywhere else
        def spike(x):
            return 0.0 if abs(float(x[0]) - 0.25) < 1e-12 else -math.inf

        cfg = inf.SamplerConfig(chains=2, warmup=0, keep=100, seed=3, initial=np.array([0.25]))
        with pytest.raises(MixingError):
            inf.sample(spike, 1, cfg)

    def test_explicit_initial_vector(self):
        cfg = inf.SamplerConfig(chains=2, warmup=100, keep=100, seed=2, initial=np.array([4.0]))
        samples = inf.sample(std_normal_target, 1, cfg)
        assert samples.draws.shape == (2, 100, 1)

    def test_config_validation(self):
        with pytest.raises(DomainError):
            inf.SamplerConfig(chains=1)
        with pytest.raises(DomainError):
            inf.SamplerConfig(keep=50)
        with pytest.raises(DomainError):
            inf.sample(std_normal_target, 0)


def make_matrix(draws, names=None, seed=0):
    draws = np.asarray(draws, dtype=float)
    names = names or tuple(f"p{j}" for j in range(draws.shape[2]))
    return inf.SampleMatrix(draws, names, seed, tuple(1.0 for _ in range(draws.shape[0])))


class TestSummarize:
    def test_constant_draws_flagged_degenerate(self):
        samples = make_matrix(np.full((2, 120, 1), 7.0))
        summary = inf.summarize(samples)["p0"]
        assert summary.sd == 0.0
        assert summary.degenerate
        assert math.isnan(summary.rhat)
        assert set(summary.quantiles.values()) == {7.0}

    def test_seeded_normal_interval(self):
        rng = np.random.default_rng(123)
        samples = make_matrix(rng.normal(0, 1, (4, 5000, 1)))
        summary = inf.summarize(samples)["p0"]
        assert summary.quantiles[2.5] == pytest.approx(-1.96, abs=0.1)
        assert summary.quantiles[97.5] == pytest.approx(1.96, abs=0.1)

    def test_disjoint_chains_detected(self):
        rng = np.random.default_rng(5)
        chain0 = rng.normal(0.0, 0.01, (1, 200, 1))
        chain1 = rng.normal(10.0, 0.01, (1, 200, 1))
        summary = inf.summarize(make_matrix(np.vstack([chain0, chain1])))
        assert summary["p0"].rhat > 1.1

    def test_chain_permutation_invariance(self):
        rng = np.random.default_rng(8)
        draws = rng.normal(0, 1, (4, 300, 2))
        base = inf.summarize(make_matrix(draws))
        permuted = inf.summarize(make_matrix(draws[[2, 0, 3, 1]]))
        for a, b in zip(base.parameters, permuted.parameters):
            assert a.mean == pytest.approx(b.mean)
            assert a.rhat == pytest.approx(b.rhat)
            assert a.ess == pytest.approx(b.ess)

    def test_ess_bounded_and_rhat_floor(self):
        cfg = inf.SamplerConfig(seed=21, chains=4, warmup=500, keep=500)
        samples = inf.sample(std_normal_target, 1, cfg)
        summary = inf.summarize(samples)["p0"]
        assert summary.ess <= 4 * 500
        assert summary.rhat >= 1.0 - 1e-3

    def test_quantiles_nondecreasing(self):
        rng = np.random.default_rng(2)
        summary = inf.summarize(make_matrix(rng.exponential(1, (3, 400, 1))))["p0"]
        ordered = [summary.quantiles[q] for q in sorted(summary.quantiles)]
        assert ordered == sorted(ordered)


class TestConjugateNormalNormal:
    def test_recovers_closed_form(self):
        # data N(mu, sigma) with known sigma; prior mu ~ N(m0, t0)
        sigma, m0, t0 = 0.8, 0.0, 2.0
        rng = np.random.default_rng(77)
        data = rng.normal(0.7, sigma, 12)
        prec = len(data) / sigma**2 + 1.0 / t0**2
        post_mean = (data.sum() / sigma**2 + m0 / t0**2) / prec
        post_sd = math.sqrt(1.0 / prec)

        def target(x):
            mu = float(x[0])
            return (
                -0.5 * ((data - mu) ** 2).sum() / sigma**2
                - 0.5 * (mu - m0) ** 2 / t0**2
            )

        samples = inf.sample(target, 1, inf.SamplerConfig(seed=13, keep=2000))
        summary = inf.summarize(samples)["p0"]
        assert abs(summary.mean - post_mean) < 3.0 * summary.mcse()
        sd_mcse = post_sd / math.sqrt(2.0 * summary.ess)
        assert abs(summary.sd - post_sd) < 3.0 * sd_mcse


class TestDrawDump:
    def test_roundtrip(self, tmp_path):
        cfg = inf.SamplerConfig(chains=2, warmup=100, keep=100, seed=4)
        samples = inf.sample(std_normal_target, 2, cfg, names=("alpha", "beta"))
        path = tmp_path / "draws.csv"
        with open(path, "w") as handle:
            inf.dump_draws(samples, handle)
        with open(path) as handle:
            loaded = inf.load_draws(handle)
        assert loaded.parameter_names == ("alpha", "beta")
        np.testing.assert_allclose(loaded.draws, samples.draws)
