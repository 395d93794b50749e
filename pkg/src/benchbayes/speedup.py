"""Grid posterior over the inverse speedup of one language versus another.

Model: observed per-task inverse speedups d_i scatter around the true
speedup s with Gaussian noise of unknown scale sigma; the prior over s is
uniform, centered normal, or shifted normal on (-1, 1); sigma gets a
half-normal(1) prior and is summed out over a log-spaced grid.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import numkernel as nk
from .dataio import PairedSpeedups
from .errors import DegeneratePriorError, DomainError, PriorDataError

PRIOR_KINDS = ("uniform", "centered_normal", "shifted_normal")

SIGMA_PRIOR_SCALE = 1.0
S_SUPPORT = 0.999

_LN_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


@dataclass(frozen=True)
class PriorSpec:
    """Prior over the true inverse speedup, supported on (-1, 1)."""

    kind: str
    mu: float = 0.0
    sigma: float | None = None

    def __post_init__(self):
        if self.kind not in PRIOR_KINDS:
            raise DomainError(f"unknown prior kind {self.kind!r}")
        if self.kind != "uniform":
            if self.sigma is None or self.sigma <= 0:
                raise DomainError(f"{self.kind} prior needs sigma > 0")
        if self.kind == "centered_normal" and self.mu != 0.0:
            raise DomainError("centered prior has mean 0")
        if self.kind == "shifted_normal" and not -1.0 < self.mu < 1.0:
            raise DomainError("shifted prior mean must lie in (-1, 1)")

    def log_density(self, s: np.ndarray) -> np.ndarray:
        """Log prior density on a grid inside (-1, 1), truncation renormalized."""
        s = np.asarray(s, dtype=float)
        if self.kind == "uniform":
            return np.full_like(s, math.log(0.5))
        z = nk.cdf(nk.normal(self.mu, self.sigma), 1.0) - nk.cdf(
            nk.normal(self.mu, self.sigma), -1.0
        )
        centered = (s - self.mu) / self.sigma
        return -0.5 * centered**2 - _LN_SQRT_2PI - math.log(self.sigma) - math.log(z)


@dataclass(frozen=True)
class GridSpec:
    n_s: int = 1999
    n_sigma: int = 200
    sigma_lo: float = 1e-3
    sigma_hi: float = 2.0

    def __post_init__(self):
        if self.n_s < 3:
            raise DomainError("need at least 3 speedup grid points")
        if self.n_sigma < 1:
            raise DomainError("need at least 1 sigma grid point")
        if not 0 < self.sigma_lo <= self.sigma_hi:
            raise DomainError("sigma grid needs 0 < lo <= hi")
        if self.n_sigma == 1 and self.sigma_lo != self.sigma_hi:
            raise DomainError("a single-point sigma grid needs lo == hi")


@dataclass(frozen=True)
class PosteriorGrid:
    """Discretized marginal posterior over the inverse speedup."""

    s_points: np.ndarray
    mass: np.ndarray
    prior: PriorSpec
    n_obs: int
    grid: GridSpec

    def __post_init__(self):
        s = np.asarray(self.s_points, dtype=float)
        m = np.asarray(self.mass, dtype=float)
        s.setflags(write=False)
        m.setflags(write=False)
        object.__setattr__(self, "s_points", s)
        object.__setattr__(self, "mass", m)
        if s.shape != m.shape or s.ndim != 1:
            raise DomainError("grid points and mass must be equal-length vectors")
        if np.any(np.diff(s) <= 0):
            raise DomainError("grid points must be strictly increasing")
        if np.any(m < 0) or abs(m.sum() - 1.0) > 1e-9:
            raise DomainError("mass must be a probability vector")

    def mean(self) -> float:
        return float(self.s_points @ self.mass)

    def median(self) -> float:
        return interval_endpoint(self, 0.5)


def make_prior(kind: str, bench: PairedSpeedups | None = None) -> PriorSpec:
    """Uniform prior, or a normal prior derived from external benchmark data.

    Centered: sd is the largest absolute benchmark speedup. Shifted: mean and
    sd of the benchmark speedups.
    """
    if kind == "uniform":
        return PriorSpec("uniform")
    if kind not in PRIOR_KINDS:
        raise DomainError(f"unknown prior kind {kind!r}")
    if bench is None or not bench.values:
        raise PriorDataError(f"{kind} prior needs benchmark speedups for the pair")
    values = np.asarray(bench.values)
    if kind == "centered_normal":
        sigma = float(np.max(np.abs(values)))
        if sigma == 0.0:
            raise DegeneratePriorError("all benchmark speedups are zero")
        return PriorSpec("centered_normal", 0.0, sigma)
    if len(values) < 2:
        raise DegeneratePriorError("shifted prior needs at least 2 benchmark tasks")
    mu = float(values.mean())
    sigma = float(values.std(ddof=1))
    if sigma == 0.0:
        raise DegeneratePriorError("benchmark speedups have zero spread")
    if not -S_SUPPORT < mu < S_SUPPORT:
        warnings.warn(f"shifted prior mean {mu:.4f} clamped to the support", stacklevel=2)
        mu = math.copysign(S_SUPPORT, mu)
    return PriorSpec("shifted_normal", mu, sigma)


def _logsumexp(a: np.ndarray, axis=None):
    if axis is None:
        peak = float(np.max(a))
        return peak + math.log(float(np.sum(np.exp(a - peak))))
    peak = np.max(a, axis=axis, keepdims=True)
    return np.squeeze(np.log(np.sum(np.exp(a - peak), axis=axis, keepdims=True)) + peak, axis=axis)


def _midpoint_cdf(g: "PosteriorGrid") -> np.ndarray:
    """Cumulative mass with each grid atom treated as centered on its point."""
    return np.cumsum(g.mass) - 0.5 * g.mass


def grid_posterior(
    data: PairedSpeedups, prior: PriorSpec, grid: GridSpec | None = None
) -> PosteriorGrid:
    """Joint (s, sigma) posterior on the grid, with sigma summed out."""
    grid = grid or GridSpec()
    values = np.asarray(data.values, dtype=float)
    if len(values) == 0:
        raise DomainError("no speedup observations")
    s = np.linspace(-S_SUPPORT, S_SUPPORT, grid.n_s)
    sigma = np.geomspace(grid.sigma_lo, grid.sigma_hi, grid.n_sigma)

    sse = ((values[:, None] - s[None, :]) ** 2).sum(axis=0)  # (n_s,)
    n = len(values)
    log_lik = (
        -n * np.log(sigma)[None, :]
        - n * _LN_SQRT_2PI
        - sse[:, None] / (2.0 * sigma**2)[None, :]
    )
    log_sigma_prior = (
        math.log(2.0) - np.log(SIGMA_PRIOR_SCALE) - _LN_SQRT_2PI
        - sigma**2 / (2.0 * SIGMA_PRIOR_SCALE**2)
    )
    log_marginal = _logsumexp(log_lik + log_sigma_prior[None, :], axis=1)
    log_post = log_marginal + prior.log_density(s)
    mass = np.exp(log_post - _logsumexp(log_post))
    mass = mass / mass.sum()
    return PosteriorGrid(s, mass, prior, n, grid)


def interval_endpoint(g: PosteriorGrid, prob: float) -> float:
    """Smallest grid point with cumulative mass >= prob, linearly interpolated."""
    if not 0.0 < prob < 1.0:
        raise DomainError(f"prob must lie in (0, 1), got {prob}")
    cum = _midpoint_cdf(g)
    i = int(np.searchsorted(cum, prob, side="left"))
    if i == 0:
        return float(g.s_points[0])
    if i >= len(cum):
        return float(g.s_points[-1])
    gap = cum[i] - cum[i - 1]
    if gap <= 0:
        return float(g.s_points[i])
    frac = (prob - cum[i - 1]) / gap
    return float(g.s_points[i - 1] + frac * (g.s_points[i] - g.s_points[i - 1]))


def prob_below(g: PosteriorGrid, x: float) -> float:
    """Interpolated posterior CDF at x."""
    if math.isnan(x):
        raise DomainError("prob_below needs a real x")
    cum = _midpoint_cdf(g)
    return float(np.clip(np.interp(x, g.s_points, cum, left=0.0, right=1.0), 0.0, 1.0))


DECISIONS = ("lang1_faster", "lang2_faster", "inconclusive")


@dataclass(frozen=True)
class Decision:
    decision: str
    endpoint: float


def decide(g: PosteriorGrid, level: float) -> Decision:
    """Directional call at a certainty level from the interval endpoints.

    The reported endpoint is the uncertainty-interval endpoint closest to the
    origin; its absolute value lower-bounds the speedup of the faster side.
    """
    if not 0.5 < level < 1.0:
        raise DomainError(f"level must lie in (0.5, 1), got {level}")
    c_hi = interval_endpoint(g, level)
    c_lo = interval_endpoint(g, 1.0 - level)
    if c_hi < 0.0:
        return Decision("lang1_faster", c_hi)
    if c_lo > 0.0:
        return Decision("lang2_faster", c_lo)
    return Decision("inconclusive", 0.0)


@dataclass(frozen=True)
class TypeSMBounds:
    applicable: bool
    type_s_bound: float | None
    type_m_width: float


def type_sm_bounds(g: PosteriorGrid, level: float) -> TypeSMBounds:
    """Sign-error bound and magnitude-error width at a certainty level."""
    below_zero = prob_below(g, 0.0)
    width = interval_endpoint(g, level) - interval_endpoint(g, 1.0 - level)
    if decide(g, level).decision == "inconclusive":
        return TypeSMBounds(False, None, width)
    return TypeSMBounds(True, min(below_zero, 1.0 - below_zero), width)


@dataclass(frozen=True)
class PairwiseComparison:
    lang1: str
    lang2: str
    prior: PriorSpec
    endpoint95: float
    endpoint99: float
    decision95: str
    decision99: str
    median: float
    mean: float


def compare_pair(data: PairedSpeedups, prior: PriorSpec, grid: GridSpec | None = None):
    g = grid_posterior(data, prior, grid)
    d95 = decide(g, 0.95)
    d99 = decide(g, 0.99)
    comparison = PairwiseComparison(
        lang1=data.lang1,
        lang2=data.lang2,
        prior=prior,
        endpoint95=d95.endpoint,
        endpoint99=d99.endpoint,
        decision95=d95.decision,
        decision99=d99.decision,
        median=g.median(),
        mean=g.mean(),
    )
    return comparison, g


@dataclass(frozen=True)
class SensitivityReport:
    """One language pair analyzed under every available prior."""

    lang1: str
    lang2: str
    comparisons: dict[str, PairwiseComparison]
    grids: dict[str, PosteriorGrid]
    errors: dict[str, str] = field(default_factory=dict)

    @property
    def data_swamps_prior(self) -> bool:
        decisions = {c.decision95 for c in self.comparisons.values()}
        return len(self.comparisons) >= 2 and len(decisions) == 1


def sensitivity_report(
    data: PairedSpeedups,
    bench: PairedSpeedups | None = None,
    grid: GridSpec | None = None,
) -> SensitivityReport:
    """Run the analysis under the uniform prior plus any bench-derived priors.

    Per-prior failures are collected as annotations instead of failing the
    whole report.
    """
    if not data.values:
        raise DomainError("no speedup observations")
    kinds = ["uniform"]
    if bench is not None:
        kinds += ["centered_normal", "shifted_normal"]
    comparisons: dict[str, PairwiseComparison] = {}
    grids: dict[str, PosteriorGrid] = {}
    errors: dict[str, str] = {}
    for kind in kinds:
        try:
            prior = make_prior(kind, bench)
            comparisons[kind], grids[kind] = compare_pair(data, prior, grid)
        except Exception as exc:  # annotated partial results, never wholesale failure
            errors[kind] = f"{type(exc).__name__}: {exc}"
    return SensitivityReport(data.lang1, data.lang2, comparisons, grids, errors)


def export_grid_csv(g: PosteriorGrid, stream) -> None:
    """Write `s,mass` rows for external density plotting."""
    stream.write("s,mass\n")
    for s, m in zip(g.s_points, g.mass):
        stream.write(f"{float(s)!r},{float(m)!r}\n")
