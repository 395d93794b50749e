"""Rank tests, effect size, and multiple-comparison corrections.

The Wilcoxon signed-rank test uses its exact null distribution whenever the
nonzero differences are free of rank ties and few enough to enumerate
(n <= 20); otherwise it falls back on the tie-corrected normal approximation
with continuity correction.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import numkernel as nk
from .errors import DegenerateDataError, DomainError, PairingError

EXACT_LIMIT = 20
CORRECTION_METHODS = ("none", "bonferroni", "holm", "benjamini_hochberg")

_STD_NORMAL = nk.normal(0.0, 1.0)


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float
    method: str
    n_effective: int

    def __post_init__(self):
        if not 0.0 < self.p_value <= 1.0:
            raise DomainError(f"p-value must lie in (0, 1], got {self.p_value}")
        if self.n_effective < 0:
            raise DomainError("n_effective must be nonnegative")


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """Ranks 1..n with ties getting the average of their positions."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values))
    sorted_vals = values[order]
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def _tie_sizes(values: np.ndarray) -> list[int]:
    _, counts = np.unique(values, return_counts=True)
    return [int(c) for c in counts if c > 1]


def _exact_signed_rank_counts(n: int) -> np.ndarray:
    """Null distribution of W+ for tie-free ranks 1..n: counts[w] over 2^n signs."""
    max_w = n * (n + 1) // 2
    counts = np.zeros(max_w + 1, dtype=np.int64)
    counts[0] = 1
    for rank in range(1, n + 1):
        shifted = np.zeros_like(counts)
        shifted[rank:] = counts[:-rank] if rank > 0 else counts
        counts = counts + shifted
    return counts


def wilcoxon_signed_rank(x, y) -> TestResult:
    """Two-sided paired Wilcoxon signed-rank test; zero differences dropped."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or x.shape != y.shape or len(x) == 0:
        raise PairingError(f"need equal-length 1-d samples, got {x.shape} and {y.shape}")
    diffs = x - y
    diffs = diffs[diffs != 0.0]
    n = len(diffs)
    if n == 0:
        raise DegenerateDataError("all paired differences are zero")
    abs_diffs = np.abs(diffs)
    ranks = _average_ranks(abs_diffs)
    w_plus = float(ranks[diffs > 0].sum())
    ties = _tie_sizes(abs_diffs)

    if n <= EXACT_LIMIT and not ties:
        counts = _exact_signed_rank_counts(n)
        total = float(2**n)
        w = int(round(w_plus))
        lower = counts[: w + 1].sum() / total
        upper = counts[w:].sum() / total
        p = min(1.0, 2.0 * min(lower, upper))
        return TestResult(w_plus, p, "wilcoxon-exact", n)

    mu = n * (n + 1) / 4.0
    var = n * (n + 1) * (2 * n + 1) / 24.0 - sum(t**3 - t for t in ties) / 48.0
    if var <= 0:
        raise DegenerateDataError("signed-rank variance is zero")
    sd = math.sqrt(var)
    lower = nk.cdf(_STD_NORMAL, (w_plus + 0.5 - mu) / sd)
    upper = 1.0 - nk.cdf(_STD_NORMAL, (w_plus - 0.5 - mu) / sd)
    p = min(1.0, 2.0 * min(lower, upper))
    p = max(p, 5e-324)
    return TestResult(w_plus, p, "wilcoxon-normal", n)


def cliffs_delta(x, y) -> float:
    """Dominance effect size in [-1, 1]; negative when x tends to be smaller."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) == 0 or len(y) == 0:
        raise DomainError("cliffs_delta needs nonempty samples")
    greater = (x[:, None] > y[None, :]).sum()
    less = (x[:, None] < y[None, :]).sum()
    return float(greater - less) / (len(x) * len(y))


def adjust_pvalues(ps, method: str) -> list[float]:
    """Multiple-comparison adjustment; output order matches the input."""
    if method not in CORRECTION_METHODS:
        raise DomainError(f"unknown correction {method!r}, pick one of {CORRECTION_METHODS}")
    ps = [float(p) for p in ps]
    if any(math.isnan(p) or not 0.0 <= p <= 1.0 for p in ps):
        raise DomainError("p-values must lie in [0, 1]")
    n = len(ps)
    if n == 0 or method == "none":
        return list(ps)
    order = sorted(range(n), key=lambda i: ps[i])
    adjusted = [0.0] * n
    if method == "bonferroni":
        return [min(1.0, p * n) for p in ps]
    if method == "holm":
        running = 0.0
        for i, idx in enumerate(order):  # step-down with cumulative max
            running = max(running, ps[idx] * (n - i))
            adjusted[idx] = min(1.0, running)
        return adjusted
    running = math.inf  # benjamini_hochberg: step-up with cumulative min
    for i in range(n - 1, -1, -1):
        idx = order[i]
        running = min(running, ps[idx] * n / (i + 1))
        adjusted[idx] = min(1.0, running)
    return adjusted


def kruskal_wallis(groups) -> TestResult:
    """Tie-corrected Kruskal-Wallis H with the chi-square approximation."""
    groups = [np.asarray(g, dtype=float) for g in groups]
    if len(groups) < 2:
        raise DomainError("kruskal_wallis needs at least 2 groups")
    if any(len(g) == 0 for g in groups):
        raise DomainError("kruskal_wallis groups must be nonempty")
    pooled = np.concatenate(groups)
    if np.all(pooled == pooled[0]):
        raise DegenerateDataError("all observations identical")
    total = len(pooled)
    if total < 8:
        warnings.warn(
            f"chi-square approximation is rough for {total} < 8 total observations",
            stacklevel=2,
        )
    ranks = _average_ranks(pooled)
    h = 0.0
    start = 0
    for g in groups:
        r = ranks[start : start + len(g)]
        h += r.sum() ** 2 / len(g)
        start += len(g)
    h = 12.0 / (total * (total + 1)) * h - 3.0 * (total + 1)
    correction = 1.0 - sum(t**3 - t for t in _tie_sizes(pooled)) / (total**3 - total)
    h /= correction
    p = 1.0 - nk.cdf(nk.chi_square(len(groups) - 1), max(h, 0.0))
    return TestResult(float(h), max(p, 5e-324), "kruskal-wallis", total)


def pairwise_wilcoxon_posthoc(groups: dict[str, list]) -> dict[tuple[str, str], float]:
    """All unordered pairs tested with the signed-rank test, jointly BH-adjusted.

    Pairs with all-zero differences (identical samples) contribute p = 1
    instead of failing; other per-pair errors propagate with the pair named.
    """
    names = list(groups)
    if len(names) < 2:
        raise DomainError("post-hoc needs at least 2 named groups")
    lengths = {len(groups[name]) for name in names}
    if len(lengths) != 1:
        raise PairingError(f"groups must be pairwise alignable, got lengths {sorted(lengths)}")
    pairs = list(itertools.combinations(names, 2))
    raw = []
    for a, b in pairs:
        try:
            raw.append(wilcoxon_signed_rank(groups[a], groups[b]).p_value)
        except DegenerateDataError:
            raw.append(1.0)
        except Exception as exc:
            raise type(exc)(f"pair ({a}, {b}): {exc}") from exc
    adjusted = adjust_pvalues(raw, "benjamini_hochberg")
    return {pair: p for pair, p in zip(pairs, adjusted)}
