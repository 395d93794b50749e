"""Special functions and univariate distributions backing the statistics.

The incomplete beta and gamma functions are evaluated with the classic
series / continued-fraction pairs (modified Lentz iteration); the normal
CDF goes through ``math.erfc``. All functions are scalar, pure, and
thread-safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, UnsupportedFamilyError

__all__ = [
    "DistParams",
    "normal",
    "student_t",
    "chi_square",
    "poisson",
    "uniform",
    "truncated_normal",
    "half_normal",
    "ln_gamma",
    "reg_inc_beta",
    "reg_lower_gamma",
    "cdf",
    "quantile",
    "log_density",
]

_LN_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_SQRT2 = math.sqrt(2.0)

# Continuous-fraction evaluation stops when the last factor is within _CF_EPS
# of one; _CF_MAX_ITER caps the iteration count.
_CF_EPS = 1e-15
_CF_MAX_ITER = 200
_CF_TINY = 1e-300

# Above this df the t distribution is evaluated through its normal-limit
# expansion (error < 1e-11); the continued fraction stops converging within
# the iteration cap for a = b ~ df/2 around x = 1/2.
_T_NORMAL_LIMIT_DF = 1e5

_FAMILY_ARITY = {
    "normal": 2,  # mean, sd
    "student_t": 1,  # df
    "chi_square": 1,  # df
    "poisson": 1,  # rate
    "uniform": 2,  # lo, hi
    "truncated_normal": 4,  # mean, sd, lo, hi
    "half_normal": 1,  # sd
}


@dataclass(frozen=True)
class DistParams:
    """A distribution family name plus its numeric parameters."""

    family: str
    params: tuple[float, ...]

    def __post_init__(self):
        if self.family not in _FAMILY_ARITY:
            raise UnsupportedFamilyError(f"unknown family {self.family!r}")
        object.__setattr__(self, "params", tuple(float(v) for v in self.params))
        if len(self.params) != _FAMILY_ARITY[self.family]:
            raise DomainError(
                f"{self.family} takes {_FAMILY_ARITY[self.family]} parameters, "
                f"got {len(self.params)}"
            )
        if any(math.isnan(v) for v in self.params):
            raise DomainError(f"{self.family} parameters contain NaN")
        f, p = self.family, self.params
        if f == "normal" and p[1] <= 0:
            raise DomainError("normal sd must be > 0")
        if f in ("student_t", "chi_square") and p[0] <= 0:
            raise DomainError(f"{f} df must be > 0")
        if f == "poisson" and p[0] < 0:
            raise DomainError("poisson rate must be >= 0")
        if f == "uniform" and not p[0] < p[1]:
            raise DomainError("uniform needs lo < hi")
        if f == "truncated_normal":
            if p[1] <= 0:
                raise DomainError("truncated_normal sd must be > 0")
            if not p[2] < p[3]:
                raise DomainError("truncation bounds need lo < hi")
        if f == "half_normal" and p[0] <= 0:
            raise DomainError("half_normal sd must be > 0")


def normal(mean: float, sd: float) -> DistParams:
    return DistParams("normal", (mean, sd))


def student_t(df: float) -> DistParams:
    return DistParams("student_t", (df,))


def chi_square(df: float) -> DistParams:
    return DistParams("chi_square", (df,))


def poisson(rate: float) -> DistParams:
    return DistParams("poisson", (rate,))


def uniform(lo: float, hi: float) -> DistParams:
    return DistParams("uniform", (lo, hi))


def truncated_normal(mean: float, sd: float, lo: float, hi: float) -> DistParams:
    return DistParams("truncated_normal", (mean, sd, lo, hi))


def half_normal(sd: float) -> DistParams:
    return DistParams("half_normal", (sd,))


# --- special functions -------------------------------------------------


def ln_gamma(x: float) -> float:
    """Natural log of the gamma function for x > 0."""
    if math.isnan(x) or x <= 0.0:
        raise DomainError(f"ln_gamma needs x > 0, got {x}")
    return math.lgamma(x)


def _ln_beta(a: float, b: float) -> float:
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta, by modified Lentz iteration."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _CF_TINY:
        d = _CF_TINY
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise ArithmeticError(
        f"incomplete beta continued fraction did not converge for a={a}, b={b}, x={x}"
    )


def reg_inc_beta(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b)."""
    if not (a > 0 and b > 0):
        raise DomainError(f"reg_inc_beta needs a, b > 0, got a={a}, b={b}")
    if math.isnan(x) or x < 0.0 or x > 1.0:
        raise DomainError(f"reg_inc_beta needs 0 <= x <= 1, got {x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    if a == b and x == 0.5:
        return 0.5
    ln_front = a * math.log(x) + b * math.log1p(-x) - _ln_beta(a, b)
    if x < (a + 1.0) / (a + b + 2.0):
        return math.exp(ln_front) * _betacf(a, b, x) / a
    return 1.0 - math.exp(ln_front) * _betacf(b, a, 1.0 - x) / b


def reg_lower_gamma(a: float, x: float) -> float:
    """Regularized lower incomplete gamma function P(a, x)."""
    if a <= 0:
        raise DomainError(f"reg_lower_gamma needs a > 0, got {a}")
    if math.isnan(x) or x < 0:
        raise DomainError(f"reg_lower_gamma needs x >= 0, got {x}")
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        return 1.0
    if x < a + 1.0:
        # series: P(a,x) = x^a e^-x / Gamma(a) * sum x^n / (a (a+1) ... (a+n))
        ap = a
        term = 1.0 / a
        total = term
        for _ in range(10_000):
            ap += 1.0
            term *= x / ap
            total += term
            if abs(term) < abs(total) * _CF_EPS:
                return total * math.exp(-x + a * math.log(x) - math.lgamma(a))
        raise ArithmeticError(f"incomplete gamma series did not converge for a={a}, x={x}")
    # continued fraction for Q(a,x), again via modified Lentz
    b = x + 1.0 - a
    c = 1.0 / _CF_TINY
    d = 1.0 / b
    h = d
    for i in range(1, 10_000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = b + an / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            q = h * math.exp(-x + a * math.log(x) - math.lgamma(a))
            return 1.0 - q
    raise ArithmeticError(f"incomplete gamma fraction did not converge for a={a}, x={x}")


def _norm_cdf(z: float) -> float:
    return 0.5 * math.erfc(-z / _SQRT2)


def _norm_log_pdf(z: float) -> float:
    return -0.5 * z * z - _LN_SQRT_2PI


# --- distribution operations -------------------------------------------


def cdf(d: DistParams, x: float) -> float:
    """Cumulative probability P(X <= x)."""
    if math.isnan(x):
        raise DomainError("cdf needs a real x, got NaN")
    if x == math.inf:
        return 1.0
    if x == -math.inf:
        return 0.0
    f, p = d.family, d.params
    if f == "normal":
        mu, sd = p
        return _norm_cdf((x - mu) / sd)
    if f == "student_t":
        return _t_cdf(x, p[0])
    if f == "chi_square":
        if x <= 0.0:
            return 0.0
        return reg_lower_gamma(p[0] / 2.0, x / 2.0)
    if f == "poisson":
        if x < 0.0:
            return 0.0
        if p[0] == 0.0:
            return 1.0
        # P(X <= k) = Q(k+1, rate)
        return 1.0 - reg_lower_gamma(math.floor(x) + 1.0, p[0])
    if f == "uniform":
        lo, hi = p
        if x <= lo:
            return 0.0
        if x >= hi:
            return 1.0
        return (x - lo) / (hi - lo)
    if f == "truncated_normal":
        mu, sd, lo, hi = p
        if x <= lo:
            return 0.0
        if x >= hi:
            return 1.0
        c_lo = _norm_cdf((lo - mu) / sd)
        c_hi = _norm_cdf((hi - mu) / sd)
        if c_hi <= c_lo:
            raise DomainError("truncation interval carries no normal mass")
        return min(1.0, (_norm_cdf((x - mu) / sd) - c_lo) / (c_hi - c_lo))
    if f == "half_normal":
        if x <= 0.0:
            return 0.0
        return math.erf(x / (p[0] * _SQRT2))
    raise UnsupportedFamilyError(f"cdf not implemented for {f!r}")


def _t_cdf(t: float, df: float) -> float:
    if t == 0.0:
        return 0.5
    if df >= _T_NORMAL_LIMIT_DF:
        # first-order normal-limit expansion; next term is O(df^-2)
        return _norm_cdf(t) - math.exp(_norm_log_pdf(t)) * (t**3 + t) / (4.0 * df)
    x = 0.5 * (1.0 + t / math.sqrt(df + t * t))
    return reg_inc_beta(df / 2.0, df / 2.0, x)


def quantile(d: DistParams, prob: float) -> float:
    """Inverse CDF by bracketed bisection (integer search for poisson)."""
    if math.isnan(prob) or not 0.0 < prob < 1.0:
        raise DomainError(f"quantile needs 0 < p < 1, got {prob}")
    if d.family == "poisson":
        # smallest integer k with P(X <= k) >= prob
        target = prob - 1e-12
        if cdf(d, 0.0) >= target:
            return 0.0
        hi = 1.0
        while cdf(d, hi) < target:
            hi *= 2.0
        lo = hi / 2.0
        while hi - lo > 1.0:
            mid = math.floor(0.5 * (lo + hi))
            if cdf(d, mid) < target:
                lo = mid
            else:
                hi = mid
        return hi
    lo, hi = _bracket(d, prob)
    for _ in range(64):
        mid = 0.5 * (lo + hi)
        if cdf(d, mid) < prob:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _bracket(d: DistParams, prob: float) -> tuple[float, float]:
    f, p = d.family, d.params
    if f == "uniform":
        return p[0], p[1]
    if f == "truncated_normal":
        return p[2], p[3]
    if f in ("chi_square", "half_normal"):
        hi = 1.0
        while cdf(d, hi) < prob:
            hi *= 2.0
        return 0.0, hi
    center = p[0] if f == "normal" else 0.0
    width = 1.0
    for _ in range(2000):
        lo, hi = center - width, center + width
        if cdf(d, lo) < prob <= cdf(d, hi):
            return lo, hi
        width = min(width * 2.0, 8.9e307)  # keep the bracket finite
    raise ArithmeticError(f"could not bracket quantile {prob} for {f}")


def log_density(d: DistParams, x: float) -> float:
    """Natural log of the density (or mass); -inf outside the support."""
    if math.isnan(x):
        raise DomainError("log_density needs a real x, got NaN")
    f, p = d.family, d.params
    if f == "normal":
        mu, sd = p
        return _norm_log_pdf((x - mu) / sd) - math.log(sd)
    if f == "student_t":
        df = p[0]
        if math.isinf(x):
            return -math.inf
        return (
            math.lgamma((df + 1.0) / 2.0)
            - math.lgamma(df / 2.0)
            - 0.5 * math.log(df * math.pi)
            - 0.5 * (df + 1.0) * math.log1p(x * x / df)
        )
    if f == "chi_square":
        df = p[0]
        if x <= 0.0 or math.isinf(x):
            return -math.inf
        a = df / 2.0
        return (a - 1.0) * math.log(x) - x / 2.0 - a * math.log(2.0) - math.lgamma(a)
    if f == "poisson":
        rate = p[0]
        if x < 0.0 or x != math.floor(x) or math.isinf(x):
            return -math.inf
        if rate == 0.0:
            return 0.0 if x == 0.0 else -math.inf
        return x * math.log(rate) - rate - math.lgamma(x + 1.0)
    if f == "uniform":
        lo, hi = p
        if x < lo or x > hi:
            return -math.inf
        return -math.log(hi - lo)
    if f == "truncated_normal":
        mu, sd, lo, hi = p
        if x < lo or x > hi:
            return -math.inf
        z = _norm_cdf((hi - mu) / sd) - _norm_cdf((lo - mu) / sd)
        if z <= 0.0:
            raise DomainError("truncation interval carries no normal mass")
        return _norm_log_pdf((x - mu) / sd) - math.log(sd) - math.log(z)
    if f == "half_normal":
        sd = p[0]
        if x < 0.0 or math.isinf(x):
            return -math.inf
        return math.log(2.0) + _norm_log_pdf(x / sd) - math.log(sd)
    raise UnsupportedFamilyError(f"log_density not implemented for {f!r}")
