"""Monte-Carlo aggregation, distributional tests, and Poisson tail bounds.

All functions here are pure.  The tail machinery provides three routes to
the same quantity — exact summation, the Chernoff exponent through the
shape function h, and the simplified bound exp(-x^2 / (2(x+lambda))) — so
that each can serve as a check on the others.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special
from scipy import stats as sps

__all__ = [
    "McEstimate",
    "mc_estimate",
    "ks_test",
    "ks_2samp",
    "chisq_poisson",
    "poisson_tail_exact",
    "poisson_tail_bound",
    "chernoff_h",
    "chernoff_exponent",
]

#: sample size at which KS p-values switch from the exact finite-n
#: distribution to the asymptotic Kolmogorov distribution
KS_ASYMPTOTIC_N = 35


@dataclass(frozen=True)
class McEstimate:
    """Mean, standard error and 95% CI of a Monte-Carlo sample."""

    mean: float
    stderr: float
    reps: int
    ci95: tuple[float, float]
    flags: tuple[str, ...] = ()

    def with_flags(self, *flags: str) -> "McEstimate":
        return McEstimate(self.mean, self.stderr, self.reps, self.ci95, self.flags + flags)

    def to_dict(self) -> dict:
        return {
            "mean": self.mean,
            "stderr": self.stderr,
            "reps": self.reps,
            "ci95": list(self.ci95),
            "flags": list(self.flags),
        }


def mc_estimate(samples, flags: tuple[str, ...] = ()) -> McEstimate:
    """Aggregate replicate values into an McEstimate.

    stderr is the standard deviation of the sample divided by sqrt(reps)
    (so {0, 1} gives 0.5/sqrt(2) ~ 0.3536).  Summation is numpy's pairwise
    reduction, deterministic for a fixed input order.
    """
    x = np.asarray(samples, dtype=np.float64)
    if x.size < 2:
        raise ValueError(f"need at least 2 replicates, got {x.size}")
    n = int(x.size)
    mean = float(np.mean(x))
    stderr = float(np.sqrt(np.mean((x - mean) ** 2)) / math.sqrt(n))
    ci = (mean - 1.96 * stderr, mean + 1.96 * stderr)
    return McEstimate(mean, stderr, n, ci, flags)


def ks_test(samples, cdf) -> tuple[float, float]:
    """One-sample two-sided Kolmogorov-Smirnov test.

    Exact p-value for n < KS_ASYMPTOTIC_N, asymptotic Kolmogorov
    distribution otherwise.
    """
    x = np.sort(np.asarray(samples, dtype=np.float64))
    n = x.size
    if n == 0:
        raise ValueError("empty sample")
    f = np.asarray(cdf(x), dtype=np.float64)
    i = np.arange(1, n + 1)
    d = float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))
    if n < KS_ASYMPTOTIC_N:
        p = float(sps.kstwo.sf(d, n))
    else:
        p = float(special.kolmogorov(d * math.sqrt(n)))
    return d, min(max(p, 0.0), 1.0)


def ks_2samp(a, b) -> tuple[float, float]:
    """Two-sample KS test (asymptotic), thin wrapper kept for report symmetry."""
    res = sps.ks_2samp(np.asarray(a), np.asarray(b), method="asymp")
    return float(res.statistic), float(res.pvalue)


def chisq_poisson(counts, mean: float, min_expected: float = 5.0) -> tuple[float, float]:
    """Chi-square goodness of fit of integer counts against Poisson(mean).

    Bins are single values with the two tails merged until every expected
    count is at least ``min_expected``; the mean is a known parameter, so
    dof = bins - 1.
    """
    c = np.asarray(counts, dtype=np.int64)
    n = c.size
    if n == 0:
        raise ValueError("empty sample")
    kmax = int(c.max())
    ks = np.arange(kmax + 2)
    pk = sps.poisson.pmf(ks[:-1], mean)
    pk = np.append(pk, max(1.0 - pk.sum(), 0.0))  # upper tail bin
    expected = n * pk
    observed = np.bincount(c, minlength=kmax + 2).astype(np.float64)
    # merge left tail upward, right tail downward
    lo = 0
    while lo < len(expected) - 1 and expected[lo] < min_expected:
        expected[lo + 1] += expected[lo]
        observed[lo + 1] += observed[lo]
        lo += 1
    hi = len(expected) - 1
    while hi > lo and expected[hi] < min_expected:
        expected[hi - 1] += expected[hi]
        observed[hi - 1] += observed[hi]
        hi -= 1
    e = expected[lo : hi + 1]
    o = observed[lo : hi + 1]
    if len(e) < 2:
        raise ValueError("too few usable bins for a chi-square test")
    stat = float(np.sum((o - e) ** 2 / e))
    p = float(sps.chi2.sf(stat, len(e) - 1))
    return stat, p


def _poisson_logpmf(k: int, lam: float) -> float:
    return k * math.log(lam) - lam - math.lgamma(k + 1)


def poisson_tail_exact(lam: float, x: float, side: str) -> float:
    """Exact Poisson tail P[Poi(lam) >= lam+x] or P[Poi(lam) <= lam-x].

    Direct pmf summation away from the mode with compensated (Kahan)
    accumulation; the lower tail is 0 when lam - x < 0 (empty support).
    """
    if lam <= 0 or x <= 0:
        raise ValueError(f"need lam > 0 and x > 0, got lam={lam}, x={x}")
    if side == "upper":
        k0 = math.ceil(lam + x)
        total = 0.0
        comp = 0.0
        term = math.exp(_poisson_logpmf(k0, lam))
        k = k0
        while term > 0.0:
            y = term - comp
            t = total + y
            comp = (t - total) - y
            total = t
            k += 1
            term *= lam / k
            if term < total * 1e-18 and k > lam:
                break
        return total
    if side == "lower":
        k1 = math.floor(lam - x)
        if k1 < 0:
            return 0.0
        total = 0.0
        comp = 0.0
        term = math.exp(_poisson_logpmf(k1, lam))
        for k in range(k1, -1, -1):
            y = term - comp
            t = total + y
            comp = (t - total) - y
            total = t
            term *= k / lam
        return total
    raise ValueError(f"side must be 'upper' or 'lower', got {side!r}")


def poisson_tail_bound(lam: float, x: float) -> float:
    """Two-sided Poisson deviation bound exp(-x^2 / (2(x + lam)))."""
    if lam <= 0 or x <= 0:
        raise ValueError(f"need lam > 0 and x > 0, got lam={lam}, x={x}")
    return math.exp(-x * x / (2.0 * (x + lam)))


# series for h near 0: h(x) = sum_k (-1)^k 2 x^k / ((k+1)(k+2))
_H_SERIES_CUTOFF = 1e-4


def chernoff_h(x: float) -> float:
    """Shape function h(x) = 2((1+x)log(1+x) - x)/x^2 on [-1, inf).

    Continuous, decreasing, non-negative; h(-1) = 2 and h(0) = 1 fill the
    removable singularities.  Below |x| < 1e-4 the closed form cancels
    catastrophically and a series expansion is used instead.
    """
    if x < -1:
        raise ValueError(f"h is defined on [-1, inf), got {x}")
    if x == -1:
        return 2.0
    if abs(x) < _H_SERIES_CUTOFF:
        # 1 - x/3 + x^2/6 - x^3/10 + x^4/15
        return 1.0 + x * (-1.0 / 3.0 + x * (1.0 / 6.0 + x * (-0.1 + x / 15.0)))
    return 2.0 * ((1.0 + x) * math.log1p(x) - x) / (x * x)


@lru_cache(maxsize=4)
def _leggauss(n: int):
    return np.polynomial.legendre.leggauss(n)


def chernoff_h_quadrature(x: float, n: int = 2000) -> float:
    """Integral form of h (Gauss-Legendre quadrature), kept as a cross-check."""
    if x < -1:
        raise ValueError(f"h is defined on [-1, inf), got {x}")
    nodes, weights = _leggauss(n)
    s = 0.5 * (nodes + 1.0)  # map to [0, 1]
    vals = 2.0 * (1.0 - s) / (1.0 + s * x)
    return float(0.5 * np.sum(weights * vals))


def chernoff_exponent(lam: float, x: float, side: str) -> float:
    """Chernoff exponent of the Poisson tail: x^2/(2 lam) * h(+-x/lam).

    The upper side is valid for all x > 0; the lower side needs x < lam so
    that -x/lam stays inside the domain of h.
    """
    if lam <= 0 or x <= 0:
        raise ValueError(f"need lam > 0 and x > 0, got lam={lam}, x={x}")
    if side == "upper":
        return x * x / (2.0 * lam) * chernoff_h(x / lam)
    if side == "lower":
        if x >= lam:
            raise ValueError(f"lower-side exponent needs x < lam, got x={x}, lam={lam}")
        return x * x / (2.0 * lam) * chernoff_h(-x / lam)
    raise ValueError(f"side must be 'upper' or 'lower', got {side!r}")
