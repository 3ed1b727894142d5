"""Power-law structure of optimal weight vectors and the ratio-bound audit.

At an interior maximizer with dimension d the weights satisfy, for every
pair of support digits i > j,

    2d log(i/(j+1))  <=  log(p_j / p_i)  <=  2d log((i+1)/j),

because the criticality condition ties log(p_j/p_i) to the difference of
conditional expansion means, which the cylinder geometry brackets between
2 log i and 2 log(i+1) per digit.  Consequently the optimal weights decay
like k^(-2d) up to bounded factors; the fit here estimates that exponent by
ordinary least squares on (log k, log p_k) over an interior window.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .measures import ProbVec

__all__ = ["PowerLawFit", "RatioViolation", "RatioAudit",
           "fit_tail_exponent", "default_fit_range", "check_ratio_bounds", "tail_table"]


@dataclass(frozen=True)
class PowerLawFit:
    """OLS line through (log k, log p_k) over k in [k_lo, k_hi]."""

    slope: float
    intercept: float
    r_squared: float
    fit_range: tuple[int, int]


@dataclass(frozen=True)
class RatioViolation:
    i: int
    j: int
    lower: float
    value: float
    upper: float

    @property
    def margin(self) -> float:
        """How far outside the (slackened) bounds the value sits."""
        return max(self.lower - self.value, self.value - self.upper)


@dataclass(frozen=True)
class RatioAudit:
    violations: list[RatioViolation]
    pairs_checked: int
    slack: float
    worst_margin: float

    @property
    def ok(self) -> bool:
        return not self.violations


def default_fit_range(n: int) -> tuple[int, int]:
    """[max(8, n/32), n/4]: clear of the small-digit regime and the support edge.

    The power law is asymptotic; digits near k = n feel the truncation and
    tiny k carry O(1/k) corrections, so the fit window sits in between.
    """
    return max(8, n // 32), max(n // 4, max(8, n // 32) + 3)


def fit_tail_exponent(p: ProbVec, k_lo: int, k_hi: int) -> PowerLawFit:
    """Least-squares slope of log p_k against log k over k in [k_lo, k_hi]."""
    if k_hi > p.support_n:
        raise ValueError(f"fit range end {k_hi} exceeds support {p.support_n}")
    if k_lo < 1:
        raise ValueError("fit range must start at k >= 1")
    ks = np.arange(k_lo, k_hi + 1)
    w = p.weights[k_lo - 1:k_hi]
    if np.any(w <= 0):
        raise ValueError("weights must be positive over the fit range")
    if len(ks) < 4:
        raise ValueError(f"need at least 4 points to fit, got {len(ks)}")
    X = np.log(ks)
    Y = np.log(w)
    slope, intercept = np.polyfit(X, Y, 1)
    resid = Y - (slope * X + intercept)
    ss_tot = float(np.sum((Y - Y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return PowerLawFit(slope=float(slope), intercept=float(intercept),
                       r_squared=r2, fit_range=(k_lo, k_hi))


def check_ratio_bounds(p: ProbVec, d: float, slack: float = 0.0) -> RatioAudit:
    """Audit the pairwise weight-ratio bounds with additive slack.

    Checks, for every support pair i > j >= 1,
    2d log(i/(j+1)) - slack <= log(p_j/p_i) <= 2d log((i+1)/j) + slack,
    and returns every violating pair with its margins.  The audit always
    completes; an empty violation list means the vector is consistent with
    interior criticality at dimension d.
    """
    if not 0.0 < d < 1.0:
        raise ValueError(f"dimension must be in (0,1), got {d}")
    w = p.weights
    if np.any(w <= 0):
        raise ValueError("ratio audit requires strictly positive weights")
    n = len(w)
    ks = np.arange(1, n + 1, dtype=float)
    logw = np.log(w)
    # value[i,j] = log(p_j / p_i); bounds arrays indexed the same way
    value = logw[None, :] - logw[:, None]
    lower = 2.0 * d * (np.log(ks)[:, None] - np.log(ks + 1.0)[None, :])
    upper = 2.0 * d * (np.log(ks + 1.0)[:, None] - np.log(ks)[None, :])
    ii, jj = np.tril_indices(n, k=-1)  # i > j, 0-based rows are i
    bad_lo = value[ii, jj] < lower[ii, jj] - slack
    bad_hi = value[ii, jj] > upper[ii, jj] + slack
    bad = bad_lo | bad_hi
    violations = [
        RatioViolation(i=int(i) + 1, j=int(j) + 1, lower=float(lower[i, j]),
                       value=float(value[i, j]), upper=float(upper[i, j]))
        for i, j in zip(ii[bad], jj[bad])
    ]
    margins = np.maximum(lower[ii, jj] - value[ii, jj], value[ii, jj] - upper[ii, jj])
    return RatioAudit(violations=violations, pairs_checked=len(ii), slack=slack,
                      worst_margin=float(margins.max()) if len(ii) else float("-inf"))


def tail_table(p: ProbVec, d: float) -> np.ndarray:
    """Columns (k, p_k, p_k * k^(2d)) over the support, for delimited output.

    The third column is the compensated weight: flat up to bounded factors
    exactly when the tail law p_k ~ k^(-2d) holds.
    """
    ks = np.arange(1, p.support_n + 1, dtype=float)
    return np.column_stack([ks, p.weights, p.weights * ks ** (2.0 * d)])
