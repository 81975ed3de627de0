"""Rank-based k-sample tests used as power baselines: Kruskal-Wallis and the
Scholz-Stephens k-sample Anderson-Darling test. Both accept scalar data only
and are invariant under strictly increasing transforms of the data.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit, logit
from scipy.stats import chi2, rankdata

from ._errors import InputError

# Scholz & Stephens (1987), Table 2: critical values t_m(alpha) = b0 + b1/sqrt(m) + b2/m
_AD_ALPHA = np.array([0.25, 0.1, 0.05, 0.025, 0.01, 0.005, 0.001])
_AD_B0 = np.array([0.675, 1.281, 1.645, 1.96, 2.326, 2.573, 3.085])
_AD_B1 = np.array([-0.245, 0.25, 0.678, 1.149, 1.822, 2.364, 3.615])
_AD_B2 = np.array([-0.105, -0.305, -0.362, -0.391, -0.396, -0.345, -0.154])


@dataclass
class BaselineResult:
    method: str
    statistic: float
    p_value: float
    details: dict = field(default_factory=dict)


def _scalar_groups(data) -> list[np.ndarray]:
    groups = getattr(data, "groups", data)
    out = []
    for j, g in enumerate(groups):
        a = np.asarray(g, dtype=float)
        if a.ndim == 2:
            if a.shape[1] != 1:
                raise InputError("rank-based baselines need scalar data")
            a = a[:, 0]
        if a.ndim != 1 or a.size < 1:
            raise InputError(f"group {j} must be a non-empty 1-D sample")
        if not np.all(np.isfinite(a)):
            raise InputError(f"group {j} contains NaN or infinite values")
        out.append(a)
    if len(out) < 2:
        raise InputError(f"need at least 2 groups, got {len(out)}")
    return out


def kruskal_wallis(data) -> BaselineResult:
    """Kruskal-Wallis H with midranks and tie correction; chi-square(k-1) p-value."""
    groups = _scalar_groups(data)
    k = len(groups)
    sizes = np.array([g.size for g in groups])
    pooled = np.concatenate(groups)
    big_n = pooled.size
    ranks = rankdata(pooled)
    _, ties = np.unique(pooled, return_counts=True)
    correction = 1.0 - float(np.sum(ties ** 3 - ties)) / (big_n ** 3 - big_n)
    if correction <= 0.0:
        return BaselineResult("kruskal-wallis", 0.0, 1.0, {"df": k - 1})
    bounds = np.cumsum(sizes)[:-1]
    means = np.array([r.mean() for r in np.split(ranks, bounds)])
    h = 12.0 / (big_n * (big_n + 1)) * np.sum(sizes * (means - (big_n + 1) / 2.0) ** 2)
    h /= correction
    return BaselineResult("kruskal-wallis", float(h), float(chi2.sf(h, k - 1)), {"df": k - 1})


def ad_critical_values(k: int) -> np.ndarray:
    m = k - 1
    return _AD_B0 + _AD_B1 / np.sqrt(m) + _AD_B2 / m


def _ad_variance(sizes: np.ndarray) -> float:
    k = sizes.size
    big_n = int(sizes.sum())
    big_h = float(np.sum(1.0 / sizes))
    h = float(np.sum(1.0 / np.arange(1, big_n)))
    i = np.arange(1, big_n - 1)
    tail = np.cumsum((1.0 / np.arange(1, big_n))[::-1])[::-1]  # tail[i-1] = sum_{j>=i} 1/j
    # g = sum_{i=1}^{N-2} sum_{j=i+1}^{N-1} 1 / ((N-i) j)
    g = float(np.sum(tail[i] / (big_n - i)))
    a = (4 * g - 6) * (k - 1) + (10 - 6 * g) * big_h
    b = (2 * g - 4) * k**2 + 8 * h * k + (2 * g - 14 * h - 4) * big_h - 8 * h + 4 * g - 6
    c = (6 * h + 2 * g - 2) * k**2 + (4 * h - 4 * g + 6) * k + (2 * h - 6) * big_h + 4 * h
    d = (2 * h + 6) * k**2 - 4 * h * k
    n = float(big_n)
    return (a * n**3 + b * n**2 + c * n + d) / ((n - 1) * (n - 2) * (n - 3))


def _ad_midrank_statistic(groups: list[np.ndarray]) -> float:
    """Scholz-Stephens A2akN (midrank version, valid with ties)."""
    pooled = np.sort(np.concatenate(groups))
    big_n = pooled.size
    z, counts = np.unique(pooled, return_counts=True)
    lj = counts.astype(float)
    bj = np.searchsorted(pooled, z, "left") + lj / 2.0
    denom = bj * (big_n - bj) - big_n * lj / 4.0
    total = 0.0
    for s in groups:
        s = np.sort(s)
        m_ij = np.searchsorted(s, z, "right") - (np.searchsorted(s, z, "right")
                                                 - np.searchsorted(s, z, "left")) / 2.0
        total += np.sum(lj / big_n * (big_n * m_ij - bj * s.size) ** 2 / denom) / s.size
    return total * (big_n - 1.0) / big_n


def ad_pvalue(standardized: float, k: int) -> float:
    """Asymptotic p-value for the standardized k-sample AD statistic.

    Interpolates a quadratic in the critical values fitted to the log-odds
    of the tabulated levels; outside the table the fitted curve is continued
    along its tangent so that p stays monotone in the statistic.
    """
    crit = ad_critical_values(k)
    coef = np.polyfit(crit, logit(_AD_ALPHA), 2)
    slope = np.polyder(coef)
    lo, hi = crit[0], crit[-1]
    if standardized < lo:
        val = np.polyval(coef, lo) + min(np.polyval(slope, lo), 0.0) * (standardized - lo)
    elif standardized > hi:
        val = np.polyval(coef, hi) + min(np.polyval(slope, hi), 0.0) * (standardized - hi)
    else:
        val = np.polyval(coef, standardized)
    return float(expit(val))


def anderson_darling_k(data) -> BaselineResult:
    """k-sample Anderson-Darling test, midrank version, standardized statistic."""
    groups = _scalar_groups(data)
    k = len(groups)
    sizes = np.array([g.size for g in groups])
    big_n = int(sizes.sum())
    if big_n < 4:
        raise InputError("k-sample Anderson-Darling needs at least 4 observations in total")
    sigma = float(np.sqrt(_ad_variance(sizes)))
    pooled = np.concatenate(groups)
    if np.all(pooled == pooled[0]):
        return BaselineResult("anderson-darling-k", -(k - 1) / sigma, 1.0,
                              {"variant": "midrank", "a2akn": 0.0, "degenerate": True})
    a2 = _ad_midrank_statistic(groups)
    t = (a2 - (k - 1)) / sigma
    return BaselineResult("anderson-darling-k", float(t), ad_pvalue(t, k),
                          {"variant": "midrank", "a2akn": float(a2)})
