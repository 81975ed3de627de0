import warnings

import numpy as np
import pytest
from scipy import stats

from gmmd import GroupedSamples, InputError, anderson_darling_k, kruskal_wallis
from gmmd.baselines import ad_critical_values, ad_pvalue


def test_kw_hand_example():
    res = kruskal_wallis([[1, 2], [3, 4], [5, 6]])
    assert res.statistic == pytest.approx(96 / 21, abs=1e-12)
    assert res.details["df"] == 2
    assert res.p_value == pytest.approx(stats.chi2.sf(96 / 21, 2))


def test_kw_degenerate():
    res = kruskal_wallis([[3, 3], [3, 3], [3, 3]])
    assert (res.statistic, res.p_value) == (0.0, 1.0)


def test_kw_matches_scipy_with_ties(rng):
    for _ in range(10):
        groups = [np.round(rng.normal(size=rng.integers(3, 15)), 1) for _ in range(4)]
        ref = stats.kruskal(*groups)
        res = kruskal_wallis(groups)
        assert res.statistic == pytest.approx(ref.statistic, rel=1e-10)
        assert res.p_value == pytest.approx(ref.pvalue, rel=1e-8)


def test_kw_label_free():
    a = kruskal_wallis([[1, 5, 2], [5, 1, 2], [2, 1, 5]])
    b = kruskal_wallis([[5, 2, 1], [1, 2, 5], [1, 5, 2]])
    assert a.statistic == b.statistic


def test_ad_degenerate():
    res = anderson_darling_k([[1, 1, 1]] * 3)
    assert res.p_value == 1.0
    assert res.statistic < 0


def test_ad_statistic_matches_scipy(rng):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for _ in range(10):
            groups = [np.round(rng.normal(size=rng.integers(5, 30)), 1) for _ in range(3)]
            ref = stats.anderson_ksamp(groups, midrank=True)
            res = anderson_darling_k(groups)
            assert res.statistic == pytest.approx(ref.statistic, rel=1e-10, abs=1e-12)
            if 0.001 < ref.pvalue < 0.25:
                assert res.p_value == pytest.approx(ref.pvalue, rel=0.15)


@pytest.mark.parametrize("k", [2, 3, 6])
def test_ad_pvalue_monotone_and_on_table(k):
    t = np.linspace(-4, 15, 400)
    p = np.array([ad_pvalue(v, k) for v in t])
    assert np.all(np.diff(p) <= 0)
    assert np.all((p > 0) & (p < 1))
    crit = ad_critical_values(k)
    for c, level in zip(crit[1:-1], [0.1, 0.05, 0.025, 0.01, 0.005]):
        assert ad_pvalue(c, k) == pytest.approx(level, rel=0.1)


def test_ad_separated_groups():
    rng = np.random.default_rng(1)
    groups = [rng.normal(m, 0.1, 30) for m in (0, 5, 10)]
    assert anderson_darling_k(groups).p_value < 0.001


def test_rank_invariance(rng):
    groups = [rng.normal(size=12), rng.normal(0.4, 1, size=9), rng.normal(size=15)]
    cubed = [g ** 3 for g in groups]
    assert kruskal_wallis(groups).statistic == kruskal_wallis(cubed).statistic
    assert anderson_darling_k(groups).statistic == anderson_darling_k(cubed).statistic


def test_accepts_grouped_samples(rng):
    data = GroupedSamples([rng.normal(size=5) for _ in range(3)])
    assert kruskal_wallis(data).statistic == kruskal_wallis(list(data.groups)).statistic


def test_rejects_vector_data():
    with pytest.raises(InputError):
        kruskal_wallis(GroupedSamples([np.zeros((3, 2)), np.ones((3, 2))]))


@pytest.mark.slow
def test_ad_size_uniform_null():
    rng = np.random.default_rng(31)
    rejections = sum(anderson_darling_k([rng.uniform(size=50) for _ in range(3)]).p_value <= 0.05
                     for _ in range(500))
    assert 0.02 <= rejections / 500 <= 0.09
