import math

import numpy as np
import pytest

from recscore.core import Dataset, SupportSet
from recscore.errors import InvalidSplit, ZeroVarianceColumn
from recscore.screening import (
    ScreenerConfig,
    default_keep,
    screening_schedule,
    select_support,
    sirs_stats,
    sis_stats,
    stats_schedule,
    supports_from_stats,
)
from recscore._backend import sirs_statistic

from reference import sirs_bruteforce


def _std(x):
    return (x - x.mean(axis=0)) / x.std(axis=0)


def test_sirs_matches_bruteforce_exactly_with_ties():
    rng = np.random.default_rng(101)
    for k in range(6):
        n = int(rng.integers(5, 50))
        p = int(rng.integers(2, 20))
        x = rng.standard_normal((n, p))
        y = rng.standard_normal(n)
        if k % 2 == 0 and n >= 4:
            y[1] = y[0]  # tied responses exercise the strict inequality
            y[3] = y[2]
        xs = np.ascontiguousarray(_std(x))
        prod = sirs_statistic(xs, np.ascontiguousarray(y))
        ref = sirs_bruteforce(xs, y)
        assert np.array_equal(prod, ref)


def test_sirs_stats_wraps_standardization():
    rng = np.random.default_rng(102)
    x = rng.standard_normal((30, 5)) * 3 + 1
    y = rng.standard_normal(30)
    d = Dataset(x, y)
    direct = sirs_statistic(np.ascontiguousarray(_std(x)), np.ascontiguousarray(y))
    assert np.max(np.abs(sirs_stats(d) - direct)) < 1e-12


def test_sirs_invariant_under_monotone_response_transform():
    rng = np.random.default_rng(103)
    x = rng.standard_normal((40, 6))
    y = rng.standard_normal(40)
    y[5] = y[4]
    d1 = Dataset(x, y)
    d2 = Dataset(x, y**3)  # strictly monotone keeps every indicator identical
    assert np.array_equal(sirs_stats(d1), sirs_stats(d2))


def test_sirs_ranks_signal_above_noise():
    rng = np.random.default_rng(104)
    x = rng.standard_normal((200, 10))
    y = 3.0 * x[:, 7] + 0.5 * rng.standard_normal(200)
    stats = sirs_stats(Dataset(x, y))
    assert int(np.argmax(stats)) == 7


def test_sirs_constant_column_scores_zero():
    rng = np.random.default_rng(105)
    x = rng.standard_normal((25, 4))
    x[:, 2] = 7.0
    stats = sirs_stats(Dataset(x, rng.standard_normal(25)))
    assert stats[2] == 0.0
    assert np.all(np.isfinite(stats))


def test_sis_matches_correlation_oracle():
    rng = np.random.default_rng(106)
    x = rng.standard_normal((60, 5))
    y = x[:, 1] - 2 * x[:, 3] + rng.standard_normal(60)
    stats = sis_stats(Dataset(x, y))
    ref = np.array([abs(np.corrcoef(x[:, j], y)[0, 1]) for j in range(5)])
    assert np.max(np.abs(stats - ref)) < 1e-12


def test_sis_zero_variance_errors():
    rng = np.random.default_rng(107)
    x = rng.standard_normal((20, 3))
    with pytest.raises(ZeroVarianceColumn) as ei:
        sis_stats(Dataset(x, np.full(20, 2.0)))
    assert ei.value.col == "y"
    x[:, 1] = 0.0
    with pytest.raises(ZeroVarianceColumn) as ei:
        sis_stats(Dataset(x, rng.standard_normal(20)))
    assert ei.value.col == 1


def test_select_support_drops_target_and_breaks_ties_low():
    stats = np.array([0.5, 0.9, 0.5, 0.1, 0.9])
    sup = select_support(stats, j0=1, keep=3)
    # ranked: 4 (0.9, tie with excluded 1), then 0 and 2 (tie 0.5 -> smaller first)
    assert isinstance(sup, SupportSet)
    assert sup.indices == (0, 2, 4)
    assert 1 not in sup.indices
    assert select_support(stats, j0=0, keep=99).indices == (1, 2, 3, 4)


def test_default_keep_values():
    assert default_keep(300) == math.floor(300 / math.log(300)) == 52
    assert default_keep(10) == 4
    assert default_keep(2) == 2


def test_stats_schedule_keys_and_row_windows():
    rng = np.random.default_rng(108)
    n, p, s_n = 16, 4, 6
    x = rng.standard_normal((n, p))
    y = rng.standard_normal(n)
    d = Dataset(x, y)
    sched = stats_schedule(d, s_n, ScreenerConfig())
    assert set(sched) == {-s_n, *range(s_n, n)}
    hold = sirs_stats(Dataset(x[s_n:], y[s_n:]))
    assert np.array_equal(sched[-s_n], hold)
    for t in (s_n, 10, n - 1):
        assert np.array_equal(sched[t], sirs_stats(Dataset(x[:t], y[:t])))


def test_stats_schedule_refresh_every_aliases_between_refreshes():
    rng = np.random.default_rng(109)
    n, s_n, r = 20, 8, 5
    d = Dataset(rng.standard_normal((n, 3)), rng.standard_normal(n))
    sched = stats_schedule(d, s_n, ScreenerConfig(refresh_every=r))
    for t in range(s_n, n):
        anchor = s_n + ((t - s_n) // r) * r
        assert sched[t] is sched[anchor]
    full = stats_schedule(d, s_n, ScreenerConfig(refresh_every=1))
    assert np.array_equal(sched[s_n], full[s_n])


def test_screening_schedule_supports():
    rng = np.random.default_rng(110)
    n, p, s_n, j0 = 30, 8, 10, 2
    x = rng.standard_normal((n, p))
    y = 2 * x[:, 0] + rng.standard_normal(n)
    d = Dataset(x, y)
    cfg = ScreenerConfig(keep=3)
    sched = screening_schedule(d, j0, s_n, cfg)
    assert set(sched) == {-s_n, *range(s_n, n)}
    for sup in sched.values():
        assert j0 not in sup.indices
        assert len(sup.indices) <= 3
    stats = stats_schedule(d, s_n, cfg)
    again = supports_from_stats(stats, j0, 3)
    assert {k: v.indices for k, v in sched.items()} == {k: v.indices for k, v in again.items()}


def test_screening_schedule_invalid_split():
    d = Dataset(np.random.default_rng(0).standard_normal((12, 3)), np.zeros(12))
    for bad in (0, 1, 12, 20):
        with pytest.raises(InvalidSplit):
            screening_schedule(d, 0, bad, ScreenerConfig())


def test_screening_schedule_fixed_indices():
    rng = np.random.default_rng(111)
    d = Dataset(rng.standard_normal((14, 6)), rng.standard_normal(14))
    cfg = ScreenerConfig(fixed_indices=(0, 2, 3))
    sched = screening_schedule(d, 2, 5, cfg)
    for sup in sched.values():
        assert sup.indices == (0, 3)  # target removed from the pinned set


def test_screener_config_validation():
    with pytest.raises(ValueError):
        ScreenerConfig(method="rank")
    with pytest.raises(ValueError):
        ScreenerConfig(keep=0)
    with pytest.raises(ValueError):
        ScreenerConfig(refresh_every=0)
