"""Tests for the ON/OFF activity chain: sojourn law, sampling, bookkeeping."""

import math

import numpy as np
import pytest
from scipy import stats

from onoffnet.activity import (
    NodeState,
    OnOffParams,
    Segment,
    Trajectory,
    monte_carlo_on_times,
    sample_trajectory,
    sojourn_survival,
    total_off_time,
    total_on_time,
)


def test_params_validation():
    with pytest.raises(ValueError):
        OnOffParams(-0.1, 1.0)
    with pytest.raises(ValueError):
        OnOffParams(0.0, math.inf)
    p = OnOffParams(0.25, 0.5)
    assert p.stay_on == 0.75
    assert p.stay_off == 0.5
    assert p.leaving_rate(NodeState.ON) == 0.25
    assert p.leaving_rate(NodeState.OFF) == 0.5


# --- sojourn survival ---------------------------------------------------


def test_survival_empty_interval_is_one():
    p = OnOffParams(2.3, 0.7)
    assert sojourn_survival(p, NodeState.ON, 0.0) == 1.0
    assert sojourn_survival(p, NodeState.OFF, 0.0) == 1.0


def test_survival_direct_value():
    # exp(-lam * d) with lam=0.5, d=2; cross-checked against the
    # finite-product discretisation (1 - lam*h)^(d/h) as h -> 0.
    p = OnOffParams(0.5, 1.0)
    value = sojourn_survival(p, NodeState.ON, 2.0)
    assert value == pytest.approx(0.36787944117144233, rel=1e-15)
    h = 1e-6
    product = (1.0 - 0.5 * h) ** (2.0 / h)
    assert value == pytest.approx(product, rel=1e-5)


def test_survival_absorbing_state():
    p = OnOffParams(0.0, 1.0)
    assert sojourn_survival(p, NodeState.ON, 1e6) == 1.0


def test_survival_rejects_negative_duration():
    with pytest.raises(ValueError):
        sojourn_survival(OnOffParams(1.0, 1.0), NodeState.ON, -0.1)


def test_survival_monotone_and_multiplicative():
    p = OnOffParams(0.8, 0.3)
    rng = np.random.default_rng(11)
    for _ in range(200):
        d1, d2 = rng.uniform(0.0, 5.0, size=2)
        s1 = sojourn_survival(p, NodeState.ON, d1)
        s12 = sojourn_survival(p, NodeState.ON, d1 + d2)
        assert s12 <= s1
        assert s12 == pytest.approx(s1 * sojourn_survival(p, NodeState.ON, d2), rel=1e-12)
        assert 0.0 < s12 <= 1.0


# --- trajectory construction -------------------------------------------


def test_trajectory_rejects_gap():
    with pytest.raises(ValueError):
        Trajectory(3.0, (Segment(NodeState.ON, 0.0, 1.0), Segment(NodeState.OFF, 1.5, 1.5)))


def test_trajectory_rejects_missing_alternation():
    with pytest.raises(ValueError):
        Trajectory(2.0, (Segment(NodeState.ON, 0.0, 1.0), Segment(NodeState.ON, 1.0, 1.0)))


def test_trajectory_rejects_zero_duration():
    with pytest.raises(ValueError):
        Trajectory(1.0, (Segment(NodeState.ON, 0.0, 1.0), Segment(NodeState.OFF, 1.0, 0.0)))


def test_trajectory_rejects_short_tiling():
    with pytest.raises(ValueError):
        Trajectory(2.0, (Segment(NodeState.ON, 0.0, 1.0),))


def test_trajectory_csv_rows():
    traj = Trajectory(4.0, (Segment(NodeState.ON, 0.0, 1.0), Segment(NodeState.OFF, 1.0, 3.0)))
    assert traj.csv_rows() == ["0,ON,0.0,1.0", "1,OFF,1.0,3.0"]


# --- sampling ------------------------------------------------------------


def test_sample_absorbing_on():
    traj = sample_trajectory(OnOffParams(0.0, 2.0), NodeState.ON, 10.0, 1)
    assert traj.segments == (Segment(NodeState.ON, 0.0, 10.0),)
    assert total_on_time(traj) == 10.0


def test_sample_absorbing_off():
    traj = sample_trajectory(OnOffParams(2.0, 0.0), NodeState.OFF, 10.0, 1)
    assert traj.segments == (Segment(NodeState.OFF, 0.0, 10.0),)
    assert total_on_time(traj) == 0.0


def test_sample_rejects_nonpositive_horizon():
    with pytest.raises(ValueError):
        sample_trajectory(OnOffParams(1.0, 1.0), NodeState.ON, 0.0, 3)


def test_sample_deterministic_in_seed():
    p = OnOffParams(1.3, 0.6)
    a = sample_trajectory(p, NodeState.ON, 25.0, 123)
    b = sample_trajectory(p, NodeState.ON, 25.0, 123)
    c = sample_trajectory(p, NodeState.ON, 25.0, 124)
    assert a == b
    assert a != c


@pytest.mark.parametrize("lam,mu", [(1.0, 3.0), (0.2, 0.2), (4.0, 0.5)])
def test_sampled_trajectories_satisfy_invariants(lam, mu):
    p = OnOffParams(lam, mu)
    horizon = 7.5
    for seed in range(300):
        traj = sample_trajectory(p, NodeState.ON if seed % 2 else NodeState.OFF, horizon, seed)
        # Construction already validates tiling/alternation; double-check the sums.
        total = total_on_time(traj) + total_off_time(traj)
        assert total == pytest.approx(horizon, rel=1e-12)
        assert 0.0 <= total_on_time(traj) <= horizon


def test_long_run_on_fraction_matches_stationary_law():
    # Stationary P(ON) = mu/(lam+mu) = 0.75; long horizons plus many seeds
    # pin the empirical mean within three standard errors.
    p = OnOffParams(1.0, 3.0)
    horizon = 1000.0
    fractions = np.array(
        [total_on_time(sample_trajectory(p, NodeState.ON, horizon, seed)) / horizon
         for seed in range(200)]
    )
    stderr = fractions.std(ddof=1) / math.sqrt(fractions.size)
    assert abs(fractions.mean() - 0.75) < 3.0 * stderr


def test_first_on_sojourn_is_exponential():
    # KS test of the first ON sojourn against Exp(1) over 1e5 seeds; the OFF
    # rate is tiny so essentially every first sojourn ends uncensored.
    p = OnOffParams(1.0, 0.01)
    n = 100_000
    first = np.array(
        [sample_trajectory(p, NodeState.ON, 30.0, seed).segments[0].duration
         for seed in range(n)]
    )
    statistic = stats.kstest(first, "expon", args=(0.0, 1.0)).statistic
    critical = stats.kstwobign.isf(0.01) / math.sqrt(n)
    assert statistic < critical


# --- totals --------------------------------------------------------------


def test_total_on_time_examples():
    all_off = Trajectory(5.0, (Segment(NodeState.OFF, 0.0, 5.0),))
    assert total_on_time(all_off) == 0.0
    all_on = Trajectory(7.0, (Segment(NodeState.ON, 0.0, 7.0),))
    assert total_on_time(all_on) == 7.0
    mixed = Trajectory(
        4.0,
        (
            Segment(NodeState.ON, 0.0, 1.0),
            Segment(NodeState.OFF, 1.0, 2.0),
            Segment(NodeState.ON, 3.0, 1.0),
        ),
    )
    assert total_on_time(mixed) == 2.0
    assert total_off_time(mixed) == 2.0


def test_monte_carlo_on_times_reproducible():
    p = OnOffParams(1.0, 1.0)
    a = monte_carlo_on_times(p, NodeState.ON, 5.0, 50, 9)
    b = monte_carlo_on_times(p, NodeState.ON, 5.0, 50, 9)
    assert a.shape == (50,)
    assert np.array_equal(a, b)
    assert np.all((a >= 0.0) & (a <= 5.0))
