import math

import numpy as np
import pytest

from siu.errors import ConfigError, DivergenceError, InconclusiveError
from siu.lemma_lab import (
    ScalarSystemConfig,
    decay_rate_check,
    gamma_mapping,
    random_config,
    sample_times,
    simulate_basic,
    simulate_coupled,
    simulate_modified,
    trajectory_from_series,
)
from siu.schedule import ScheduleConfig, gamma_advance, initial_gamma


def test_sample_times_dense_then_log():
    ts = sample_times(10**6)
    assert list(ts[:1001]) == list(range(1001))
    assert ts[-1] == 10**6
    assert np.all(np.diff(ts) > 0)
    assert (ts >= 5 * 10**5).sum() >= 100
    assert list(sample_times(50)) == list(range(51))


def test_basic_pure_contraction():
    tr = simulate_basic(ScalarSystemConfig(c1=0.0, c2=0.5, delta1=0.5, delta2=0.5, v0=1.0), 500)
    assert np.all(np.diff(tr.v) < 0) and tr.v[-1] > 0


def test_basic_two_steps():
    tr = simulate_basic(ScalarSystemConfig(c1=1, c2=1, delta1=0.5, delta2=0.5, v0=0.0), 2)
    assert tr.v[1] == 1.0
    assert tr.v[2] == pytest.approx((1 - 1 / math.sqrt(2)) * 1 + 1 / math.sqrt(2), rel=1e-15)


def test_basic_equal_rates_bounded():
    tr = simulate_basic(ScalarSystemConfig(c1=0.7, c2=0.3, delta1=0.4, delta2=0.4, v0=2.0), 10**5)
    assert math.isfinite(tr.sup_v)
    half = tr.t >= 5 * 10**4
    assert np.abs(tr.v[half]).max() <= tr.sup_v
    # settles near c1/c2 instead of growing
    assert tr.v[-1] == pytest.approx(0.7 / 0.3, rel=1e-2)


def test_modified_zero_fixed_point():
    tr = simulate_modified(ScalarSystemConfig(delta1=0.8, delta2=0.2, c5=0.0, v0=0.0), 1000)
    assert np.all(tr.v == 0)


def test_modified_rejects_equal_rates():
    with pytest.raises(ConfigError):
        simulate_modified(ScalarSystemConfig(delta1=0.5, delta2=0.5), 10)


def test_modified_tail_decreasing():
    cfg = ScalarSystemConfig(c1=1, c2=1, delta1=0.8, delta2=0.2, c3=1, c4=1, c5=1, v0=5)
    tr = simulate_modified(cfg, 10**5)
    tail = tr.t >= 5 * 10**4
    scaled = (tr.t[tail] + 1.0) ** 0.5 * np.abs(tr.v[tail])
    assert np.all(np.diff(scaled) < 0)


def test_modified_slow_decay_not_certified_by_default_shrink():
    # (t+1)^0.5 v_t ~ t^-0.1 here: over the tail the scaled maximum only
    # drops from 0.2693 to 0.2515, a ratio of 0.934 > 0.9
    cfg = ScalarSystemConfig(c1=1, c2=1, delta1=0.8, delta2=0.2, c3=1, c4=1, c5=1, v0=5)
    tr = simulate_modified(cfg, 10**6)
    assert decay_rate_check(tr, 0.3, 0.5, 0.9) is True
    assert decay_rate_check(tr, 0.5, 0.5, 0.9) is False
    assert decay_rate_check(tr, 0.5, 0.5, 0.95) is True


def test_coupled_zero():
    tr = simulate_coupled(ScalarSystemConfig(delta1=0.8, delta2=0.2, v0=0.0, w0=0.0), 1000)
    assert np.all(tr.v == 0) and np.all(tr.w == 0)


@pytest.mark.slow
def test_coupled_bounded_random_configs():
    rng = np.random.default_rng(2024)
    for _ in range(20):
        tr = simulate_coupled(random_config(rng), 10**6)
        assert tr.sup_v < 1e9 and tr.sup_w < 1e9


def test_gamma_recursion_equals_coupled_system():
    sc = ScheduleConfig(a=0.01, b=0.04, tau1=0.6, tau2=0.1, s=0.3, eta=7.5, n_agents=40)
    lam2 = 0.37
    T = 10_000
    tr = simulate_coupled(gamma_mapping(sc.s, lam2, sc.n_agents, sc.a, sc.b, sc.tau1, sc.tau2, sc.eta), T, dense_until=T)
    g = initial_gamma(sc)
    g1 = [g.gamma1]
    g2 = [g.gamma2]
    for _ in range(T):
        g = gamma_advance(g, sc, lam2)
        g1.append(g.gamma1)
        g2.append(g.gamma2)
    assert np.array_equal(tr.v, np.array(g2))
    assert np.array_equal(tr.w, np.array(g1))


def test_decay_check_examples():
    t = np.arange(10**5 + 1)
    assert decay_rate_check(trajectory_from_series(t, 1.0 / (t + 1)), 0.5) is True
    assert decay_rate_check(trajectory_from_series(t, np.ones(t.size)), 0.1) is False


def test_decay_check_inconclusive():
    t = np.arange(150)
    with pytest.raises(InconclusiveError):
        decay_rate_check(trajectory_from_series(t, np.ones(t.size)), 0.1)


def test_decay_check_argument_errors():
    t = np.arange(1000)
    tr = trajectory_from_series(t, np.ones(t.size))
    with pytest.raises(ValueError):
        decay_rate_check(tr, -0.1)
    with pytest.raises(ValueError):
        decay_rate_check(tr, 0.1, tail_fraction=1.0)


def test_divergence_detected():
    with pytest.raises(DivergenceError):
        simulate_basic(ScalarSystemConfig(c1=1.0, c2=1e6, delta1=0.01, delta2=0.01, v0=1.0), 5000)


def test_random_config_valid():
    rng = np.random.default_rng(0)
    for _ in range(50):
        c = random_config(rng)
        assert 0 < c.delta2 < c.delta1 < 1
        assert min(c.c1, c.c2, c.c3, c.c4, c.c5, c.c6, c.c7) > 0


def test_csv_output(tmp_path):
    tr = simulate_coupled(ScalarSystemConfig(delta1=0.8, delta2=0.2, v0=1.0, w0=0.5), 20)
    p = tmp_path / "traj.csv"
    tr.to_csv(p)
    lines = p.read_text().splitlines()
    assert lines[0] == "t,v,w"
    assert len(lines) == 22
    scalar = simulate_basic(ScalarSystemConfig(), 5)
    scalar.to_csv(p)
    assert p.read_text().splitlines()[1].endswith(",")
