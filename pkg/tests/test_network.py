import math

import numpy as np
import pytest

from conftest import make_topology
from regimescan.network import DelaySpec, build, child_rng, empirical_delay_cv, quantize_delays
from regimescan.params import ConfigError, NetworkParams, SynapseParams

NET = NetworkParams()
SYN = SynapseParams()


def test_uniform_delays_exact():
    topo = build(NET, SYN, DelaySpec(6.25, 0.0), seed=1)
    # 62.5 steps rounds half to even
    assert np.all(topo.delay_steps == 62)
    assert np.all(topo.delay == quantize_delays(np.array([6.25]), 0.1)[0])
    assert empirical_delay_cv(topo) == 0.0


def test_zero_probability_gives_no_edges():
    topo = build(NetworkParams(p_connect=0.0), SYN, DelaySpec(), seed=0)
    assert topo.n_edges == 0


def test_edge_count_binomial_bounds():
    n = NET.n_neurons
    trials = n * (n - 1)
    mean, sd = 0.1 * trials, math.sqrt(trials * 0.1 * 0.9)
    assert mean == pytest.approx(3980.0)
    counts = [build(NET, SYN, DelaySpec(), seed=s).n_edges for s in range(100)]
    assert all(abs(c - mean) <= 4 * sd for c in counts)
    # the average over 100 seeds has a 10x smaller SD
    assert abs(np.mean(counts) - mean) <= 4 * sd / 10


def test_structure_invariants():
    topo = build(NET, SYN, DelaySpec(6.25, 0.2), seed=4)
    assert not np.any(topo.pre == topo.post)
    assert np.array_equal(topo.plastic, (topo.pre < 160) & (topo.post < 160))
    assert topo.delay.min() >= topo.dt
    assert np.all(np.diff(topo.pre) >= 0)
    # weights follow the population convention
    ee = topo.plastic
    ei = (topo.pre < 160) & (topo.post >= 160)
    ie = (topo.pre >= 160) & (topo.post < 160)
    assert np.all(topo.weight[ee] == SYN.w_ee)
    assert np.all(topo.weight[ei] == SYN.w_ei)
    assert np.all(topo.weight[ie] == SYN.w_ie)


def test_build_is_pure():
    a = build(NET, SYN, DelaySpec(6.25, 0.2), seed=9)
    b = build(NET, SYN, DelaySpec(6.25, 0.2), seed=9)
    assert a.to_json() == b.to_json()


def test_jitter_keeps_edges():
    a = build(NET, SYN, DelaySpec(6.25, 0.0), seed=9)
    b = build(NET, SYN, DelaySpec(6.25, 0.2), seed=9)
    assert np.array_equal(a.pre, b.pre) and np.array_equal(a.post, b.post)
    assert not np.array_equal(a.delay, b.delay)


def test_jitter_cv_matches_target():
    for seed in range(5):
        topo = build(NET, SYN, DelaySpec(6.25, 0.2), seed=seed)
        assert topo.n_edges >= 3000
        assert abs(empirical_delay_cv(topo) - 0.2) <= 0.03


def test_two_point_cv():
    topo = make_topology([0, 1], [1, 0], [1.0, 1.0], [5.0, 15.0], n_exc=2)
    assert empirical_delay_cv(topo) == pytest.approx(0.5, abs=1e-15)


def test_cv_needs_two_edges():
    topo = make_topology([0], [1], [1.0], [5.0], n_exc=2)
    with pytest.raises(ValueError):
        empirical_delay_cv(topo)


def test_jitter_rejected_at_zero_delay():
    with pytest.raises(ConfigError):
        DelaySpec(0.0, 0.2)


def test_quantization_rounds_and_floors_at_one_step():
    q = quantize_delays(np.array([0.0, 0.04, 0.06, 0.149, 0.151, 6.25]), 0.1)
    np.testing.assert_allclose(q, [0.1, 0.1, 0.1, 0.1, 0.2, 6.2], atol=1e-12)


def test_streams_are_order_independent():
    a = child_rng(5, 3).standard_normal(4)
    child_rng(5, 0).standard_normal(100)
    b = child_rng(5, 3).standard_normal(4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, child_rng(5, 2).standard_normal(4))


def test_topology_json_dump():
    topo = build(NetworkParams(n_exc=4, n_inh=1, p_connect=0.5), SYN, DelaySpec(2.0), seed=0)
    dump = topo.to_json()
    assert len(dump["edges"]) == topo.n_edges
