import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from regimescan.stats import hedges_g, percent_delta, summarize


def hand_hedges(a, b):
    na, nb = len(a), len(b)
    ma, mb = sum(a) / na, sum(b) / nb
    va = sum((x - ma) ** 2 for x in a) / (na - 1)
    vb = sum((x - mb) ** 2 for x in b) / (nb - 1)
    sp = math.sqrt(((na - 1) * va + (nb - 1) * vb) / (na + nb - 2))
    return (1 - 3 / (4 * (na + nb) - 9)) * (mb - ma) / sp


def test_hedges_worked_example():
    # s_pooled = sqrt(1/3), J = 1 - 3/23
    g = hedges_g([0, 0, 1, 1], [1, 1, 2, 2])
    assert abs(g - (20.0 / 23.0) * math.sqrt(3.0)) <= 1e-12
    assert abs(g - hand_hedges([0, 0, 1, 1], [1, 1, 2, 2])) <= 1e-12


@pytest.mark.parametrize("a,b", [
    ([175.0, 160.0, 190.0, 181.0, 170.0], [139.0, 150.0, 120.0, 141.0, 147.0]),
    ([1.0, 2.0, 4.0], [3.0, 5.0, 5.5, 8.0]),
    ([0.1, 0.2], [0.3, 0.25]),
])
def test_hedges_matches_hand_oracle(a, b):
    assert abs(hedges_g(a, b) - hand_hedges(a, b)) <= 1e-12


def test_hedges_identical_samples():
    assert hedges_g([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]) == 0.0


def test_hedges_degenerate():
    with pytest.raises(ValueError, match="degenerate"):
        hedges_g([1.0, 1.0], [2.0, 2.0])
    with pytest.raises(ValueError):
        hedges_g([1.0], [2.0, 3.0])


def test_table_summary_stats_give_documented_freeze_value():
    # from reported means and SDs only; differs from the table's -0.93
    sd_a, sd_b, n = 41.8, 13.8, 5
    sp = math.sqrt(((n - 1) * sd_a**2 + (n - 1) * sd_b**2) / (2 * n - 2))
    g = (1 - 3 / (4 * 2 * n - 9)) * (139.4 - 175.2) / sp
    assert g == pytest.approx(-1.04, abs=0.01)


def test_percent_delta_table_values():
    assert abs(percent_delta(175.2, 139.4) - (-20.4)) <= 0.05
    assert abs(percent_delta(175.2, 264.2) - 50.8) <= 0.05
    assert percent_delta(3.5, 3.5) == 0.0
    with pytest.raises(ValueError):
        percent_delta(0.0, 1.0)


def test_summarize_examples():
    s = summarize([31.0])
    assert s.n == 1 and s.mean == 31.0 and s.sd is None
    s = summarize([1, 2, 3])
    assert s.mean == 2.0 and s.sd == 1.0
    with pytest.raises(ValueError):
        summarize([])


def test_summarize_two_pass_oracle():
    x = np.random.default_rng(0).normal(1e3, 5.0, 1000)
    mean = math.fsum(x) / x.size
    sd = math.sqrt(math.fsum((v - mean) ** 2 for v in x) / (x.size - 1))
    s = summarize(x)
    assert abs(s.mean - mean) <= 1e-12 * abs(mean)
    assert abs(s.sd - sd) <= 1e-12 * sd


samples = st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=2, max_size=8)


@settings(max_examples=200, deadline=None)
@given(a=samples, b=samples, shift=st.floats(-1e3, 1e3), scale=st.floats(0.01, 100.0))
def test_hedges_symmetries(a, b, shift, scale):
    try:
        g = hedges_g(a, b)
    except ValueError:
        return
    sa = summarize(a).sd
    sb = summarize(b).sd
    assume(max(sa, sb) > 1e-6 * max(1.0, max(map(abs, a + b))))
    assert hedges_g(b, a) == pytest.approx(-g, rel=1e-9, abs=1e-12)
    shifted = hedges_g([x + shift for x in a], [x + shift for x in b])
    assert shifted == pytest.approx(g, rel=1e-6, abs=1e-6)
    scaled = hedges_g([x * scale for x in a], [x * scale for x in b])
    assert scaled == pytest.approx(g, rel=1e-9, abs=1e-9)
    na, nb = len(a), len(b)
    sp = math.sqrt(((na - 1) * sa**2 + (nb - 1) * sb**2) / (na + nb - 2))
    d = (summarize(b).mean - summarize(a).mean) / sp
    assert abs(g) <= abs(d) + 1e-12
