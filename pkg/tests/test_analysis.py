import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from regimescan.analysis import (
    RateTrace,
    Regime,
    SpectralSummary,
    analyze,
    binned_counts,
    classify,
    dominant_frequency,
    population_rate,
    prominence,
    smooth,
    spectral_summary,
    welch_psd,
)
from regimescan.dynamics import SpikeRecord
from regimescan.params import AnalysisParams, Thresholds

FS = 1000.0


def record(times, ids, n=200, duration=8000.0):
    times = np.asarray(times, dtype=float)
    ids = np.asarray(ids, dtype=np.int64)
    order = np.lexsort((ids, times))
    return SpikeRecord(times[order], ids[order], n, duration)


def trace_of(values):
    return RateTrace(1.0, np.asarray(values, dtype=float), 500.0)


def test_empty_record_gives_zero_trace():
    tr = population_rate(SpikeRecord.empty(200, 8000.0), 200, 8000.0, 500.0)
    assert tr.values.size == 7500
    assert np.all(tr.values == 0.0)


def test_single_spike_integrates_to_one_over_n():
    tr = population_rate(record([4000.3], [7]), 200, 8000.0, 500.0)
    total = tr.values.sum() * tr.bin_ms * 1e-3
    assert abs(total - 1.0 / 200) <= 1e-9 / 200


def test_poisson_rate_recovered():
    rng = np.random.default_rng(0)
    n, rate = 200, 30.0
    counts = rng.poisson(rate * 8.0, size=n)
    times, ids = [], []
    for i, c in enumerate(counts):
        times.append(np.round(rng.uniform(0, 8000.0, c), 1))
        ids.append(np.full(c, i))
    tr = population_rate(record(np.concatenate(times), np.concatenate(ids)), n, 8000.0, 500.0)
    assert abs(tr.values.mean() - rate) <= 1.0


def test_smoothing_conserves_mass():
    rng = np.random.default_rng(3)
    raw = np.zeros(7500)
    raw[100:7400] = rng.poisson(2.0, 7300)
    out = smooth(raw, 5.0)
    assert abs(out.sum() - raw.sum()) <= 1e-9 * raw.sum()


def test_reflect_padding_conserves_mass_at_edges():
    raw = np.zeros(200)
    raw[0] = raw[-1] = 3.0
    assert abs(smooth(raw, 5.0).sum() - 6.0) <= 1e-9 * 6.0


def test_binning_half_open_interval():
    c = binned_counts(record([499.9, 500.0, 500.9, 501.0, 7999.9, 8000.0], [0] * 6), 8000.0, 500.0, 1.0)
    assert c.size == 7500
    assert c[0] == 2 and c[1] == 1 and c[-1] == 1 and c.sum() == 4


def test_constant_trace_has_no_power():
    f, p = welch_psd(trace_of(np.full(7500, 25.0)))
    assert np.all(p[f > 0] <= 1e-10 * 25.0**2)


@pytest.mark.parametrize("freq", [10.0, 25.0, 40.0, 60.0])
def test_tone_recovered(freq):
    t = np.arange(7500) / FS
    rng = np.random.default_rng(int(freq))
    x = 20.0 + 5.0 * np.sin(2 * np.pi * freq * t + 0.3) + rng.normal(0, 1.0, t.size)
    f, p = welch_psd(trace_of(x))
    assert f[1] - f[0] == pytest.approx(1.0)
    assert abs(f[np.argmax(p)] - freq) <= 1.0
    s = spectral_summary(f, p, 1, 1, 7500.0)
    assert abs(s.f0 - freq) <= 1.0


def test_tone_with_flat_floor_f0():
    f = np.arange(0.0, 501.0)
    p = np.ones_like(f)
    p[40] = 50.0
    assert dominant_frequency(f, p) == 40.0
    assert prominence(f, p) == pytest.approx(50.0)


def test_white_noise_flat():
    rng = np.random.default_rng(1)
    f, p = welch_psd(trace_of(rng.normal(0, 1, 60000)))
    band = (f >= 5) & (f <= 100)
    assert abs(np.median(p[band]) / np.mean(p[band]) - 1.0) <= 0.25


def test_welch_rejects_short_trace():
    with pytest.raises(ValueError, match="shorter"):
        welch_psd(trace_of(np.ones(999)))


def test_all_zero_psd_is_silent():
    f = np.arange(0.0, 501.0)
    s = spectral_summary(f, np.zeros_like(f), 0, 200, 7500.0)
    assert s.prominence == 0.0 and s.f0 is None and s.mean_rate == 0.0


def test_spectral_summary_requires_band_coverage():
    with pytest.raises(ValueError):
        spectral_summary(np.arange(0.0, 50.0), np.ones(50), 1, 1, 1.0)


def test_f0_requires_local_maximum():
    f = np.arange(0.0, 101.0)
    p = np.linspace(10.0, 1.0, f.size)  # argmax sits on the band edge, 8 Hz < 7 Hz neighbour
    assert dominant_frequency(f, p) is None
    p2 = p.copy()
    p2[30] = 20.0
    assert dominant_frequency(f, p2) == 30.0


def test_f0_tie_goes_low():
    f = np.arange(0.0, 101.0)
    p = np.ones_like(f)
    p[20] = p[45] = 5.0
    assert dominant_frequency(f, p) == 20.0


def test_prominence_median_includes_peak_even_count():
    f = np.arange(5.0, 9.0)  # 4 bins -> median of the middle pair
    p = np.array([1.0, 2.0, 4.0, 8.0])
    assert prominence(f, p, (5.0, 8.0)) == pytest.approx(8.0 / 3.0)


@settings(max_examples=50, deadline=None)
@given(scale=st.floats(1e-6, 1e6), seed=st.integers(0, 1000))
def test_scale_invariance(scale, seed):
    rng = np.random.default_rng(seed)
    f = np.arange(0.0, 501.0)
    p = rng.gamma(2.0, 1.0, f.size)
    p[33] += 30.0
    a = spectral_summary(f, p, 10, 10, 1.0)
    b = spectral_summary(f, scale * p, 10, 10, 1.0)
    assert b.f0 == a.f0
    assert b.prominence == pytest.approx(a.prominence, rel=1e-12)


def summary(rate, prom, f0):
    return SpectralSummary(np.zeros(0), np.zeros(0), f0, prom, rate)


def test_classify_examples():
    assert classify(summary(0.0, 0.0, None)) == Regime.SIL
    for th in (1.0, 10.0, 100.0, 175.0):
        assert classify(summary(31.0, 175.2, 37.1), Thresholds(prom_osc=th)) == Regime.OSC
    assert classify(summary(10.0, 2.0, None)) == Regime.AI
    assert classify(summary(10.0, 50.0, None)) == Regime.AI


@settings(max_examples=100, deadline=None)
@given(rate=st.floats(0, 100), p1=st.floats(0, 500), p2=st.floats(0, 500),
       f0=st.one_of(st.none(), st.floats(8, 70)))
def test_classification_monotone_in_prominence(rate, p1, p2, f0):
    lo, hi = sorted((p1, p2))
    if classify(summary(rate, lo, f0)) == Regime.OSC:
        assert classify(summary(rate, hi, f0)) == Regime.OSC


def test_analyze_rate_and_length():
    rng = np.random.default_rng(5)
    times = np.round(rng.uniform(0, 8000.0, 48000), 1)
    ids = rng.integers(0, 200, times.size)
    tr, s = analyze(record(times, ids), 500.0, AnalysisParams())
    assert tr.values.size == 7500 and tr.t_start == 500.0
    n_in = int(np.sum(times >= 500.0))
    assert s.mean_rate == pytest.approx(n_in / (200 * 7.5))
    assert np.all(tr.values >= 0.0)
