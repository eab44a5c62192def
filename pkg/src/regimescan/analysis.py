"""Population rate, Welch spectrum, prominence/f0 and regime labels."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter1d
from scipy.signal import welch

from .dynamics import SpikeRecord
from .params import AnalysisParams, Thresholds

KERNEL_TRUNCATE = 4.0


class Regime(enum.IntEnum):
    SIL = 0
    AI = 1
    OSC = 2


@dataclass(frozen=True)
class RateTrace:
    bin_ms: float
    values: np.ndarray
    t_start: float

    @property
    def times(self) -> np.ndarray:
        return self.t_start + self.bin_ms * np.arange(self.values.size)

    @property
    def fs(self) -> float:
        return 1000.0 / self.bin_ms


@dataclass(frozen=True)
class SpectralSummary:
    freqs: np.ndarray
    psd: np.ndarray
    f0: float | None
    prominence: float
    mean_rate: float


def binned_counts(spikes: SpikeRecord, duration: float, burn_in: float, bin_ms: float) -> np.ndarray:
    n_bins = int(np.floor((duration - burn_in) / bin_ms + 1e-9))
    t = np.asarray(spikes.times)
    # spike times are multiples of dt, so nudge against float round-down
    idx = np.floor((t - burn_in) / bin_ms + 1e-9).astype(np.int64)
    idx = idx[(t >= burn_in - 1e-9) & (idx >= 0) & (idx < n_bins)]
    return np.bincount(idx, minlength=n_bins).astype(float)


def smooth(values: np.ndarray, sigma_bins: float) -> np.ndarray:
    """Unit-mass Gaussian, support +-4 sigma, reflected edges."""
    if sigma_bins == 0:
        return np.asarray(values, dtype=float).copy()
    return gaussian_filter1d(np.asarray(values, dtype=float), sigma_bins,
                             mode="reflect", truncate=KERNEL_TRUNCATE)


def population_rate(spikes: SpikeRecord, n_neurons: int, duration: float, burn_in: float,
                    bin_ms: float = 1.0, kernel_sigma: float = 5.0) -> RateTrace:
    """Smoothed population rate in Hz per neuron over ``[burn_in, duration)``."""
    if not duration > burn_in:
        raise ValueError("duration must exceed burn_in")
    counts = binned_counts(spikes, duration, burn_in, bin_ms)
    rate = counts / (n_neurons * bin_ms * 1e-3)
    values = np.clip(smooth(rate, kernel_sigma / bin_ms), 0.0, None)
    return RateTrace(bin_ms, values, burn_in)


def welch_psd(trace: RateTrace, segment_ms: float = 1000.0,
              overlap: float = 0.5) -> tuple[np.ndarray, np.ndarray]:
    """One-sided Hann-window Welch density with per-segment mean removal."""
    nperseg = int(round(segment_ms / trace.bin_ms))
    if trace.values.size < nperseg:
        raise ValueError(
            f"rate trace of {trace.values.size} samples is shorter than one "
            f"{nperseg}-sample Welch segment"
        )
    freqs, psd = welch(trace.values, fs=trace.fs, window="hann", nperseg=nperseg,
                       noverlap=int(round(overlap * nperseg)), detrend="constant",
                       scaling="density", average="mean")
    return freqs, np.clip(psd, 0.0, None)


def _band(freqs: np.ndarray, band: tuple[float, float]) -> np.ndarray:
    lo, hi = band
    eps = 1e-9 * max(1.0, hi)
    return np.flatnonzero((freqs >= lo - eps) & (freqs <= hi + eps))


def dominant_frequency(freqs: np.ndarray, psd: np.ndarray,
                       band: tuple[float, float] = (8.0, 70.0)) -> float | None:
    """Argmax frequency inside ``band`` if it is a local maximum, else None.

    Ties go to the lower frequency (``np.argmax`` returns the first hit).
    """
    idx = _band(freqs, band)
    if idx.size == 0:
        return None
    k = int(idx[np.argmax(psd[idx])])
    if psd[k] <= 0:
        return None
    left = psd[k - 1] if k > 0 else -np.inf
    right = psd[k + 1] if k + 1 < psd.size else -np.inf
    if psd[k] >= left and psd[k] >= right:
        return float(freqs[k])
    return None


def prominence(freqs: np.ndarray, psd: np.ndarray,
               band: tuple[float, float] = (5.0, 100.0)) -> float:
    """Peak-to-median PSD ratio over ``band``; 0 when the median vanishes."""
    idx = _band(freqs, band)
    if idx.size == 0:
        raise ValueError(f"frequency grid does not cover {band}")
    vals = psd[idx]
    med = float(np.median(vals))
    if med <= 0:
        return 0.0
    return float(vals.max() / med)


def spectral_summary(freqs: np.ndarray, psd: np.ndarray, n_spikes: int, n_neurons: int,
                     analyzed_ms: float, params: AnalysisParams | None = None) -> SpectralSummary:
    params = params or AnalysisParams()
    lo, hi = params.prom_band
    if freqs[0] > lo + 1e-9 or freqs[-1] < hi - 1e-9:
        raise ValueError(f"frequency grid does not cover [{lo}, {hi}] Hz")
    prom = prominence(freqs, psd, params.prom_band)
    f0 = dominant_frequency(freqs, psd, params.f0_band) if prom > 0 else None
    rate = n_spikes / (n_neurons * analyzed_ms * 1e-3)
    return SpectralSummary(freqs, psd, f0, prom, rate)


def classify(summary: SpectralSummary, thresholds: Thresholds | None = None) -> Regime:
    th = thresholds or Thresholds()
    if summary.mean_rate < th.rate_sil:
        return Regime.SIL
    if summary.prominence >= th.prom_osc and summary.f0 is not None:
        return Regime.OSC
    return Regime.AI


def analyze(spikes: SpikeRecord, burn_in: float,
            params: AnalysisParams | None = None) -> tuple[RateTrace, SpectralSummary]:
    """Full pipeline from a spike record to the smoothed trace and its summary."""
    params = params or AnalysisParams()
    trace = population_rate(spikes, spikes.n_neurons, spikes.duration, burn_in,
                            params.bin_ms, params.kernel_sigma_ms)
    freqs, psd = welch_psd(trace, params.welch_segment_ms, params.welch_overlap)
    analyzed = trace.values.size * trace.bin_ms
    n_spikes = int(binned_counts(spikes, spikes.duration, burn_in, params.bin_ms).sum())
    return trace, spectral_summary(freqs, psd, n_spikes, spikes.n_neurons, analyzed, params)
