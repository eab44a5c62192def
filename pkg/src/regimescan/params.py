"""Parameter containers shared by the simulator, builder and analysis code.

All times are in ms, potentials in mV. Synaptic currents share the units of
the membrane potential (the LIF equation is written with unit resistance).
"""

from __future__ import annotations

from dataclasses import dataclass, field


class ConfigError(ValueError):
    """Raised for invalid or inconsistent parameter values."""


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ConfigError(msg)


@dataclass(frozen=True)
class NeuronParams:
    tau_m: float = 20.0
    v_rest: float = -65.0
    v_threshold: float = -50.0
    v_reset: float = -65.0
    t_refractory: float = 2.0

    def __post_init__(self):
        _require(self.tau_m > 0, "neuron.tau_m must be > 0")
        _require(self.v_reset < self.v_threshold, "neuron.v_reset must be below neuron.v_threshold")
        _require(self.t_refractory >= 0, "neuron.t_refractory must be >= 0")


@dataclass(frozen=True)
class SynapseParams:
    """Exponential current synapses.

    Weights are magnitudes named ``w_<pre><post>``: ``w_ei`` is E->I and
    ``w_ie`` is I->E. Inhibitory weights enter the postsynaptic current with
    a negative sign at delivery. ``w_max_ee`` bounds the plastic E->E weights;
    ``None`` means twice the initial ``w_ee``.
    """

    tau_s: float = 5.0
    w_ee: float = 0.4619
    w_ei: float = 6.8372
    w_ie: float = 8.8485
    w_ii: float = 13.3524
    w_max_ee: float | None = None

    def __post_init__(self):
        _require(self.tau_s > 0, "synapse.tau_s must be > 0")
        for name in ("w_ee", "w_ei", "w_ie", "w_ii"):
            _require(getattr(self, name) >= 0, f"synapse.{name} must be >= 0")
        _require(self.w_ee <= self.ee_bound, "synapse.w_ee must not exceed synapse.w_max_ee")

    @property
    def ee_bound(self) -> float:
        return 2.0 * self.w_ee if self.w_max_ee is None else self.w_max_ee


@dataclass(frozen=True)
class StdpParams:
    lambda_p: float = 0.0
    a_plus: float = 1.0
    a_minus: float = 1.05
    tau_plus: float = 20.0
    tau_minus: float = 20.0

    def __post_init__(self):
        _require(self.lambda_p >= 0, "stdp.lambda_p must be >= 0")
        _require(self.a_plus > 0 and self.a_minus > 0, "stdp amplitudes must be > 0")
        _require(self.tau_plus > 0 and self.tau_minus > 0, "stdp time constants must be > 0")


@dataclass(frozen=True)
class DriveParams:
    """External input: constant ``i_dc`` plus white noise.

    The noise enters the current balance as ``sigma_noise * xi(t)`` with
    ``xi`` unit white noise, so each step adds
    ``sigma_noise * sqrt(dt) / tau_m * N(0, 1)`` to the membrane potential.
    """

    i_dc: float = 21.8542
    sigma_noise: float = 3.127

    def __post_init__(self):
        _require(self.sigma_noise >= 0, "drive.sigma_noise must be >= 0")


@dataclass(frozen=True)
class NetworkParams:
    n_exc: int = 160
    n_inh: int = 40
    p_connect: float = 0.1

    def __post_init__(self):
        _require(self.n_exc >= 0 and self.n_inh >= 0, "population sizes must be >= 0")
        _require(self.n_exc + self.n_inh > 0, "network must contain at least one neuron")
        _require(0.0 <= self.p_connect <= 1.0, "network.p_connect must lie in [0, 1]")

    @property
    def n_neurons(self) -> int:
        return self.n_exc + self.n_inh


@dataclass(frozen=True)
class AnalysisParams:
    bin_ms: float = 1.0
    kernel_sigma_ms: float = 5.0
    welch_segment_ms: float = 1000.0
    welch_overlap: float = 0.5
    prom_band: tuple[float, float] = (5.0, 100.0)
    f0_band: tuple[float, float] = (8.0, 70.0)

    def __post_init__(self):
        _require(self.bin_ms > 0, "analysis.bin_ms must be > 0")
        _require(self.kernel_sigma_ms >= 0, "analysis.kernel_sigma_ms must be >= 0")
        _require(self.welch_segment_ms > 0, "analysis.welch_segment_ms must be > 0")
        _require(0.0 <= self.welch_overlap < 1.0, "analysis.welch_overlap must lie in [0, 1)")
        for name in ("prom_band", "f0_band"):
            lo, hi = getattr(self, name)
            _require(0 <= lo < hi, f"analysis.{name} must be an increasing pair")


@dataclass(frozen=True)
class Thresholds:
    rate_sil: float = 1.0
    prom_osc: float = 40.0


@dataclass(frozen=True)
class HopfParams:
    gain_ref: float = 4.5
    omega_max: float | None = None

    def __post_init__(self):
        _require(self.gain_ref > 0, "hopf.gain_ref must be > 0")


def _default_tau_s() -> tuple[float, ...]:
    return tuple(5.0 + 2.5 * k for k in range(11))


def _default_d() -> tuple[float, ...]:
    return tuple(1.25 * k for k in range(9))


@dataclass(frozen=True)
class SweepGrid:
    tau_s: tuple[float, ...] = field(default_factory=_default_tau_s)
    d: tuple[float, ...] = field(default_factory=_default_d)
    lambda_p: tuple[float, ...] = (0.0, 5e-4, 2e-3)
    n_seeds: int = 5
    master_seed: int = 20240601

    def __post_init__(self):
        for name in ("tau_s", "d", "lambda_p"):
            vals = getattr(self, name)
            _require(len(vals) > 0, f"grid.{name} must be nonempty")
            _require(
                all(b > a for a, b in zip(vals, vals[1:])),
                f"grid.{name} must be strictly increasing",
            )
        _require(self.n_seeds >= 1, "grid.n_seeds must be >= 1")
        _require(self.master_seed >= 0, "grid.master_seed must be >= 0")

    def points(self) -> list[tuple[float, float, float]]:
        """Grid points ordered lambda_p-major, then tau_s, then d."""
        return [(ts, d, lp) for lp in self.lambda_p for ts in self.tau_s for d in self.d]
