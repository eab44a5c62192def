"""Random E/I topology with per-synapse conduction delays."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .params import ConfigError, NetworkParams, SynapseParams

# spawn keys of the per-seed child streams
CONNECT_STREAM = 0
DELAY_STREAM = 1
INIT_STREAM = 2
NOISE_STREAM = 3


@dataclass(frozen=True)
class DelaySpec:
    d_base: float = 6.25
    jitter_cv: float = 0.0

    def __post_init__(self):
        if self.d_base < 0:
            raise ConfigError("delay.d_base must be >= 0")
        if self.jitter_cv < 0:
            raise ConfigError("delay.jitter_cv must be >= 0")
        if self.jitter_cv > 0 and self.d_base == 0:
            raise ConfigError("delay jitter needs d_base > 0 (CV undefined at zero mean)")


@dataclass(frozen=True)
class Topology:
    """Edge list in (pre, post) row-major order.

    Neuron ids ``[0, n_exc)`` are excitatory and ``[n_exc, n_exc + n_inh)``
    inhibitory. ``weight`` holds magnitudes; the sign follows the
    presynaptic population.
    """

    n_exc: int
    n_inh: int
    p_connect: float
    dt: float
    pre: np.ndarray
    post: np.ndarray
    weight: np.ndarray
    delay: np.ndarray
    plastic: np.ndarray

    @property
    def n_neurons(self) -> int:
        return self.n_exc + self.n_inh

    @property
    def n_edges(self) -> int:
        return int(self.pre.size)

    @property
    def delay_steps(self) -> np.ndarray:
        return np.rint(self.delay / self.dt).astype(np.int64)

    @property
    def edges(self) -> list[tuple[int, int, float, float, bool]]:
        return [
            (int(i), int(j), float(w), float(d), bool(p))
            for i, j, w, d, p in zip(self.pre, self.post, self.weight, self.delay, self.plastic)
        ]

    def to_json(self) -> dict:
        return {
            "n_exc": self.n_exc,
            "n_inh": self.n_inh,
            "p_connect": self.p_connect,
            "dt": self.dt,
            "columns": ["pre", "post", "weight", "delay_ms", "plastic"],
            "edges": [list(e) for e in self.edges],
        }


def child_rng(seed: int, stream: int) -> np.random.Generator:
    """Independent Philox stream ``stream`` derived from a run seed."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(stream,))))


def quantize_delays(delays: np.ndarray, dt: float) -> np.ndarray:
    """Round delays to the nearest step, never below one step."""
    steps = np.maximum(np.rint(np.asarray(delays, dtype=float) / dt), 1.0)
    return steps * dt


def _draw_delays(rng: np.random.Generator, n: int, spec: DelaySpec, dt: float) -> np.ndarray:
    if spec.jitter_cv == 0:
        return np.full(n, spec.d_base)
    sd = spec.jitter_cv * spec.d_base
    out = rng.normal(spec.d_base, sd, size=n)
    # rejection sampling keeps the distribution a true truncated normal
    bad = out < dt
    while bad.any():
        out[bad] = rng.normal(spec.d_base, sd, size=int(bad.sum()))
        bad = out < dt
    return out


def build(
    net: NetworkParams,
    syn: SynapseParams,
    delay_spec: DelaySpec,
    seed: int,
    dt: float = 0.1,
) -> Topology:
    """Connect each ordered pair i != j independently with probability p.

    Connectivity and delays come from separate child streams of ``seed``, so
    two builds that differ only in ``delay_spec`` share the same edges.
    """
    if dt <= 0:
        raise ConfigError("dt must be > 0")
    n, n_exc = net.n_neurons, net.n_exc
    conn_rng = child_rng(seed, CONNECT_STREAM)
    delay_rng = child_rng(seed, DELAY_STREAM)

    mask = conn_rng.random((n, n)) < net.p_connect
    np.fill_diagonal(mask, False)
    pre, post = np.nonzero(mask)
    pre = pre.astype(np.int32)
    post = post.astype(np.int32)

    exc_pre = pre < n_exc
    exc_post = post < n_exc
    weight = np.where(
        exc_pre,
        np.where(exc_post, syn.w_ee, syn.w_ei),
        np.where(exc_post, syn.w_ie, syn.w_ii),
    ).astype(float)
    delay = quantize_delays(_draw_delays(delay_rng, pre.size, delay_spec, dt), dt)

    return Topology(
        n_exc=n_exc,
        n_inh=net.n_inh,
        p_connect=net.p_connect,
        dt=dt,
        pre=pre,
        post=post,
        weight=weight,
        delay=delay,
        plastic=exc_pre & exc_post,
    )


def empirical_delay_cv(topology: Topology) -> float:
    """Coefficient of variation of edge delays (population SD over mean)."""
    if topology.n_edges < 2:
        raise ValueError("need at least two edges")
    d = topology.delay
    # shifting by one sample makes identical delays give exactly 0
    return float(np.std(d - d[0]) / np.mean(d))
