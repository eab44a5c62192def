"""Clock-driven LIF network with exponential current synapses and E->E STDP.

One step from ``t`` to ``t + dt`` does, in order:

1. exact propagation of (v, i_syn) over ``dt`` (refractory neurons are held
   at ``v_reset``), plus the per-step noise increment on ``v``;
2. delivery of the delayed increments stored in the current ring slot;
3. threshold test, reset and refractoriness;
4. STDP: trace decay, depression on presynaptic spikes, potentiation on
   postsynaptic spikes (same-step pairs count as potentiation);
5. scheduling of each new spike's increments ``round(d / dt)`` steps ahead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .network import INIT_STREAM, NOISE_STREAM, Topology, build, child_rng
from .params import ConfigError, DriveParams, NeuronParams, StdpParams, SynapseParams

CHUNK_STEPS = 2000


class SimulationError(RuntimeError):
    """State went non-finite; usually a sign of runaway excitation."""


@njit(cache=True)
def _depress(w, x_post, scale, w_max):
    w = w - scale * x_post
    if w < 0.0:
        return 0.0
    if w > w_max:
        return w_max
    return w


@njit(cache=True)
def _potentiate(w, x_pre, scale, w_max):
    w = w + scale * x_pre
    if w < 0.0:
        return 0.0
    if w > w_max:
        return w_max
    return w


def apply_stdp_on_pre(w: float, x_post: float, stdp: StdpParams, w_max: float) -> float:
    """Depression when the presynaptic neuron fires, paired with all earlier post spikes."""
    return _depress(w, x_post, stdp.lambda_p * stdp.a_minus, w_max)


def apply_stdp_on_post(w: float, x_pre: float, stdp: StdpParams, w_max: float) -> float:
    """Potentiation when the postsynaptic neuron fires, paired with all earlier pre spikes."""
    return _potentiate(w, x_pre, stdp.lambda_p * stdp.a_plus, w_max)


@njit(cache=True)
def _stdp_tick(spk, n_spk, x_pre, x_post, w, out_ptr, out_post, plastic,
               in_ptr, in_edge, edge_pre, n_exc, dec_plus, dec_minus,
               scale_minus, scale_plus, w_max):
    for i in range(n_exc):
        x_pre[i] *= dec_plus
        x_post[i] *= dec_minus
    for a in range(n_spk):
        j = spk[a]
        if j >= n_exc:
            break
        for e in range(out_ptr[j], out_ptr[j + 1]):
            if plastic[e]:
                w[e] = _depress(w[e], x_post[out_post[e]], scale_minus, w_max)
    for a in range(n_spk):
        j = spk[a]
        if j >= n_exc:
            break
        x_pre[j] += 1.0
    for a in range(n_spk):
        i = spk[a]
        if i >= n_exc:
            break
        for k in range(in_ptr[i], in_ptr[i + 1]):
            e = in_edge[k]
            w[e] = _potentiate(w[e], x_pre[edge_pre[e]], scale_plus, w_max)
    for a in range(n_spk):
        i = spk[a]
        if i >= n_exc:
            break
        x_post[i] += 1.0


@njit(cache=True)
def _advance(n_steps, step0, dt, v, i_syn, refrac_until, x_pre, x_post, ring, w,
             out_ptr, out_post, out_delay, pre_sign, plastic, in_ptr, in_edge, edge_pre,
             n_exc, noise, noise_scale, v_inf, v_reset, v_th, t_ref, prop_v, prop_s, prop_vs,
             plastic_on, dec_plus, dec_minus, scale_minus, scale_plus, w_max,
             spk_step, spk_id):
    n = v.size
    cap = ring.shape[0]
    spk = np.empty(n, np.int64)
    total = 0
    for off in range(n_steps):
        s = step0 + off + 1
        t = s * dt
        slot = s % cap
        n_spk = 0
        for i in range(n):
            refractory = t < refrac_until[i] + 0.5 * dt
            if refractory:
                v[i] = v_reset
            else:
                vi = v_inf + (v[i] - v_inf) * prop_v + i_syn[i] * prop_vs
                if noise_scale != 0.0:
                    vi += noise_scale * noise[off, i]
                v[i] = vi
            i_syn[i] = i_syn[i] * prop_s + ring[slot, i]
            ring[slot, i] = 0.0
            if not (math.isfinite(v[i]) and math.isfinite(i_syn[i])):
                return total, s
            if not refractory and v[i] >= v_th:
                v[i] = v_reset
                refrac_until[i] = t + t_ref
                spk[n_spk] = i
                n_spk += 1
        if n_spk == 0:
            if plastic_on:
                for i in range(n_exc):
                    x_pre[i] *= dec_plus
                    x_post[i] *= dec_minus
            continue
        if plastic_on:
            _stdp_tick(spk, n_spk, x_pre, x_post, w, out_ptr, out_post, plastic,
                       in_ptr, in_edge, edge_pre, n_exc, dec_plus, dec_minus,
                       scale_minus, scale_plus, w_max)
        for a in range(n_spk):
            j = spk[a]
            sign = pre_sign[j]
            for e in range(out_ptr[j], out_ptr[j + 1]):
                ring[(s + out_delay[e]) % cap, out_post[e]] += sign * w[e]
            spk_step[total] = s
            spk_id[total] = j
            total += 1
    return total, -1


def membrane_coupling(dt: float, tau_m: float, tau_s: float) -> float:
    """Voltage response after ``dt`` to a unit synaptic current at the step start.

    Equals ``tau_s / (tau_s - tau_m) * (exp(-dt/tau_s) - exp(-dt/tau_m))``,
    written so that ``tau_s == tau_m`` is handled without cancellation.
    """
    delta = 1.0 / tau_m - 1.0 / tau_s
    x = dt * delta
    ratio = math.expm1(x) / x if x != 0.0 else 1.0
    return dt / tau_m * math.exp(-dt / tau_m) * ratio


@dataclass
class SynapticNetwork:
    """Topology compiled to CSR form for the kernel; ``weights`` is mutated by STDP."""

    topology: Topology
    weights: np.ndarray
    w_max: float
    out_ptr: np.ndarray
    out_post: np.ndarray
    out_delay: np.ndarray
    pre_sign: np.ndarray
    plastic: np.ndarray
    in_ptr: np.ndarray
    in_edge: np.ndarray
    edge_pre: np.ndarray

    @classmethod
    def from_topology(cls, topology: Topology, w_max: float) -> SynapticNetwork:
        n = topology.n_neurons
        pre = topology.pre.astype(np.int64)
        post = topology.post.astype(np.int64)
        # builder emits edges sorted by pre, so out-edges are contiguous
        if pre.size and np.any(np.diff(pre) < 0):
            raise ValueError("topology edges must be sorted by presynaptic id")
        out_ptr = np.zeros(n + 1, np.int64)
        np.cumsum(np.bincount(pre, minlength=n), out=out_ptr[1:])
        plastic_ids = np.flatnonzero(topology.plastic)
        order = np.argsort(post[plastic_ids], kind="stable")
        in_edge = plastic_ids[order].astype(np.int64)
        in_ptr = np.zeros(n + 1, np.int64)
        np.cumsum(np.bincount(post[plastic_ids], minlength=n), out=in_ptr[1:])
        pre_sign = np.where(np.arange(n) < topology.n_exc, 1.0, -1.0)
        return cls(
            topology=topology,
            weights=topology.weight.astype(np.float64).copy(),
            w_max=float(w_max),
            out_ptr=out_ptr,
            out_post=post,
            out_delay=topology.delay_steps,
            pre_sign=pre_sign,
            plastic=topology.plastic.astype(np.bool_),
            in_ptr=in_ptr,
            in_edge=in_edge,
            edge_pre=pre,
        )

    @property
    def n_neurons(self) -> int:
        return self.topology.n_neurons

    @property
    def max_delay_steps(self) -> int:
        return int(self.out_delay.max()) if self.out_delay.size else 1


@dataclass
class DelayBuffer:
    """Ring of pending current increments, one row per future step."""

    slots: np.ndarray

    @classmethod
    def for_network(cls, net: SynapticNetwork) -> DelayBuffer:
        return cls(np.zeros((net.max_delay_steps + 1, net.n_neurons)))

    @property
    def capacity(self) -> int:
        return self.slots.shape[0]


@dataclass
class NetworkState:
    v: np.ndarray
    i_syn: np.ndarray
    refrac_until: np.ndarray
    x_pre: np.ndarray
    x_post: np.ndarray
    buffer: DelayBuffer
    step_index: int = 0
    dt: float = 0.1

    @property
    def t_now(self) -> float:
        return self.step_index * self.dt

    @classmethod
    def initial(cls, net: SynapticNetwork, neuron: NeuronParams, dt: float,
                v0: np.ndarray | None = None) -> NetworkState:
        n = net.n_neurons
        v = np.full(n, neuron.v_rest) if v0 is None else np.array(v0, dtype=float)
        return cls(
            v=v,
            i_syn=np.zeros(n),
            refrac_until=np.full(n, -np.inf),
            x_pre=np.zeros(n),
            x_post=np.zeros(n),
            buffer=DelayBuffer.for_network(net),
            dt=dt,
        )


@dataclass(frozen=True)
class Dynamics:
    """Parameter bundle for the stepping kernel."""

    neuron: NeuronParams
    synapse: SynapseParams
    stdp: StdpParams
    drive: DriveParams


@dataclass
class SpikeRecord:
    """Spikes sorted by (time, neuron id); times are step index * dt."""

    times: np.ndarray
    ids: np.ndarray
    n_neurons: int
    duration: float
    steps: np.ndarray = field(default_factory=lambda: np.zeros(0, np.int64))

    def __len__(self) -> int:
        return int(self.ids.size)

    @classmethod
    def empty(cls, n_neurons: int, duration: float) -> SpikeRecord:
        return cls(np.zeros(0), np.zeros(0, np.int64), n_neurons, duration)


def _check_dt(dt: float, neuron: NeuronParams, synapse: SynapseParams) -> None:
    if dt <= 0:
        raise ConfigError("dt must be > 0")
    if dt > min(neuron.tau_m, synapse.tau_s) / 10 * (1 + 1e-12):
        raise ConfigError("dt must not exceed min(tau_m, tau_s) / 10")


def _advance_state(state: NetworkState, net: SynapticNetwork, dyn: Dynamics,
                   n_steps: int, noise: np.ndarray | None,
                   spk_step: np.ndarray, spk_id: np.ndarray) -> int:
    neuron, drive, stdp = dyn.neuron, dyn.drive, dyn.stdp
    dt = state.dt
    noise_scale = drive.sigma_noise * math.sqrt(dt) / neuron.tau_m
    if noise is None:
        noise = np.zeros((1, net.n_neurons))
        noise_scale = 0.0
    plastic_on = stdp.lambda_p > 0.0 and net.in_edge.size > 0
    total, bad = _advance(
        n_steps, state.step_index, dt, state.v, state.i_syn, state.refrac_until,
        state.x_pre, state.x_post, state.buffer.slots, net.weights,
        net.out_ptr, net.out_post, net.out_delay, net.pre_sign, net.plastic,
        net.in_ptr, net.in_edge, net.edge_pre, net.topology.n_exc,
        noise, noise_scale, neuron.v_rest + drive.i_dc, neuron.v_reset,
        neuron.v_threshold, neuron.t_refractory,
        math.exp(-dt / neuron.tau_m), math.exp(-dt / dyn.synapse.tau_s),
        membrane_coupling(dt, neuron.tau_m, dyn.synapse.tau_s),
        plastic_on, math.exp(-dt / stdp.tau_plus), math.exp(-dt / stdp.tau_minus),
        stdp.lambda_p * stdp.a_minus, stdp.lambda_p * stdp.a_plus, net.w_max,
        spk_step, spk_id,
    )
    if bad >= 0:
        raise SimulationError(
            f"non-finite state at t = {bad * dt:.3f} ms; parameters likely produce runaway activity"
        )
    state.step_index += n_steps
    return total


def step(state: NetworkState, net: SynapticNetwork, dyn: Dynamics,
         rng: np.random.Generator | None = None) -> np.ndarray:
    """Advance ``state`` (and plastic weights in ``net``) in place by one step.

    Draws one standard normal per neuron from ``rng`` when noise is on, in the
    same order ``run`` consumes its noise stream. Returns the ids that spiked
    at the new ``state.t_now``.
    """
    _check_dt(state.dt, dyn.neuron, dyn.synapse)
    n = net.n_neurons
    noise = None
    if dyn.drive.sigma_noise > 0:
        if rng is None:
            raise ValueError("noise is enabled but no rng was given")
        noise = rng.standard_normal((1, n))
    spk_step = np.empty(n, np.int64)
    spk_id = np.empty(n, np.int64)
    count = _advance_state(state, net, dyn, 1, noise, spk_step, spk_id)
    return spk_id[:count].copy()


@dataclass
class RunResult:
    spikes: SpikeRecord
    initial_weights: np.ndarray
    final_weights: np.ndarray
    topology: Topology
    w_max: float = np.inf

    def weight_summary(self) -> dict[str, float]:
        mask = self.topology.plastic
        w0, w1 = self.initial_weights[mask], self.final_weights[mask]
        if w0.size == 0:
            return {"n_plastic": 0}
        return {
            "n_plastic": int(w0.size),
            "mean_initial": float(w0.mean()),
            "mean_final": float(w1.mean()),
            "mean_abs_change": float(np.abs(w1 - w0).mean()),
            "frac_at_zero": float(np.mean(w1 == 0.0)),
            "frac_at_max": float(np.mean(w1 >= self.w_max)),
        }


def simulate(topology: Topology, dyn: Dynamics, duration: float, seed: int,
             dt: float) -> RunResult:
    """Run a prebuilt topology from its seeded initial state for ``duration`` ms."""
    _check_dt(dt, dyn.neuron, dyn.synapse)
    neuron = dyn.neuron
    w_max = dyn.synapse.ee_bound
    net = SynapticNetwork.from_topology(topology, w_max)
    n = net.n_neurons
    init_rng = child_rng(seed, INIT_STREAM)
    v0 = init_rng.uniform(neuron.v_reset, neuron.v_threshold, size=n)
    state = NetworkState.initial(net, neuron, dt, v0=v0)
    noise_rng = child_rng(seed, NOISE_STREAM) if dyn.drive.sigma_noise > 0 else None

    n_total = int(round(duration / dt))
    chunk = min(CHUNK_STEPS, max(n_total, 1))
    spk_step = np.empty(chunk * n, np.int64)
    spk_id = np.empty(chunk * n, np.int64)
    steps_out, ids_out = [], []
    done = 0
    while done < n_total:
        k = min(chunk, n_total - done)
        noise = noise_rng.standard_normal((k, n)) if noise_rng is not None else None
        count = _advance_state(state, net, dyn, k, noise, spk_step, spk_id)
        steps_out.append(spk_step[:count].copy())
        ids_out.append(spk_id[:count].copy())
        done += k

    steps = np.concatenate(steps_out) if steps_out else np.zeros(0, np.int64)
    ids = np.concatenate(ids_out) if ids_out else np.zeros(0, np.int64)
    record = SpikeRecord(steps * dt, ids, n, duration, steps)
    return RunResult(record, topology.weight.copy(), net.weights.copy(), topology, w_max)


def run(config, seed: int) -> RunResult:
    """Build the network for ``seed`` and simulate ``config.duration`` ms."""
    topology = build(config.network, config.synapse, config.delay, seed, config.dt)
    dyn = Dynamics(config.neuron, config.synapse, config.stdp, config.drive)
    return simulate(topology, dyn, config.duration, seed, config.dt)
