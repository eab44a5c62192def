"""Grid sweeps over (tau_s, d, lambda_p) x seeds and the control protocol."""

from __future__ import annotations

import os
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .analysis import Regime, analyze, classify
from .config import SimConfig
from .dynamics import RunResult, SimulationError, run
from .params import SweepGrid
from .stats import SampleSummary, hedges_g, percent_delta, summarize

THREADS_ENV = "REGIMESCAN_THREADS"
CONTROL_POINT = 2**32 - 1
SEED_DERIVATION = "SeedSequence(master, spawn_key=(point_idx, seed_idx)).generate_state(1, uint64)"
CONDITIONS = ("Baseline", "Freeze", "Jitter")


def derive_seed(master: int, point_idx: int, seed_idx: int) -> int:
    """64-bit run seed from hash mixing of (master, point, seed) indices."""
    ss = np.random.SeedSequence(master, spawn_key=(point_idx, seed_idx))
    return int(ss.generate_state(1, np.uint64)[0])


def worker_count(requested: int | None = None) -> int:
    n = requested if requested is not None else (os.cpu_count() or 1)
    cap = os.environ.get(THREADS_ENV)
    if cap:
        n = min(n, max(1, int(cap)))
    return max(1, n)


@dataclass(frozen=True)
class SeedResult:
    seed_idx: int
    seed: int
    prominence: float = float("nan")
    f0: float | None = None
    mean_rate: float = float("nan")
    regime: Regime | None = None
    error: str | None = None
    weights: dict[str, float] = field(default_factory=dict)

    @property
    def failed(self) -> bool:
        return self.error is not None


def _evaluate(config: SimConfig, seed_idx: int, seed: int) -> SeedResult:
    try:
        result = run(config, seed)
    except SimulationError as exc:
        return SeedResult(seed_idx, seed, error=str(exc))
    _, summary = analyze(result.spikes, config.burn_in, config.analysis)
    return SeedResult(
        seed_idx,
        seed,
        prominence=summary.prominence,
        f0=summary.f0,
        mean_rate=summary.mean_rate,
        regime=classify(summary, config.thresholds),
        weights=result.weight_summary(),
    )


def _job(args: tuple[Any, ...]) -> tuple[tuple[int, int], SeedResult]:
    key, config, seed_idx, seed = args
    return key, _evaluate(config, seed_idx, seed)


def _execute(jobs: list[tuple[Any, ...]], workers: int) -> dict[tuple[int, int], SeedResult]:
    if workers <= 1 or len(jobs) <= 1:
        results = [_job(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_job, jobs, chunksize=1))
    return dict(sorted(results))


def majority_regime(labels: list[Regime]) -> Regime | None:
    """Most frequent label; ties resolve to the lower regime (SIL < AI < OSC)."""
    if not labels:
        return None
    counts = Counter(labels)
    best = max(counts.values())
    return min(r for r, c in counts.items() if c == best)


def _summary_or_none(values: list[float]) -> SampleSummary | None:
    return summarize(values) if values else None


@dataclass(frozen=True)
class RegimeCell:
    point_idx: int
    tau_s: float
    d: float
    lambda_p: float
    seeds: tuple[SeedResult, ...]

    @property
    def ok(self) -> list[SeedResult]:
        return [s for s in self.seeds if not s.failed]

    @property
    def n_failed(self) -> int:
        return sum(s.failed for s in self.seeds)

    @property
    def prominence(self) -> SampleSummary | None:
        return _summary_or_none([s.prominence for s in self.ok])

    @property
    def f0(self) -> SampleSummary | None:
        return _summary_or_none([s.f0 for s in self.ok if s.f0 is not None])

    @property
    def rate(self) -> SampleSummary | None:
        return _summary_or_none([s.mean_rate for s in self.ok])

    @property
    def regime(self) -> Regime | None:
        return majority_regime([s.regime for s in self.ok])

    def regime_counts(self) -> dict[Regime, int]:
        c = Counter(s.regime for s in self.ok)
        return {r: c.get(r, 0) for r in Regime}


@dataclass(frozen=True)
class RegimeMap:
    grid: SweepGrid
    config: SimConfig
    cells: tuple[RegimeCell, ...]

    def slice(self, lambda_p: float) -> list[RegimeCell]:
        return [c for c in self.cells if c.lambda_p == lambda_p]

    def osc_cells(self, lambda_p: float) -> list[RegimeCell]:
        return [c for c in self.slice(lambda_p) if c.regime == Regime.OSC]

    def matrix(self, lambda_p: float, what: str = "regime") -> np.ndarray:
        """Values on a (len(d), len(tau_s)) array, NaN where missing."""
        out = np.full((len(self.grid.d), len(self.grid.tau_s)), np.nan)
        ti = {v: k for k, v in enumerate(self.grid.tau_s)}
        di = {v: k for k, v in enumerate(self.grid.d)}
        for c in self.slice(lambda_p):
            if what == "regime":
                val = c.regime
            else:
                s = c.prominence
                val = None if s is None else s.mean
            if val is not None:
                out[di[c.d], ti[c.tau_s]] = float(val)
        return out


def point_config(base: SimConfig, tau_s: float, d: float, lambda_p: float) -> SimConfig:
    """Config for one grid point; d = 0 becomes the one-step minimum delay."""
    return base.with_overrides({
        "synapse.tau_s": tau_s,
        "delay.d_base": max(d, base.dt),
        "stdp.lambda_p": lambda_p,
    })


def run_sweep(grid: SweepGrid, base_config: SimConfig, workers: int | None = None) -> RegimeMap:
    points = grid.points()
    jobs = []
    for p_idx, (ts, d, lp) in enumerate(points):
        cfg = point_config(base_config, ts, d, lp)
        for s_idx in range(grid.n_seeds):
            jobs.append(((p_idx, s_idx), cfg, s_idx, derive_seed(grid.master_seed, p_idx, s_idx)))
    results = _execute(jobs, worker_count(workers))
    cells = []
    for p_idx, (ts, d, lp) in enumerate(points):
        seeds = tuple(results[(p_idx, s)] for s in range(grid.n_seeds))
        cells.append(RegimeCell(p_idx, ts, d, lp, seeds))
    return RegimeMap(grid, base_config, tuple(cells))


@dataclass(frozen=True)
class ConditionStats:
    name: str
    config: SimConfig
    seeds: tuple[SeedResult, ...]

    @property
    def ok(self) -> list[SeedResult]:
        return [s for s in self.seeds if not s.failed]

    @property
    def prominence(self) -> SampleSummary | None:
        return _summary_or_none([s.prominence for s in self.ok])

    @property
    def f0(self) -> SampleSummary | None:
        return _summary_or_none([s.f0 for s in self.ok if s.f0 is not None])

    @property
    def rate(self) -> SampleSummary | None:
        return _summary_or_none([s.mean_rate for s in self.ok])


@dataclass(frozen=True)
class ControlReport:
    tau_s: float
    d: float
    lambda_p: float
    jitter_cv: float
    conditions: dict[str, ConditionStats]

    def prom_delta_pct(self, name: str) -> float | None:
        if name == "Baseline":
            return None
        base, cond = self.conditions["Baseline"].prominence, self.conditions[name].prominence
        if base is None or cond is None:
            return None
        return percent_delta(base.mean, cond.mean)

    def hedges_g(self, name: str) -> float | None:
        if name == "Baseline":
            return None
        a = [s.prominence for s in self.conditions["Baseline"].ok]
        b = [s.prominence for s in self.conditions[name].ok]
        try:
            return hedges_g(a, b)
        except ValueError:
            return None


def control_configs(base: SimConfig, tau_s: float = 5.0, d: float = 6.25,
                    lambda_p: float = 2e-3, jitter_cv: float = 0.2) -> dict[str, SimConfig]:
    baseline = point_config(base, tau_s, d, lambda_p).with_overrides({"delay.jitter_cv": 0.0})
    return {
        "Baseline": baseline,
        "Freeze": baseline.with_overrides({"stdp.lambda_p": 0.0}),
        "Jitter": baseline.with_overrides({"delay.jitter_cv": jitter_cv}),
    }


def run_controls(base_config: SimConfig, tau_s: float = 5.0, d: float = 6.25,
                 lambda_p: float = 2e-3, n_seeds: int = 5, master_seed: int | None = None,
                 jitter_cv: float = 0.2, workers: int | None = None) -> ControlReport:
    """Baseline / Freeze / Jitter at one operating point, paired by seed.

    Every condition reuses the same per-seed streams, so Freeze shares
    topology, initial state and noise with Baseline, and Jitter shares all of
    them except the delay draw.
    """
    master = base_config.grid.master_seed if master_seed is None else master_seed
    configs = control_configs(base_config, tau_s, d, lambda_p, jitter_cv)
    jobs = []
    for c_idx, name in enumerate(CONDITIONS):
        for s_idx in range(n_seeds):
            jobs.append(((c_idx, s_idx), configs[name], s_idx, derive_seed(master, CONTROL_POINT, s_idx)))
    results = _execute(jobs, worker_count(workers))
    conditions = {
        name: ConditionStats(name, configs[name], tuple(results[(c_idx, s)] for s in range(n_seeds)))
        for c_idx, name in enumerate(CONDITIONS)
    }
    return ControlReport(tau_s, d, lambda_p, jitter_cv, conditions)


def control_example_runs(report: ControlReport, seed_idx: int = 0) -> dict[str, RunResult]:
    """Re-run one seed per condition to get spike data for figures."""
    out = {}
    for name, cond in report.conditions.items():
        out[name] = run(cond.config, cond.seeds[seed_idx].seed)
    return out
