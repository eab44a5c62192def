"""CSV / JSON writers for runs, sweeps and controls."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from . import __version__
from .analysis import KERNEL_TRUNCATE, RateTrace
from .config import SimConfig, to_flat
from .hopf import MODEL_DESCRIPTION
from .stats import HEDGES_FORMULA
from .sweep import CONDITIONS, SEED_DERIVATION, ControlReport, RegimeMap

CONTROL_COLUMNS = ("condition", "prom_mean", "prom_sd", "f0_mean", "f0_sd",
                   "rate_mean", "rate_sd", "prom_delta_pct", "hedges_g")


def fmt(value: Any) -> str:
    """Round-trippable text for CSV cells; None and NaN become empty."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return "" if math.isnan(v) else repr(v)
    return str(value)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def write_json(path: Path, payload: Any) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=_json_default) + "\n")


def _json_default(obj: Any) -> Any:
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def meta(config: SimConfig, **extra: Any) -> dict[str, Any]:
    """Every parameter and analysis convention that shaped an output."""
    a = config.analysis
    return {
        "tool": "regimescan",
        "version": __version__,
        "parameters": to_flat(config),
        "classifier": {
            "rule": "SIL if rate < rate_sil; OSC if prominence >= prom_osc and f0 present; else AI",
            "rate_sil_hz": config.thresholds.rate_sil,
            "prom_osc": config.thresholds.prom_osc,
            "cell_label": "majority over seeds, ties to the lower regime (SIL < AI < OSC)",
        },
        "rate_trace": {
            "bin_ms": a.bin_ms,
            "kernel": "gaussian",
            "kernel_sigma_ms": a.kernel_sigma_ms,
            "kernel_support_sigmas": KERNEL_TRUNCATE,
            "edges": "reflect",
            "burn_in_ms": config.burn_in,
        },
        "welch": {
            "segment_ms": a.welch_segment_ms,
            "overlap": a.welch_overlap,
            "window": "hann",
            "detrend": "constant",
            "scaling": "density",
            "onesided": True,
        },
        "spectral": {
            "prominence": "max/median of PSD over prom_band (inclusive)",
            "prom_band_hz": list(a.prom_band),
            "f0": "argmax over f0_band if a local maximum, ties to lower frequency",
            "f0_band_hz": list(a.f0_band),
        },
        "hopf": {"model": MODEL_DESCRIPTION, "gain_ref": config.hopf.gain_ref,
                 "tau_m_ms": config.neuron.tau_m},
        "stats": {"sd": "sample SD (n - 1)", "hedges_g": HEDGES_FORMULA},
        "seeding": SEED_DERIVATION,
        "stdp": "pair-based, all-to-all traces; t_pre is the somatic emission time; "
                "dt = 0 pairs potentiate",
        "drive": "v += sigma_noise*sqrt(dt)/tau_m*N(0,1) per step; i_dc constant",
        **extra,
    }


def write_trace_csv(path: Path, trace: RateTrace) -> None:
    write_csv(path, ("t_ms", "rate_hz"), zip(trace.times, trace.values))


def read_trace_csv(path: Path) -> RateTrace:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:2]] != ["t_ms", "rate_hz"]:
            raise ValueError(f"{path}: expected header t_ms,rate_hz")
        t, r = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                t.append(float(row[0]))
                r.append(float(row[1]))
            except (ValueError, IndexError):
                raise ValueError(f"{path}:{lineno}: malformed row") from None
    if len(t) < 2:
        raise ValueError(f"{path}: need at least two samples")
    t_arr = np.asarray(t)
    bins = np.diff(t_arr)
    bin_ms = float(np.median(bins))
    if bin_ms <= 0 or np.max(np.abs(bins - bin_ms)) > 1e-6 * bin_ms:
        raise ValueError(f"{path}: t_ms must be uniformly spaced")
    return RateTrace(bin_ms, np.asarray(r), float(t_arr[0]))


def write_psd_csv(path: Path, freqs: np.ndarray, psd: np.ndarray) -> None:
    write_csv(path, ("freq_hz", "psd"), zip(freqs, psd))


def write_raster_csv(path: Path, times: np.ndarray, ids: np.ndarray) -> None:
    write_csv(path, ("t_ms", "neuron"), zip(times, ids))


def _s(summary, attr):
    return None if summary is None else getattr(summary, attr)


def write_sweep(rmap: RegimeMap, outdir: Path) -> None:
    cell_rows, agg_rows = [], []
    for c in rmap.cells:
        for s in c.seeds:
            cell_rows.append((c.point_idx, s.seed_idx, s.seed, c.tau_s, c.d, c.lambda_p,
                              s.failed, s.prominence, s.f0, s.mean_rate,
                              None if s.regime is None else s.regime.name, s.error))
        counts = c.regime_counts()
        prom, f0, rate = c.prominence, c.f0, c.rate
        agg_rows.append((c.point_idx, c.tau_s, c.d, c.lambda_p, len(c.ok), c.n_failed,
                         _s(prom, "mean"), _s(prom, "sd"), _s(f0, "mean"), _s(f0, "sd"), _s(f0, "n"),
                         _s(rate, "mean"), _s(rate, "sd"),
                         *(counts[r] for r in counts), None if c.regime is None else c.regime.name))
    write_csv(outdir / "sweep_cells.csv",
              ("point_idx", "seed_idx", "seed", "tau_s_ms", "d_ms", "lambda_p", "failed",
               "prominence", "f0_hz", "rate_hz", "regime", "error"), cell_rows)
    write_csv(outdir / "sweep_agg.csv",
              ("point_idx", "tau_s_ms", "d_ms", "lambda_p", "n_ok", "n_failed",
               "prom_mean", "prom_sd", "f0_mean", "f0_sd", "f0_n", "rate_mean", "rate_sd",
               "n_sil", "n_ai", "n_osc", "regime"), agg_rows)


def control_rows(report: ControlReport) -> list[tuple]:
    rows = []
    for name in CONDITIONS:
        c = report.conditions[name]
        rows.append((name, _s(c.prominence, "mean"), _s(c.prominence, "sd"),
                     _s(c.f0, "mean"), _s(c.f0, "sd"), _s(c.rate, "mean"), _s(c.rate, "sd"),
                     report.prom_delta_pct(name), report.hedges_g(name)))
    return rows


def write_controls(report: ControlReport, outdir: Path) -> None:
    write_csv(outdir / "controls.csv", CONTROL_COLUMNS, control_rows(report))
    seed_rows = []
    for name in CONDITIONS:
        for s in report.conditions[name].seeds:
            seed_rows.append((name, s.seed_idx, s.seed, s.failed, s.prominence, s.f0,
                              s.mean_rate, s.weights.get("mean_final"), s.error))
    write_csv(outdir / "controls_seeds.csv",
              ("condition", "seed_idx", "seed", "failed", "prominence", "f0_hz", "rate_hz",
               "ee_weight_mean_final", "error"), seed_rows)
