"""Command-line entry point: simulate, sweep, control, hopf, classify."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    Regime,
    SpectralSummary,
    analyze,
    classify,
    dominant_frequency,
    prominence,
    welch_psd,
)
from .config import SimConfig, load_config
from .dynamics import SimulationError, run
from .hopf import boundary_curve, boundary_polyline, gain_table
from .outputs import (
    meta,
    read_trace_csv,
    write_controls,
    write_csv,
    write_json,
    write_psd_csv,
    write_raster_csv,
    write_sweep,
    write_trace_csv,
)
from .params import ConfigError
from .svg import HeatmapSpec, render_control_panel, render_heatmap
from .sweep import control_example_runs, run_controls, run_sweep

log = logging.getLogger("regimescan")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


def _outdir(args, cfg: SimConfig) -> Path:
    out = Path(args.out or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _lambda_tag(lp: float) -> str:
    return f"{lp:g}".replace("-", "m")


def _hopf_overlay(cfg: SimConfig, tau_s, d) -> list[tuple[float, float]]:
    pts = boundary_curve(cfg.neuron.tau_m, cfg.hopf.gain_ref, tau_s, d, d_floor=cfg.dt)
    return [tuple(p) for p in boundary_polyline(pts).tolist()]


def cmd_simulate(args, cfg: SimConfig) -> int:
    out = _outdir(args, cfg)
    result = run(cfg, args.seed)
    trace, summary = analyze(result.spikes, cfg.burn_in, cfg.analysis)
    write_raster_csv(out / "raster.csv", result.spikes.times, result.spikes.ids)
    write_trace_csv(out / "rate.csv", trace)
    write_psd_csv(out / "psd.csv", summary.freqs, summary.psd)
    label = classify(summary, cfg.thresholds)
    write_json(out / "summary.json", {
        "seed": args.seed,
        "n_spikes": len(result.spikes),
        "prominence": summary.prominence,
        "f0_hz": summary.f0,
        "mean_rate_hz": summary.mean_rate,
        "regime": label.name,
        "weights": result.weight_summary(),
        "meta": meta(cfg),
    })
    if args.dump_topology:
        write_json(out / "topology.json", result.topology.to_json())
    log.info("seed %d: %s, rate %.2f Hz, prominence %.1f", args.seed, label.name,
             summary.mean_rate, summary.prominence)
    return EXIT_OK


def cmd_sweep(args, cfg: SimConfig) -> int:
    out = _outdir(args, cfg)
    grid = cfg.grid
    rmap = run_sweep(grid, cfg, workers=args.workers)
    write_sweep(rmap, out)
    overlay = _hopf_overlay(cfg, grid.tau_s, grid.d)
    proms = [c.prominence.mean for c in rmap.cells if c.prominence is not None]
    vmin, vmax = (min(proms), max(proms)) if proms else (0.0, 1.0)
    for lp in grid.lambda_p:
        tag = _lambda_tag(lp)
        regime = HeatmapSpec(grid.tau_s, grid.d, rmap.matrix(lp, "regime"), kind="regime",
                             overlay=overlay, title=f"regime, lambda_p = {lp:g}")
        (out / f"regime_lambda_{tag}.svg").write_text(render_heatmap(regime))
        prom = HeatmapSpec(grid.tau_s, grid.d, rmap.matrix(lp, "prominence"), kind="sequential",
                           overlay=overlay, vmin=vmin, vmax=vmax,
                           title=f"mean PSD prominence, lambda_p = {lp:g}")
        (out / f"prominence_lambda_{tag}.svg").write_text(render_heatmap(prom))
    n_failed = sum(c.n_failed for c in rmap.cells)
    write_json(out / "meta.json", meta(cfg, failed_runs=n_failed, hopf_boundary=overlay))
    log.info("sweep: %d cells, %d failed runs", len(rmap.cells), n_failed)
    return EXIT_OK


def cmd_control(args, cfg: SimConfig) -> int:
    out = _outdir(args, cfg)
    report = run_controls(cfg, tau_s=args.tau_s, d=args.d, lambda_p=args.lambda_p,
                          n_seeds=args.seeds, jitter_cv=args.jitter_cv, workers=args.workers)
    write_controls(report, out)
    panels = {}
    for name, res in control_example_runs(report).items():
        c = report.conditions[name].config
        trace, summary = analyze(res.spikes, c.burn_in, c.analysis)
        panels[name] = {
            "times": res.spikes.times, "ids": res.spikes.ids, "n_neurons": res.spikes.n_neurons,
            "t_start": c.burn_in, "trace_t": trace.times, "trace": trace.values,
            "freqs": summary.freqs, "psd": summary.psd, "f0": summary.f0,
            "prominence": summary.prominence,
        }
    (out / "control_panel.svg").write_text(render_control_panel(panels))
    write_json(out / "meta.json", meta(cfg, control={
        "tau_s_ms": args.tau_s, "d_ms": args.d, "lambda_p": args.lambda_p,
        "jitter_cv": args.jitter_cv, "n_seeds": args.seeds,
    }))
    return EXIT_OK


def cmd_hopf(args, cfg: SimConfig) -> int:
    out = _outdir(args, cfg)
    grid = cfg.grid
    rows = gain_table(cfg.neuron.tau_m, grid.tau_s, grid.d, d_floor=cfg.dt)
    write_csv(out / "hopf_gc.csv", ("tau_s_ms", "d_ms", "g_c", "omega_rad_per_ms"), rows)
    write_json(out / "hopf_boundary.json", {
        "gain_ref": cfg.hopf.gain_ref,
        "tau_m_ms": cfg.neuron.tau_m,
        "d_floor_ms": cfg.dt,
        "polyline": _hopf_overlay(cfg, grid.tau_s, grid.d),
    })
    return EXIT_OK


def cmd_classify(args, cfg: SimConfig) -> int:
    trace = read_trace_csv(Path(args.trace))
    freqs, psd = welch_psd(trace, cfg.analysis.welch_segment_ms, cfg.analysis.welch_overlap)
    a = cfg.analysis
    prom = prominence(freqs, psd, a.prom_band)
    f0 = dominant_frequency(freqs, psd, a.f0_band) if prom > 0 else None
    summary = SpectralSummary(freqs, psd, f0, prom, float(np.mean(trace.values)))
    label: Regime = classify(summary, cfg.thresholds)
    payload = {
        "regime": label.name,
        "mean_rate_hz": summary.mean_rate,
        "prominence": summary.prominence,
        "f0_hz": summary.f0,
        "thresholds": {"rate_sil": cfg.thresholds.rate_sil, "prom_osc": cfg.thresholds.prom_osc},
    }
    if args.out:
        write_json(Path(args.out), payload)
    else:
        print(json.dumps(payload, indent=2, sort_keys=True))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="regimescan", description=__doc__)
    p.add_argument("--version", action="version", version=f"regimescan {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out=True):
        sp.add_argument("--config", help="JSON config file (defaults if omitted)")
        if out:
            sp.add_argument("--out", help="output directory (default: config output_dir)")

    sp = sub.add_parser("simulate", help="one run: raster, rate, PSD and summary")
    common(sp)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--dump-topology", action="store_true", help="also write topology.json")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("sweep", help="grid sweep with regime and prominence maps")
    common(sp)
    sp.add_argument("--workers", type=int, default=None)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("control", help="Baseline / Freeze / Jitter comparison")
    common(sp)
    sp.add_argument("--tau-s", type=float, default=5.0)
    sp.add_argument("--d", type=float, default=6.25)
    sp.add_argument("--lambda-p", type=float, default=2e-3)
    sp.add_argument("--jitter-cv", type=float, default=0.2)
    sp.add_argument("--seeds", type=int, default=5)
    sp.add_argument("--workers", type=int, default=None)
    sp.set_defaults(func=cmd_control)

    sp = sub.add_parser("hopf", help="Hopf reference gains and boundary")
    common(sp)
    sp.set_defaults(func=cmd_hopf)

    sp = sub.add_parser("classify", help="regime of a rate-trace CSV (t_ms,rate_hz)")
    sp.add_argument("trace")
    sp.add_argument("--config")
    sp.add_argument("--out", help="write JSON here instead of stdout")
    sp.set_defaults(func=cmd_classify)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SimulationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
