"""Dependency-free SVG figures: regime/prominence heatmaps and control panels."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

REGIME_COLORS = ("#4d4d4d", "#5b9bd5", "#e8743b")  # SIL, AI, OSC
REGIME_NAMES = ("SIL", "AI", "OSC")
# viridis samples; interpolated linearly
_SEQ_STOPS = ("#440154", "#3b528b", "#21918c", "#5ec962", "#fde725")
CONDITION_COLORS = {"Baseline": "#1f77b4", "Freeze": "#7f7f7f", "Jitter": "#d62728"}

CELL = 34
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 64, 110, 40, 52


def _fmt(x: float) -> str:
    return f"{x:.2f}".rstrip("0").rstrip(".")


def _hex_to_rgb(h: str) -> tuple[int, int, int]:
    return int(h[1:3], 16), int(h[3:5], 16), int(h[5:7], 16)


def sequential_color(frac: float) -> str:
    frac = min(max(frac, 0.0), 1.0)
    pos = frac * (len(_SEQ_STOPS) - 1)
    k = min(int(pos), len(_SEQ_STOPS) - 2)
    t = pos - k
    a, b = _hex_to_rgb(_SEQ_STOPS[k]), _hex_to_rgb(_SEQ_STOPS[k + 1])
    rgb = [round(a[i] + (b[i] - a[i]) * t) for i in range(3)]
    return "#{:02x}{:02x}{:02x}".format(*rgb)


@dataclass
class HeatmapSpec:
    """Cell values on a (len(y), len(x)) grid; x is tau_s, y is d."""

    x_values: Sequence[float]
    y_values: Sequence[float]
    values: np.ndarray
    kind: str = "regime"  # or "sequential"
    overlay: Sequence[tuple[float, float]] = field(default_factory=list)
    vmin: float | None = None
    vmax: float | None = None
    title: str = ""
    x_label: str = "tau_s (ms)"
    y_label: str = "d (ms)"
    value_label: str = "prominence"

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (len(self.y_values), len(self.x_values)):
            raise ValueError("values shape must be (len(y_values), len(x_values))")


class AxisTransform:
    """Data coordinates to pixels; grid values map to cell centers."""

    def __init__(self, x_values: Sequence[float], y_values: Sequence[float]):
        self.x_values = np.asarray(x_values, dtype=float)
        self.y_values = np.asarray(y_values, dtype=float)
        self.nx, self.ny = self.x_values.size, self.y_values.size

    @staticmethod
    def _index(v: float, grid: np.ndarray) -> float:
        if grid.size == 1:
            return 0.0
        return float(np.interp(v, grid, np.arange(grid.size), left=np.nan, right=np.nan))

    def x(self, v: float) -> float:
        return MARGIN_L + (self._index(v, self.x_values) + 0.5) * CELL

    def y(self, v: float) -> float:
        return MARGIN_T + (self.ny - 0.5 - self._index(v, self.y_values)) * CELL

    def cell_origin(self, col: int, row: int) -> tuple[float, float]:
        return MARGIN_L + col * CELL, MARGIN_T + (self.ny - 1 - row) * CELL


def _svg_open(width: float, height: float) -> list[str]:
    return [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.0f}" '
        f'height="{height:.0f}" viewBox="0 0 {width:.0f} {height:.0f}" '
        'font-family="Helvetica, Arial, sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{width:.0f}" height="{height:.0f}" fill="white"/>',
    ]


def _text(x: float, y: float, s: str, anchor: str = "middle", extra: str = "") -> str:
    return f'<text x="{x:.1f}" y="{y:.1f}" text-anchor="{anchor}"{extra}>{escape(s)}</text>'


def render_heatmap(spec: HeatmapSpec) -> str:
    tr = AxisTransform(spec.x_values, spec.y_values)
    width = MARGIN_L + tr.nx * CELL + MARGIN_R
    height = MARGIN_T + tr.ny * CELL + MARGIN_B
    out = _svg_open(width, height)
    out.append(
        '<defs><pattern id="hatch" width="6" height="6" patternUnits="userSpaceOnUse" '
        'patternTransform="rotate(45)"><rect width="6" height="6" fill="#ffffff"/>'
        '<line x1="0" y1="0" x2="0" y2="6" stroke="#999999" stroke-width="2"/></pattern></defs>'
    )
    if spec.title:
        out.append(_text(MARGIN_L + tr.nx * CELL / 2, 22, spec.title, extra=' font-size="13"'))

    finite = spec.values[np.isfinite(spec.values)]
    vmin = spec.vmin if spec.vmin is not None else (float(finite.min()) if finite.size else 0.0)
    vmax = spec.vmax if spec.vmax is not None else (float(finite.max()) if finite.size else 1.0)

    for row in range(tr.ny):
        for col in range(tr.nx):
            val = spec.values[row, col]
            x0, y0 = tr.cell_origin(col, row)
            if not np.isfinite(val):
                fill = "url(#hatch)"
            elif spec.kind == "regime":
                fill = REGIME_COLORS[int(round(val))]
            else:
                frac = 0.5 if vmax == vmin else (val - vmin) / (vmax - vmin)
                fill = sequential_color(frac)
            out.append(f'<rect class="cell" x="{x0:.1f}" y="{y0:.1f}" width="{CELL}" '
                       f'height="{CELL}" fill="{fill}" stroke="white" stroke-width="0.5"/>')

    bottom = MARGIN_T + tr.ny * CELL
    for col, xv in enumerate(spec.x_values):
        out.append(_text(tr.x(xv), bottom + 14, _fmt(xv)))
    for row, yv in enumerate(spec.y_values):
        out.append(_text(MARGIN_L - 6, tr.y(yv) + 4, _fmt(yv), anchor="end"))
    out.append(_text(MARGIN_L + tr.nx * CELL / 2, bottom + 34, spec.x_label))
    ymid = MARGIN_T + tr.ny * CELL / 2
    out.append(f'<text x="16" y="{ymid:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {ymid:.1f})">{escape(spec.y_label)}</text>')

    if len(spec.overlay) >= 1:
        pts = [(tr.x(x), tr.y(y)) for x, y in spec.overlay]
        pts = [(a, b) for a, b in pts if math.isfinite(a) and math.isfinite(b)]
        if pts:
            coords = " ".join(f"{a:.2f},{b:.2f}" for a, b in pts)
            out.append(f'<polyline class="overlay" points="{coords}" fill="none" stroke="white" '
                       'stroke-width="2" stroke-dasharray="6,4"/>')

    lx = MARGIN_L + tr.nx * CELL + 14
    if spec.kind == "regime":
        for k, (name, color) in enumerate(zip(REGIME_NAMES, REGIME_COLORS)):
            y = MARGIN_T + 4 + 20 * k
            out.append(f'<rect x="{lx}" y="{y}" width="14" height="14" fill="{color}"/>')
            out.append(_text(lx + 20, y + 11, name, anchor="start"))
    else:
        bar_h = min(tr.ny * CELL, 160)
        steps = 20
        for k in range(steps):
            y = MARGIN_T + bar_h * (1 - (k + 1) / steps)
            out.append(f'<rect x="{lx}" y="{y:.1f}" width="14" height="{bar_h / steps + 0.5:.1f}" '
                       f'fill="{sequential_color((k + 0.5) / steps)}"/>')
        out.append(_text(lx + 20, MARGIN_T + 10, f"max {vmax:.3g}", anchor="start"))
        out.append(_text(lx + 20, MARGIN_T + bar_h, f"min {vmin:.3g}", anchor="start"))
        out.append(_text(lx, MARGIN_T + bar_h + 16, spec.value_label, anchor="start"))
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _line_path(xs: np.ndarray, ys: np.ndarray) -> str:
    return " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(xs, ys))


def render_control_panel(panels: dict[str, dict], window_ms: float = 2000.0) -> str:
    """Three columns (one per condition) of raster, rate trace and spectrum.

    Each panel dict holds ``times``/``ids`` (spikes), ``n_neurons``,
    ``t_start``, ``trace_t``/``trace`` (rate), ``freqs``/``psd``, ``f0`` and
    ``prominence``. Rasters and traces show ``window_ms`` from ``t_start``.
    """
    names = list(panels)
    col_w, row_h, pad = 300, 150, 50
    width = pad + len(names) * (col_w + pad)
    height = 40 + 3 * (row_h + pad)
    out = _svg_open(width, height)
    rate_max = max((float(np.max(p["trace"])) for p in panels.values() if len(p["trace"])), default=1.0)
    psd_lo, psd_hi = np.inf, -np.inf
    for p in panels.values():
        f, s = np.asarray(p["freqs"]), np.asarray(p["psd"])
        band = s[(f >= 5) & (f <= 100)]
        band = band[band > 0]
        if band.size:
            psd_lo, psd_hi = min(psd_lo, band.min()), max(psd_hi, band.max())
    if not np.isfinite(psd_lo):
        psd_lo, psd_hi = 1e-3, 1.0
    llo, lhi = math.log10(psd_lo), math.log10(psd_hi) + 1e-9

    for c, name in enumerate(names):
        p = panels[name]
        color = CONDITION_COLORS.get(name, "#333333")
        x0 = pad + c * (col_w + pad)
        t0 = p["t_start"]
        out.append(_text(x0 + col_w / 2, 24, name, extra=' font-size="13"'))

        y0 = 40
        out.append(f'<rect x="{x0}" y="{y0}" width="{col_w}" height="{row_h}" fill="none" stroke="#999"/>')
        t, ids = np.asarray(p["times"]), np.asarray(p["ids"])
        sel = (t >= t0) & (t < t0 + window_ms)
        n = max(int(p["n_neurons"]), 1)
        for ti, ni in zip(t[sel], ids[sel]):
            cx = x0 + (ti - t0) / window_ms * col_w
            cy = y0 + row_h - (ni + 0.5) / n * row_h
            out.append(f'<rect x="{cx:.1f}" y="{cy:.1f}" width="0.8" height="0.8" fill="{color}"/>')
        out.append(_text(x0 + col_w / 2, y0 + row_h + 14, f"time (ms, from {t0:.0f})"))

        y1 = y0 + row_h + pad
        out.append(f'<rect x="{x0}" y="{y1}" width="{col_w}" height="{row_h}" fill="none" stroke="#999"/>')
        tt, rr = np.asarray(p["trace_t"]), np.asarray(p["trace"])
        sel = (tt >= t0) & (tt < t0 + window_ms)
        if sel.any():
            xs = x0 + (tt[sel] - t0) / window_ms * col_w
            ys = y1 + row_h - rr[sel] / (rate_max or 1.0) * row_h
            out.append(f'<polyline points="{_line_path(xs, ys)}" fill="none" stroke="{color}" stroke-width="1"/>')
        out.append(_text(x0 + col_w / 2, y1 + row_h + 14, f"rate (Hz), max {rate_max:.1f}"))

        y2 = y1 + row_h + pad
        out.append(f'<rect x="{x0}" y="{y2}" width="{col_w}" height="{row_h}" fill="none" stroke="#999"/>')
        f, s = np.asarray(p["freqs"]), np.asarray(p["psd"])
        sel = (f >= 5) & (f <= 100) & (s > 0)
        if sel.any():
            xs = x0 + (f[sel] - 5) / 95 * col_w
            ys = y2 + row_h - (np.log10(s[sel]) - llo) / (lhi - llo) * row_h
            out.append(f'<polyline points="{_line_path(xs, ys)}" fill="none" stroke="{color}" stroke-width="1.2"/>')
        f0 = p.get("f0")
        label = f"f0 {f0:.0f} Hz, Prom {p['prominence']:.1f}" if f0 is not None else f"Prom {p['prominence']:.1f}"
        out.append(_text(x0 + col_w - 4, y2 + 14, label, anchor="end"))
        out.append(_text(x0 + col_w / 2, y2 + row_h + 14, "frequency (Hz, 5-100), log PSD"))
    out.append("</svg>")
    return "\n".join(out) + "\n"
