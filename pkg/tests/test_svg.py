import re

import numpy as np
import pytest

from regimescan.svg import (
    REGIME_COLORS,
    AxisTransform,
    HeatmapSpec,
    render_control_panel,
    render_heatmap,
    sequential_color,
)


def cell_fills(svg):
    return re.findall(r'<rect class="cell"[^>]*fill="([^"]+)"', svg)


def test_single_sil_cell():
    svg = render_heatmap(HeatmapSpec([5.0], [6.25], [[0.0]], kind="regime"))
    assert cell_fills(svg) == [REGIME_COLORS[0]]
    assert "SIL" in svg and "OSC" in svg


def test_uniform_field_identical_fills():
    svg = render_heatmap(HeatmapSpec([5, 10, 15], [0, 5], np.full((2, 3), 42.0), kind="sequential"))
    fills = cell_fills(svg)
    assert len(fills) == 6 and len(set(fills)) == 1


def test_sequential_scale_monotone_and_bounds_annotated():
    vals = np.arange(6.0).reshape(2, 3)
    svg = render_heatmap(HeatmapSpec([5, 10, 15], [0, 5], vals, kind="sequential"))
    assert "max 5" in svg and "min 0" in svg
    lum = [sum(int(c[i:i + 2], 16) * w for i, w in ((1, 0.3), (3, 0.59), (5, 0.11)))
           for c in (sequential_color(f) for f in np.linspace(0, 1, 11))]
    assert np.all(np.diff(lum) > 0)


def test_missing_cells_hatched():
    svg = render_heatmap(HeatmapSpec([5, 10], [0], [[np.nan, 1.0]], kind="regime"))
    assert cell_fills(svg) == ["url(#hatch)", REGIME_COLORS[1]]


def test_overlay_round_trip():
    xs, ys = [5.0, 10.0, 15.0, 20.0], [0.0, 2.5, 5.0]
    tr = AxisTransform(xs, ys)
    overlay = [(5.0, 0.0), (12.5, 3.75), (20.0, 5.0)]
    svg = render_heatmap(HeatmapSpec(xs, ys, np.zeros((3, 4)), overlay=overlay))
    line = re.search(r'<polyline class="overlay" points="([^"]+)"', svg)
    assert line and 'stroke="white"' in svg and "stroke-dasharray" in svg
    pts = [tuple(map(float, p.split(","))) for p in line.group(1).split()]
    for (x, y), (px, py) in zip(overlay, pts):
        assert px == pytest.approx(tr.x(x), abs=0.01)
        assert py == pytest.approx(tr.y(y), abs=0.01)
    # grid nodes map to cell centres
    for col, x in enumerate(xs):
        for row, y in enumerate(ys):
            ox, oy = tr.cell_origin(col, row)
            assert tr.x(x) == pytest.approx(ox + 17) and tr.y(y) == pytest.approx(oy + 17)


def test_shape_mismatch_rejected():
    with pytest.raises(ValueError):
        HeatmapSpec([1, 2], [1], np.zeros((2, 2)))


def test_axis_labels_with_units():
    svg = render_heatmap(HeatmapSpec([5.0], [1.0], [[2.0]]))
    assert "tau_s (ms)" in svg and "d (ms)" in svg


def test_control_panel_has_three_columns():
    f = np.arange(0.0, 501.0)
    panel = {"times": np.array([600.0, 700.0]), "ids": np.array([1, 2]), "n_neurons": 10,
             "t_start": 500.0, "trace_t": np.arange(500.0, 2500.0), "trace": np.ones(2000),
             "freqs": f, "psd": 1.0 / (1.0 + f), "f0": 30.0, "prominence": 12.0}
    svg = render_control_panel({"Baseline": panel, "Freeze": panel, "Jitter": panel})
    for name in ("Baseline", "Freeze", "Jitter"):
        assert f">{name}<" in svg
    assert svg.count("<polyline") == 6
    assert svg.startswith("<?xml")
