"""Hopf reference boundary of a delayed two-pole rate model.

A single effective population with membrane and synaptic low-pass stages
and net inhibitory delayed feedback of gain G has characteristic equation

    (1 + lam*tau_m) * (1 + lam*tau_s) + G * exp(-lam*d) = 0.

At a Hopf point lam = i*omega, which splits into a phase condition for
omega and a magnitude condition for the critical gain G_c. The model is a
coarse stand-in for the network, used only as a map overlay.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

PHASE_TOL = 1e-10
MODEL_DESCRIPTION = (
    "delayed two-pole negative feedback: (1+lam*tau_m)(1+lam*tau_s) + G*exp(-lam*d) = 0; "
    "omega*d + atan(omega*tau_m) + atan(omega*tau_s) = pi; "
    "G_c = sqrt((1+omega^2 tau_m^2)(1+omega^2 tau_s^2))"
)


def phase_residual(omega: float, tau_m: float, tau_s: float, d: float) -> float:
    return omega * d + math.atan(omega * tau_m) + math.atan(omega * tau_s) - math.pi


def hopf_frequency(tau_m: float, tau_s: float, d: float, omega_max: float | None = None) -> float:
    """Smallest positive omega (rad/ms) solving the phase condition, by bisection.

    The residual is strictly increasing in omega and reaches zero no later
    than ``pi / d``, which bounds the bracket.
    """
    if d <= 0:
        raise ValueError("no finite Hopf frequency for d <= 0 (phase stays below pi)")
    if tau_m < 0 or tau_s < 0:
        raise ValueError("time constants must be >= 0")
    lo, hi = 0.0, math.pi / d if omega_max is None else omega_max
    if phase_residual(hi, tau_m, tau_s, d) < 0:
        raise ValueError("omega bracket does not contain the Hopf root")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        r = phase_residual(mid, tau_m, tau_s, d)
        if abs(r) < PHASE_TOL:
            return mid
        if r < 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 4 * math.ulp(hi):
            break
    return 0.5 * (lo + hi)


def critical_gain(tau_m: float, tau_s: float, d: float) -> float:
    w = hopf_frequency(tau_m, tau_s, d)
    return math.sqrt((1.0 + (w * tau_m) ** 2) * (1.0 + (w * tau_s) ** 2))


def gain_table(tau_m: float, tau_s_grid: Sequence[float], d_grid: Sequence[float],
               d_floor: float | None = None) -> list[tuple[float, float, float, float]]:
    """Rows ``(tau_s, d, G_c, omega)``; nodes with d <= 0 use ``d_floor`` or are skipped."""
    rows = []
    for ts in tau_s_grid:
        for d in d_grid:
            d_eff = d if d > 0 else d_floor
            if d_eff is None or d_eff <= 0:
                continue
            w = hopf_frequency(tau_m, ts, d_eff)
            g = math.sqrt((1.0 + (w * tau_m) ** 2) * (1.0 + (w * ts) ** 2))
            rows.append((float(ts), float(d), g, w))
    return rows


def boundary_curve(tau_m: float, gain_ref: float, tau_s_grid: Sequence[float],
                   d_grid: Sequence[float], d_floor: float | None = None) -> list[tuple[float, float]]:
    """Points (tau_s, d) where G_c crosses ``gain_ref`` along each tau_s column.

    Crossings come from sign changes of ``G_c - gain_ref`` between adjacent d
    nodes, located by linear interpolation; a node with exactly zero
    difference is returned as is. Nodes with d <= 0 are evaluated at
    ``d_floor`` when given and skipped otherwise.
    """
    points: list[tuple[float, float]] = []
    for ts in tau_s_grid:
        ds, fs = [], []
        for d in d_grid:
            d_eff = d if d > 0 else d_floor
            if d_eff is None or d_eff <= 0:
                continue
            ds.append(float(d))
            fs.append(critical_gain(tau_m, ts, d_eff) - gain_ref)
        for k, f in enumerate(fs):
            if f == 0.0:
                points.append((float(ts), ds[k]))
            if k + 1 < len(fs):
                g = fs[k + 1]
                if f * g < 0:
                    frac = f / (f - g)
                    points.append((float(ts), ds[k] + frac * (ds[k + 1] - ds[k])))
    return points


def boundary_polyline(points: list[tuple[float, float]]) -> np.ndarray:
    """Boundary points ordered by tau_s, as an (n, 2) array."""
    if not points:
        return np.zeros((0, 2))
    arr = np.asarray(points, dtype=float)
    return arr[np.lexsort((arr[:, 1], arr[:, 0]))]
