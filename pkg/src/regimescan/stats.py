"""Seed-level summary statistics and effect sizes."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

HEDGES_FORMULA = "g = J*(mean_b - mean_a)/s_pooled, J = 1 - 3/(4*(n_a+n_b) - 9)"


@dataclass(frozen=True)
class SampleSummary:
    n: int
    mean: float
    sd: float | None


def summarize(values: Iterable[float]) -> SampleSummary:
    """Mean and sample SD (n - 1); SD is None for a single value."""
    x = np.asarray(list(values), dtype=float)
    if x.size == 0:
        raise ValueError("cannot summarize an empty sample")
    mean = math.fsum(x) / x.size
    sd = None
    if x.size >= 2:
        sd = math.sqrt(math.fsum((x - mean) ** 2) / (x.size - 1))
    return SampleSummary(int(x.size), mean, sd)


def percent_delta(baseline_mean: float, condition_mean: float) -> float:
    if baseline_mean == 0:
        raise ValueError("percent change undefined for a zero baseline")
    return 100.0 * (condition_mean - baseline_mean) / baseline_mean


def hedges_g(sample_a: Iterable[float], sample_b: Iterable[float]) -> float:
    """Bias-corrected standardized mean difference of ``b`` relative to ``a``.

    Positive when ``b`` exceeds ``a``; with ``a`` the baseline this gives
    the sign convention of a baseline-referenced effect table.
    """
    a, b = summarize(sample_a), summarize(sample_b)
    if a.n < 2 or b.n < 2:
        raise ValueError("hedges_g needs at least two values per sample")
    pooled = math.sqrt(((a.n - 1) * a.sd ** 2 + (b.n - 1) * b.sd ** 2) / (a.n + b.n - 2))
    if pooled == 0:
        raise ValueError("degenerate samples: pooled SD is zero")
    j = 1.0 - 3.0 / (4.0 * (a.n + b.n) - 9.0)
    return j * (b.mean - a.mean) / pooled
