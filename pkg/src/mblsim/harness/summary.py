"""Scalar summaries of observable series."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..observables import ObservableSeries


@dataclass(frozen=True)
class SummaryStat:
    mean: float
    sd: float


@dataclass(frozen=True)
class LogFit:
    slope: float
    slope_sd: float
    intercept: float


def quasi_steady_summary(
    series: ObservableSeries, window: tuple[float, float] = (0.25, 1.0)
) -> SummaryStat:
    """Time-average over the window, with the ensemble SD of that average.

    Each realization is averaged over the window first; mean and
    population SD are then taken across realizations.
    """
    idx = series.grid.window(*window)
    if idx.size == 0:
        raise ValueError(f"no grid samples inside window {window}")
    per_realization = series.values[:, idx].mean(axis=1)
    return SummaryStat(float(per_realization.mean()), float(per_realization.std()))


def final_sample_summary(series: ObservableSeries) -> SummaryStat:
    last = series.values[:, -1]
    return SummaryStat(float(last.mean()), float(last.std()))


def logfit_entropy(
    series: ObservableSeries, window: tuple[float, float] = (0.25, 1.0)
) -> LogFit:
    """Least-squares slope of S versus ln t over the window.

    The least-squares slope of the ensemble-mean curve equals the mean of
    the per-realization slopes, so its uncertainty is the ensemble SD of
    those slopes divided by sqrt(k).  For a single realization the
    uncertainty falls back to the residual estimate (zero for an exact
    fit).
    """
    if window[0] <= 0:
        raise ValueError("log fit window must be strictly positive in time")
    idx = series.grid.window(*window)
    if idx.size < 3:
        raise ValueError("log fit needs at least 3 samples in the window")
    x = np.log(series.grid.times[idx])
    xc = x - x.mean()
    sxx = float((xc * xc).sum())
    coeff = xc / sxx
    slopes = series.values[:, idx] @ coeff
    slope = float(slopes.mean())
    mean_y = series.mean[idx]
    intercept = float(mean_y.mean() - slope * x.mean())
    k = slopes.size
    if k > 1:
        slope_sd = float(slopes.std() / np.sqrt(k))
    else:
        resid = mean_y - (intercept + slope * x)
        dof = idx.size - 2
        slope_sd = float(np.sqrt((resid @ resid) / dof / sxx)) if dof > 0 else 0.0
    return LogFit(slope=slope, slope_sd=slope_sd, intercept=intercept)
