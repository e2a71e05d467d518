"""Classical moving-average decomposition into trend, seasonal and remainder."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import TimeSeries

# Trend window for non-seasonal series; a window of one would copy the data.
NONSEASONAL_WINDOW = 7


@dataclass(frozen=True, eq=False)
class Decomposition:
    trend: np.ndarray
    seasonal: np.ndarray
    remainder: np.ndarray
    period: int

    def seasonal_pattern(self) -> np.ndarray:
        """One cycle of the seasonal component, phase 0 first."""
        return self.seasonal[: self.period].copy()


def _ma_weights(m: int, n: int) -> np.ndarray:
    if m == 1:
        w = min(NONSEASONAL_WINDOW, n if n % 2 else n - 1)
        return np.full(w, 1.0 / w)
    if m % 2:
        return np.full(m, 1.0 / m)
    w = np.full(m + 1, 1.0 / m)
    w[0] = w[-1] = 0.5 / m
    return w


def centered_moving_average(y: np.ndarray, m: int) -> tuple[np.ndarray, int]:
    """Centred MA (2xm for even m). Returns the defined core and its offset."""
    weights = _ma_weights(m, len(y))
    core = np.convolve(y, weights, mode="valid")
    return core, len(weights) // 2


def _extend_linear(core: np.ndarray, offset: int, n: int) -> np.ndarray:
    trend = np.empty(n)
    trend[offset: offset + len(core)] = core
    tail = n - offset - len(core)
    if offset == 0 and tail == 0:
        return trend
    k = min(len(core), max(2, offset))
    if k < 2:
        trend[:offset] = core[0]
        trend[offset + len(core):] = core[-1]
        return trend
    x = np.arange(k, dtype=float)
    head_slope, head_icpt = np.polyfit(x, core[:k], 1)
    trend[:offset] = head_icpt + head_slope * np.arange(-offset, 0)
    tail_slope, tail_icpt = np.polyfit(x, core[-k:], 1)
    trend[offset + len(core):] = tail_icpt + tail_slope * np.arange(k, k + tail)
    return trend


def decompose(ts: TimeSeries) -> Decomposition:
    """Additive decomposition y = trend + seasonal + remainder.

    The trend is a centred moving average over one seasonal cycle, its
    missing ends filled by a straight line fitted to the nearest defined
    trend values. Seasonal effects are the per-phase means of the detrended
    series, centred to sum to zero over a cycle. Series whose seasonality
    is not usable are treated as period 1 (seasonal part identically zero).
    """
    y = ts.values
    n = len(y)
    m = ts.effective_period
    core, offset = centered_moving_average(y, m)
    trend = _extend_linear(core, offset, n)
    if m > 1:
        detrended = y - trend
        phase = np.arange(n) % m
        means = np.array([detrended[phase == j].mean() for j in range(m)])
        means -= means.mean()
        seasonal = means[phase]
    else:
        seasonal = np.zeros(n)
    remainder = y - trend - seasonal
    return Decomposition(trend=trend, seasonal=seasonal, remainder=remainder, period=m)


def multiplicative_indices(y: np.ndarray, m: int) -> np.ndarray | None:
    """Per-phase seasonal ratios (mean 1) of a positive series, or None."""
    if m <= 1 or len(y) < 2 * m + 1 or np.any(y <= 0):
        return None
    core, offset = centered_moving_average(y, m)
    ratios = y[offset: offset + len(core)] / core
    phase = (np.arange(len(core)) + offset) % m
    idx = np.array([ratios[phase == j].mean() for j in range(m)])
    return idx / idx.mean()
