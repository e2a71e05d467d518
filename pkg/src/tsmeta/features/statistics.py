"""Individual feature families computed from a series or its decomposition.

Each function returns plain floats plus, where a value can be undefined, a
parallel tuple of booleans marking which entries are defined. Undefined
entries are 0.0.
"""

from __future__ import annotations

import numpy as np

from ..core import TimeSeries
from ..errors import ConstantInput, TooShort
from .. import _kernels
from .correlation import acf, is_constant, pacf
from .decomposition import Decomposition

NBINS = 10
SMOOTHING_GRID = np.round(np.arange(1, 20) * 0.05, 2)


def _ols_r2(y: np.ndarray, X: np.ndarray) -> float | None:
    """R^2 of an OLS fit of y on X (X includes the intercept); None if y is flat."""
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ coef
    tss = np.sum((y - y.mean()) ** 2)
    if tss <= 0 or is_constant(y):
        return None
    return float(max(0.0, 1.0 - np.sum(resid ** 2) / tss))


def acf_pacf_features(ts: TimeSeries) -> tuple[tuple[float, ...], tuple[bool, ...]]:
    """Eleven autocorrelation summaries.

    Order: acf_y_1, acf_diff1_1, acf_diff2_1, acf_y_sumsq5, acf_diff1_sumsq5,
    acf_diff2_sumsq5, acf_seasonal, pacf_y_sumsq5, pacf_diff1_sumsq5,
    pacf_diff2_sumsq5, pacf_seasonal.
    """
    y = ts.values
    m = ts.effective_period
    seqs = [y, np.diff(y), np.diff(y, n=2)]
    first = [0.0] * 3
    first_ok = [False] * 3
    sq_acf = [0.0] * 3
    sq_acf_ok = [False] * 3
    sq_pacf = [0.0] * 3
    sq_pacf_ok = [False] * 3
    for i, x in enumerate(seqs):
        lags = min(5, len(x) - 1)
        if lags < 1:
            continue
        try:
            r = acf(x, lags)
        except ConstantInput:
            continue
        first[i], first_ok[i] = float(r[0]), True
        if lags == 5:
            sq_acf[i], sq_acf_ok[i] = float(np.sum(r ** 2)), True
            sq_pacf[i], sq_pacf_ok[i] = float(np.sum(pacf(x, 5) ** 2)), True
    seas_acf = seas_pacf = 0.0
    seas_ok = False
    if m > 1 and m < len(y):
        try:
            seas_acf = float(acf(y, m)[-1])
            seas_pacf = float(pacf(y, m)[-1])
            seas_ok = True
        except ConstantInput:
            pass
    values = (*first, *sq_acf, seas_acf, *sq_pacf, seas_pacf)
    mask = (*first_ok, *sq_acf_ok, seas_ok, *sq_pacf_ok, seas_ok)
    return tuple(values), tuple(mask)


def spectral_entropy(ts: TimeSeries) -> float:
    """Normalised Shannon entropy of the periodogram (0 = one spike, 1 = flat)."""
    y = ts.values
    if is_constant(y):
        raise ConstantInput("spectral entropy of a constant series")
    z = y - y.mean()
    power = np.abs(np.fft.rfft(z)[1: len(z) // 2 + 1]) ** 2
    if len(power) < 2 or power.sum() <= 0:
        raise ConstantInput("no spectral mass away from frequency zero")
    p = power / power.sum()
    nz = p[p > 0]
    return float(min(1.0, max(0.0, -np.sum(nz * np.log(nz)) / np.log(len(p)))))


def tile_width(ts: TimeSeries) -> int:
    m = ts.effective_period
    return max(m, 10) if m > 1 else 10


def window_features(ts: TimeSeries) -> tuple[float, float, float, float]:
    """(lumpiness, stability, level_shift_max, level_shift_index)."""
    y = ts.values
    w = tile_width(ts)
    n = len(y)
    if n < 2 * w:
        raise TooShort(f"window features need {2 * w} points, got {n}")
    tiles = y[: (n // w) * w].reshape(-1, w)
    lumpiness = float(np.var(tiles.var(axis=1, ddof=1), ddof=1))
    stability = float(np.var(tiles.mean(axis=1), ddof=1))
    csum = np.concatenate([[0.0], np.cumsum(y)])
    means = (csum[w:] - csum[:-w]) / w
    shifts = np.abs(means[w:] - means[:-w])
    if is_constant(y):
        shifts = np.zeros_like(shifts)
    idx = int(np.argmax(shifts))
    return lumpiness, stability, float(shifts[idx]), float(idx + 1)


def stl_features(d: Decomposition) -> tuple[float, float, float, float, float]:
    """(trend_strength, seasonal_strength, spikiness, peak, trough)."""
    T, S, R = d.trend, d.seasonal, d.remainder
    var_r = np.var(R, ddof=1)

    def strength(component):
        denom = np.var(component + R, ddof=1)
        if denom <= 0 or is_constant(component + R):
            return 0.0
        return float(max(0.0, 1.0 - var_r / denom))

    trend_strength = strength(T)
    n = len(R)
    # leave-one-out variances in closed form
    total, total_sq = R.sum(), np.sum(R ** 2)
    loo_mean = (total - R) / (n - 1)
    loo_var = ((total_sq - R ** 2) - (n - 1) * loo_mean ** 2) / (n - 2)
    spikiness = float(np.var(loo_var, ddof=1))
    if d.period > 1:
        seasonal_strength = strength(S)
        pattern = d.seasonal_pattern()
        peak = float(np.argmax(pattern) + 1)
        trough = float(np.argmin(pattern) + 1)
    else:
        seasonal_strength = peak = trough = 0.0
    return trend_strength, seasonal_strength, spikiness, peak, trough


def distribution_features(ts: TimeSeries, nbins: int = NBINS) -> tuple[float, float, float, float]:
    """(flat_spots, histogram_mode, binarize_mean, crossing_points)."""
    y = ts.values
    n = len(y)
    lo, hi = float(y.min()), float(y.max())
    if hi == lo:
        return float(n), lo, 0.0, 0.0
    labels = np.minimum(((y - lo) / (hi - lo) * nbins).astype(int), nbins - 1)
    changes = np.flatnonzero(np.diff(labels) != 0)
    bounds = np.concatenate([[-1], changes, [n - 1]])
    flat_spots = float(np.max(np.diff(bounds)))
    counts = np.bincount(labels, minlength=nbins)
    width = (hi - lo) / nbins
    mode = lo + (int(np.argmax(counts)) + 0.5) * width
    binarize_mean = float(np.mean(y > y.mean()))
    med = np.median(y)
    above = y > med
    below = y < med
    crossings = float(np.sum((above[:-1] & below[1:]) | (below[:-1] & above[1:])))
    return flat_spots, float(mode), binarize_mean, crossings


def hurst_rs(y: np.ndarray) -> float:
    """Rescaled-range Hurst exponent, clipped to [0, 1]."""
    n = len(y)
    if n < 20:
        raise TooShort("Hurst exponent needs at least 20 points")
    sizes = np.unique(np.floor(np.logspace(np.log10(10), np.log10(n / 2), 10)).astype(int))
    log_s, log_rs = [], []
    for s in sizes:
        blocks = y[: (n // s) * s].reshape(-1, s)
        z = blocks - blocks.mean(axis=1, keepdims=True)
        cum = np.cumsum(z, axis=1)
        r = cum.max(axis=1) - cum.min(axis=1)
        sd = blocks.std(axis=1)
        ok = sd > 1e-12 * max(1.0, np.max(np.abs(blocks)))
        if np.any(ok):
            rs = np.mean(r[ok] / sd[ok])
            if rs > 0:
                log_s.append(np.log(s))
                log_rs.append(np.log(rs))
    if len(log_s) < 2:
        raise ConstantInput("rescaled range undefined for this series")
    slope = np.polyfit(log_s, log_rs, 1)[0]
    return float(np.clip(slope, 0.0, 1.0))


def dependence_features(ts: TimeSeries) -> tuple[tuple[float, float, float], tuple[bool, bool, bool]]:
    """((hurst, first_min_ac, first_zero_ac), defined-mask)."""
    y = ts.values
    try:
        hurst, hurst_ok = hurst_rs(y), True
    except (TooShort, ConstantInput):
        hurst, hurst_ok = 0.0, False
    first_min = first_zero = 0.0
    min_ok = zero_ok = False
    max_lag = len(y) // 2
    if max_lag >= 2 and not is_constant(y):
        r = np.concatenate([[1.0], acf(y, max_lag)])
        for k in range(1, max_lag):
            if r[k] < r[k - 1] and r[k] < r[k + 1]:
                first_min, min_ok = float(k), True
                break
        nonpos = np.flatnonzero(r[1:] <= 0)
        if nonpos.size:
            first_zero, zero_ok = float(nonpos[0] + 1), True
    return (hurst, first_min, first_zero), (hurst_ok, min_ok, zero_ok)


def kpss_trend(y: np.ndarray, lags: int = 1) -> float:
    """Trend-stationarity KPSS statistic with Bartlett-weighted long-run variance."""
    n = len(y)
    t = np.arange(n, dtype=float)
    X = np.column_stack([np.ones(n), t])
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    e = y - X @ coef
    s2 = np.dot(e, e) / n
    for j in range(1, lags + 1):
        s2 += 2.0 * (1.0 - j / (lags + 1.0)) * np.dot(e[j:], e[:-j]) / n
    scale = max(1.0, float(np.max(np.abs(y))))
    if s2 <= (1e-9 * scale) ** 2:
        raise ConstantInput("detrended series has no variance")
    S = np.cumsum(e)
    return float(np.sum(S ** 2) / (n ** 2 * s2))


def arch_lags(n: int) -> int:
    return max(1, min(12, n // 4))


def arch_lm(y: np.ndarray) -> float:
    """Engle's LM statistic: effective sample size times R^2 of z^2 on its lags."""
    n = len(y)
    L = arch_lags(n)
    if n < 3 * L:
        raise TooShort("ARCH statistic needs at least three times the lag order")
    z2 = (y - y.mean()) ** 2
    target = z2[L:]
    X = np.column_stack([np.ones(n - L)] + [z2[L - i: n - i] for i in range(1, L + 1)])
    r2 = _ols_r2(target, X)
    if r2 is None:
        raise ConstantInput("squared deviations are constant")
    return float(len(target) * r2)


def stationarity_features(ts: TimeSeries) -> tuple[tuple[float, float], tuple[bool, bool]]:
    """((kpss_stat, arch_stat), defined-mask)."""
    y = ts.values
    out, ok = [0.0, 0.0], [False, False]
    for i, fn in enumerate((kpss_trend, arch_lm)):
        try:
            out[i], ok[i] = fn(y), True
        except (ConstantInput, TooShort):
            pass
    return tuple(out), tuple(ok)


def regression_features(ts: TimeSeries) -> tuple[float, float]:
    """(linearity, std_deriv1)."""
    y = ts.values
    n = len(y)
    X = np.column_stack([np.ones(n), np.arange(n, dtype=float)])
    r2 = _ols_r2(y, X)
    return (0.0 if r2 is None else min(1.0, r2)), float(np.std(np.diff(y), ddof=1))


def smoothing_param_features(ts: TimeSeries) -> tuple[tuple[float, ...], tuple[bool, ...]]:
    """Grid-search argmins (holt_alpha, holt_beta, hw_alpha, hw_beta, hw_gamma)."""
    y = ts.values
    g = SMOOTHING_GRID
    i, j = _kernels.holt_grid_argmin(y, g, g)
    values = [float(g[i]), float(g[j]), 0.0, 0.0, 0.0]
    mask = [True, True, False, False, False]
    if ts.seasonal_usable:
        a, b, c = _kernels.hw_grid_argmin(y, ts.period, g, g, g)
        values[2:] = [float(g[a]), float(g[b]), float(g[c])]
        mask[2:] = [True, True, True]
    return tuple(values), tuple(mask)
