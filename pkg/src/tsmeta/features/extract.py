"""The fixed 40-entry feature vector and its extractor."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import TimeSeries
from ..errors import ConstantInput, TooShort, ValidationError
from . import statistics as st
from .decomposition import decompose

FEATURE_NAMES: tuple[str, ...] = (
    "length", "mean", "variance", "spectral_entropy", "lumpiness", "stability",
    "trend_strength", "seasonal_strength", "spikiness", "peak", "trough", "flat_spots",
    "level_shift_max", "level_shift_index", "hurst", "acf_y_1", "acf_diff1_1",
    "acf_diff2_1", "acf_y_sumsq5", "acf_diff1_sumsq5", "acf_diff2_sumsq5",
    "acf_seasonal", "pacf_y_sumsq5", "pacf_diff1_sumsq5", "pacf_diff2_sumsq5",
    "pacf_seasonal", "first_min_ac", "first_zero_ac", "linearity", "std_deriv1",
    "crossing_points", "binarize_mean", "arch_stat", "histogram_mode", "kpss_stat",
    "holt_alpha", "holt_beta", "hw_alpha", "hw_beta", "hw_gamma",
)
N_FEATURES = len(FEATURE_NAMES)
assert N_FEATURES == 40

_INDEX = {name: i for i, name in enumerate(FEATURE_NAMES)}


@dataclass(frozen=True, eq=False)
class FeatureVector:
    values: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        mask = np.array(self.mask, dtype=bool)
        if values.shape != (N_FEATURES,) or mask.shape != (N_FEATURES,):
            raise ValidationError(f"feature vector must have exactly {N_FEATURES} entries")
        if not np.all(np.isfinite(values)):
            raise ValidationError("feature values must be finite")
        values[~mask] = 0.0
        values.setflags(write=False)
        mask.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "mask", mask)

    def __getitem__(self, name: str) -> float:
        return float(self.values[_INDEX[name]])

    def defined(self, name: str) -> bool:
        return bool(self.mask[_INDEX[name]])

    def as_dict(self) -> dict[str, float]:
        return {n: float(v) for n, v in zip(FEATURE_NAMES, self.values)}

    def mask_dict(self) -> dict[str, bool]:
        return {n: bool(v) for n, v in zip(FEATURE_NAMES, self.mask)}

    def to_json(self) -> dict:
        return {"features": self.as_dict(), "mask": self.mask_dict()}

    @classmethod
    def from_dicts(cls, features: dict, mask: dict) -> FeatureVector:
        if set(features) != set(FEATURE_NAMES) or set(mask) != set(FEATURE_NAMES):
            raise ValidationError("feature names do not match the 40-entry schema")
        return cls(np.array([features[n] for n in FEATURE_NAMES]),
                   np.array([mask[n] for n in FEATURE_NAMES]))


def extract_features(ts: TimeSeries) -> FeatureVector:
    """Compute every feature for ``ts``; undefined ones become masked zeros.

    Never raises for a valid series. The result is a pure function of the
    series values and period.
    """
    y = ts.values
    out: dict[str, float] = {}
    ok: dict[str, bool] = {}

    def put(names, values, mask=None):
        mask = mask if mask is not None else (True,) * len(names)
        for name, v, m in zip(names, values, mask):
            good = bool(m) and np.isfinite(v)
            out[name] = float(v) if good else 0.0
            ok[name] = good

    put(("length", "mean", "variance"), (len(y), float(np.mean(y)), float(np.var(y, ddof=1))))

    try:
        put(("spectral_entropy",), (st.spectral_entropy(ts),))
    except ConstantInput:
        put(("spectral_entropy",), (0.0,), (False,))

    names = ("lumpiness", "stability", "level_shift_max", "level_shift_index")
    try:
        put(names, st.window_features(ts))
    except TooShort:
        put(names, (0.0,) * 4, (False,) * 4)

    stl_vals = st.stl_features(decompose(ts))
    seasonal = ts.effective_period > 1
    put(("trend_strength", "seasonal_strength", "spikiness", "peak", "trough"), stl_vals,
        (True, seasonal, True, seasonal, seasonal))

    flat, mode, binmean, crossings = st.distribution_features(ts)
    put(("flat_spots", "histogram_mode", "binarize_mean", "crossing_points"),
        (flat, mode, binmean, crossings))

    dep, dep_ok = st.dependence_features(ts)
    put(("hurst", "first_min_ac", "first_zero_ac"), dep, dep_ok)

    acf_vals, acf_ok = st.acf_pacf_features(ts)
    put(FEATURE_NAMES[15:26], acf_vals, acf_ok)

    put(("linearity", "std_deriv1"), st.regression_features(ts))

    stat_vals, stat_ok = st.stationarity_features(ts)
    put(("kpss_stat", "arch_stat"), stat_vals, stat_ok)

    smooth, smooth_ok = st.smoothing_param_features(ts)
    put(("holt_alpha", "holt_beta", "hw_alpha", "hw_beta", "hw_gamma"), smooth, smooth_ok)

    return FeatureVector(np.array([out[n] for n in FEATURE_NAMES]),
                         np.array([ok[n] for n in FEATURE_NAMES]))
