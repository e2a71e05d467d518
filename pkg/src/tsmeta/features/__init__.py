"""Feature extraction: decomposition, autocorrelation and the 40-entry vector."""

from .correlation import acf, pacf
from .decomposition import Decomposition, decompose
from .extract import FEATURE_NAMES, N_FEATURES, FeatureVector, extract_features
from .statistics import (
    acf_pacf_features,
    dependence_features,
    distribution_features,
    regression_features,
    smoothing_param_features,
    spectral_entropy,
    stationarity_features,
    stl_features,
    window_features,
)

__all__ = [
    "FEATURE_NAMES", "N_FEATURES", "Decomposition", "FeatureVector", "acf",
    "acf_pacf_features", "decompose", "dependence_features", "distribution_features",
    "extract_features", "pacf", "regression_features", "smoothing_param_features",
    "spectral_entropy", "stationarity_features", "stl_features", "window_features",
]
