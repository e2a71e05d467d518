"""Sample autocorrelation and partial autocorrelation."""

from __future__ import annotations

import numpy as np

from ..errors import ConstantInput, TooShort


def is_constant(x: np.ndarray) -> bool:
    # rounding noise on a constant run stays far below 1e-9 of its magnitude
    x = np.asarray(x, dtype=float)
    scale = np.max(np.abs(x)) if x.size else 0.0
    return bool(np.std(x) <= 1e-9 * scale) if scale > 0 else True


def acf(x, max_lag: int) -> np.ndarray:
    """Biased (divide-by-n) autocorrelations r_1..r_max_lag."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    if max_lag >= n:
        raise TooShort(f"max_lag {max_lag} must be below the length {n}")
    if is_constant(x):
        raise ConstantInput("autocorrelation of a constant sequence")
    z = x - x.mean()
    denom = np.dot(z, z)
    return np.array([np.dot(z[k:], z[: n - k]) / denom for k in range(1, max_lag + 1)])


def durbin_levinson(r: np.ndarray) -> np.ndarray:
    """Partial autocorrelations from autocorrelations r_1..r_K."""
    r = np.asarray(r, dtype=float)
    k_max = len(r)
    out = np.empty(k_max)
    phi = np.zeros(0)
    for k in range(1, k_max + 1):
        if k == 1:
            pk = r[0]
        else:
            num = r[k - 1] - np.dot(phi, r[k - 2:: -1][: k - 1])
            den = 1.0 - np.dot(phi, r[: k - 1])
            pk = num / den if den > 0 else 0.0
        phi = np.concatenate([phi - pk * phi[::-1], [pk]])
        out[k - 1] = pk
    return out


def pacf(x, max_lag: int) -> np.ndarray:
    return durbin_levinson(acf(x, max_lag))
