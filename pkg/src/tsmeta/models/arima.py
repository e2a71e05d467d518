"""Non-seasonal ARIMA(p, d, q) by Hannan-Rissanen then conditional least squares."""

from __future__ import annotations

import numpy as np

from ..errors import FitFailure
from .._kernels import arma_css, arma_css_nelder_mead, arma_residuals

NM_MAX_ITER = 200
# AR roots must lie strictly outside this radius
ROOT_RADIUS = 1.001


def _lagmat(x: np.ndarray, lags: int, start: int) -> np.ndarray:
    """Rows t = start..len-1, columns x_{t-1}..x_{t-lags}."""
    return np.column_stack([x[start - i: len(x) - i] for i in range(1, lags + 1)])


def _ols(design: np.ndarray, target: np.ndarray) -> np.ndarray:
    if design.shape[0] <= design.shape[1]:
        raise FitFailure("not enough rows for the regression")
    if np.linalg.matrix_rank(design) < design.shape[1]:
        raise FitFailure("singular regression design")
    coef, *_ = np.linalg.lstsq(design, target, rcond=None)
    return coef


def hannan_rissanen(x: np.ndarray, p: int, q: int) -> tuple[np.ndarray, np.ndarray]:
    """Two-stage OLS estimate of zero-mean ARMA(p, q) coefficients."""
    n = len(x)
    k = max(8, p + q)
    if q == 0:
        if n - p < p + 2:
            raise FitFailure(f"series of {n} differenced points too short for AR({p})")
        coef = _ols(_lagmat(x, p, p), x[p:])
        return coef, np.zeros(0)
    if n - k < k + 2:
        raise FitFailure(f"series of {n} differenced points too short for the long AR({k})")
    long_coef = _ols(_lagmat(x, k, k), x[k:])
    resid = np.zeros(n)
    resid[k:] = x[k:] - _lagmat(x, k, k) @ long_coef
    start = k + max(p, q)
    if n - start < p + q + 2:
        raise FitFailure(f"series of {n} differenced points too short for ARMA({p},{q})")
    cols = []
    if p:
        cols.append(_lagmat(x, p, start))
    cols.append(_lagmat(resid, q, start))
    coef = _ols(np.column_stack(cols), x[start:])
    return coef[:p], coef[p:]


def ar_is_stationary(phi: np.ndarray) -> bool:
    if len(phi) == 0:
        return True
    # roots of 1 - phi_1 z - ... - phi_p z^p
    poly = np.concatenate([-phi[::-1], [1.0]])
    poly = np.trim_zeros(poly, "f")
    if len(poly) <= 1:
        return True
    return bool(np.all(np.abs(np.roots(poly)) > ROOT_RADIUS))


def fit_arima(y: np.ndarray, p: int, d: int, q: int) -> dict:
    y = np.asarray(y, dtype=float)
    w = np.diff(y, n=d) if d else y.copy()
    if len(w) < 2:
        raise FitFailure(f"{len(y)} points cannot be differenced {d} times")
    mu = float(w.mean()) if d == 0 else 0.0
    x = w - mu
    if p + q == 0:
        phi, theta = np.zeros(0), np.zeros(0)
    else:
        phi, theta = hannan_rissanen(x, p, q)
        start = np.concatenate([phi, theta])
        css0 = arma_css(x, phi, theta)
        if not np.isfinite(css0):
            raise FitFailure("divergent conditional sum of squares")
        scale = css0 if css0 > 0 else 1.0

        best, fbest = arma_css_nelder_mead(x, start, p, scale, NM_MAX_ITER, 1e-6, 1e-10)
        if np.isfinite(fbest) and fbest <= 1.0:
            phi, theta = best[:p].copy(), best[p:].copy()
        if not np.isfinite(arma_css(x, phi, theta)):
            raise FitFailure("divergent conditional sum of squares")
    if not ar_is_stationary(phi):
        raise FitFailure(f"AR polynomial has a root inside radius {ROOT_RADIUS}")
    resid = arma_residuals(x, phi, theta)
    if not np.all(np.isfinite(resid)):
        raise FitFailure("non-finite residuals")
    tails = [y[-1]]
    cur = y
    for _ in range(d - 1):
        cur = np.diff(cur)
        tails.append(cur[-1])
    keep = max(p, q, 1)
    return {
        "phi": phi,
        "theta": theta,
        "mu": mu,
        "d": d,
        "x_tail": x[-keep:].copy(),
        "e_tail": resid[-keep:].copy(),
        "level_tails": np.asarray(tails[:d], dtype=float),
    }


def forecast_arima(state: dict, h: int) -> np.ndarray:
    phi, theta = state["phi"], state["theta"]
    p, q = len(phi), len(theta)
    xs = list(state["x_tail"])
    es = list(state["e_tail"])
    out = np.empty(h)
    for k in range(h):
        val = 0.0
        for i in range(p):
            val += phi[i] * xs[-1 - i]
        for j in range(q):
            if k - j - 1 < 0:
                val += theta[j] * es[len(es) - 1 - (j - k)]
        xs.append(val)
        out[k] = val
    w = out + state["mu"]
    for last in state["level_tails"][::-1]:
        w = last + np.cumsum(w)
    return w
