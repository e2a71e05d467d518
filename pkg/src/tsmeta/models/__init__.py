"""Candidate forecasting models behind a uniform ``fit`` / ``predict`` contract."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Any, Mapping

import numpy as np

from ..core import ForecastResult, TimeSeries
from ..errors import ConstantInput, FitFailure, InvalidAssignment
from ..features.correlation import acf
from ..features.decomposition import decompose, multiplicative_indices
from .. import _kernels as k
from .arima import fit_arima, forecast_arima


class ModelId(str, enum.Enum):
    THETA = "THETA"
    HOLT_LINEAR = "HOLT_LINEAR"
    HOLT_WINTERS = "HOLT_WINTERS"
    STLF = "STLF"
    ARIMA = "ARIMA"
    SEASONAL_NAIVE = "SEASONAL_NAIVE"

    def __str__(self) -> str:
        return self.value

    @classmethod
    def ordered(cls) -> list[ModelId]:
        """All ids in lexicographic order of their names (the tie-break order)."""
        return sorted(cls, key=lambda m: m.value)


@dataclass(frozen=True, eq=False)
class FittedModel:
    model_id: ModelId
    params: Any
    state: Mapping[str, Any]
    train_n: int


THETA_SEASON_Z = 1.645
_THETA_ALPHAS = np.linspace(0.01, 1.0, 100)


def _values_of(params) -> dict:
    if params is None:
        return {}
    if isinstance(params, Mapping):
        return dict(params)
    return dict(params.values)


def _ols_line(y: np.ndarray) -> tuple[float, float]:
    t = np.arange(len(y), dtype=float)
    tc = t - t.mean()
    slope = float(np.dot(tc, y - y.mean()) / np.dot(tc, tc))
    return float(y.mean() - slope * t.mean()), slope


def _require_seasonal(model_id: ModelId, ts: TimeSeries) -> int:
    if not ts.seasonal_usable:
        raise FitFailure(f"{model_id.value} needs at least two full seasonal cycles plus one point")
    return ts.period


def theta_has_seasonality(y: np.ndarray, m: int) -> bool:
    if m <= 1 or len(y) <= m:
        return False
    try:
        r = acf(y, m)
    except ConstantInput:
        return False
    se = np.sqrt((1.0 + 2.0 * np.sum(r[:-1] ** 2)) / len(y))
    return bool(abs(r[-1]) > THETA_SEASON_Z * se)


def _fit_theta(ts, vals):
    y = ts.values
    n = len(y)
    m = ts.effective_period
    index = multiplicative_indices(y, m) if theta_has_seasonality(y, m) else None
    adj = y / index[np.arange(n) % m] if index is not None else y
    icpt, slope = _ols_line(adj)
    theta = float(vals["theta"])
    line = theta * adj + (1.0 - theta) * (icpt + slope * np.arange(n))
    sse = k.ses_grid_sse(line, _THETA_ALPHAS)
    alpha = float(_THETA_ALPHAS[int(np.argmin(sse))])
    _, level = k.ses_filter(line, alpha)
    return {"icpt": icpt, "slope": slope, "level": float(level), "alpha": alpha,
            "index": index, "m": m, "n": n}


def _predict_theta(st, h):
    steps = np.arange(1, h + 1)
    t = st["n"] - 1 + steps
    fc = 0.5 * (st["icpt"] + st["slope"] * t) + 0.5 * st["level"]
    if st["index"] is not None:
        fc = fc * st["index"][t % st["m"]]
    return fc


def _fit_holt(ts, vals):
    _, level, trend = k.holt_filter(ts.values, float(vals["alpha"]), float(vals["beta"]))
    return {"level": float(level), "trend": float(trend)}


def _predict_holt(st, h):
    return st["level"] + st["trend"] * np.arange(1, h + 1)


def _fit_hw(ts, vals):
    m = _require_seasonal(ModelId.HOLT_WINTERS, ts)
    _, level, trend, seasonal = k.hw_filter(
        ts.values, m, float(vals["alpha"]), float(vals["beta"]), float(vals["gamma"]))
    return {"level": float(level), "trend": float(trend), "seasonal": seasonal, "m": m, "n": ts.n}


def _predict_hw(st, h):
    steps = np.arange(1, h + 1)
    phase = (st["n"] - 1 + steps) % st["m"]
    return st["level"] + st["trend"] * steps + st["seasonal"][phase]


STLF_BASES = ("naive", "ses", "linear")


def _fit_stlf(ts, vals):
    m = _require_seasonal(ModelId.STLF, ts)
    base = vals["base_method"]
    if base not in STLF_BASES:
        raise InvalidAssignment(f"unknown STLF base method {base!r}")
    dec = decompose(ts)
    adj = ts.values - dec.seasonal
    n = ts.n
    st = {"base": base, "last_cycle": dec.seasonal[n - m:].copy(), "m": m, "n": n}
    if base == "naive":
        st["level"], st["slope"] = float(adj[-1]), 0.0
    elif base == "ses":
        _, level = k.ses_filter(adj, float(vals["alpha"]))
        st["level"], st["slope"] = float(level), 0.0
    else:
        icpt, slope = _ols_line(adj)
        st["level"], st["slope"] = icpt + slope * (n - 1), slope
    return st


def _predict_stlf(st, h):
    steps = np.arange(1, h + 1)
    return st["level"] + st["slope"] * steps + st["last_cycle"][(steps - 1) % st["m"]]


def _fit_arima(ts, vals):
    return fit_arima(ts.values, int(vals["p"]), int(vals["d"]), int(vals["q"]))


def _fit_snaive(ts, vals):
    m = _require_seasonal(ModelId.SEASONAL_NAIVE, ts)
    return {"last_cycle": ts.values[-m:].copy(), "m": m}


def _predict_snaive(st, h):
    return st["last_cycle"][np.arange(h) % st["m"]]


_REGISTRY = {
    ModelId.THETA: (_fit_theta, _predict_theta),
    ModelId.HOLT_LINEAR: (_fit_holt, _predict_holt),
    ModelId.HOLT_WINTERS: (_fit_hw, _predict_hw),
    ModelId.STLF: (_fit_stlf, _predict_stlf),
    ModelId.ARIMA: (_fit_arima, forecast_arima),
    ModelId.SEASONAL_NAIVE: (_fit_snaive, _predict_snaive),
}

# horizon used to screen fitted states for numerical blow-up
_PROBE_H = 64


def fit(model_id, ts: TimeSeries, params=None) -> FittedModel:
    """Fit ``model_id`` on ``ts`` with a concrete hyper-parameter assignment.

    Raises :class:`FitFailure` when the model cannot be estimated (too short,
    singular regressions, non-stationary AR part, non-finite states).
    """
    from ..tuning.space import default_space

    model_id = ModelId(model_id)
    space = default_space(model_id)
    if params is None and not space.domains:
        params = space.assign({})
    vals = _values_of(params)
    space.validate(vals)
    fit_fn, predict_fn = _REGISTRY[model_id]
    if ts.n < 2:
        raise FitFailure("need at least two observations")
    with np.errstate(all="ignore"):
        state = fit_fn(ts, vals)
        probe = predict_fn(state, _PROBE_H)
    if not np.all(np.isfinite(probe)):
        raise FitFailure(f"{model_id.value} produced non-finite forecasts")
    if params is None or isinstance(params, Mapping):
        params = space.assign(vals)
    return FittedModel(model_id=model_id, params=params, state=state, train_n=ts.n)


def predict(fm: FittedModel, h: int) -> ForecastResult:
    if h < 1:
        raise ValueError("horizon must be at least 1")
    _, predict_fn = _REGISTRY[fm.model_id]
    values = predict_fn(fm.state, h)
    return ForecastResult(horizon=h, point_forecasts=tuple(values), model_id=fm.model_id, params=fm.params)


__all__ = ["ModelId", "FittedModel", "fit", "predict", "STLF_BASES"]
