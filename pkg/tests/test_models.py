from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize

from tsmeta import _kernels, models
from tsmeta.core import TimeSeries
from tsmeta.errors import FitFailure, InvalidAssignment
from tsmeta.models import ModelId
from tsmeta.models.arima import ar_is_stationary, fit_arima, hannan_rissanen
from tsmeta.tuning import default_space


def forecast(model_id, y, params=None, h=8, period=1):
    fm = models.fit(model_id, TimeSeries.from_values(y, period=period), params)
    return np.array(models.predict(fm, h).point_forecasts)


def test_ids_are_closed_and_ordered():
    assert [m.value for m in ModelId.ordered()] == sorted(m.value for m in ModelId)
    assert len(ModelId) == 6


def test_arima_010_is_last_value():
    y = np.random.default_rng(1).normal(size=60).cumsum() + 50
    assert np.all(forecast("ARIMA", y, {"p": 0, "d": 1, "q": 0}, h=10) == y[-1])


def test_seasonal_naive_tiles_last_cycle():
    y = [9.0, 9.0, 9.0, 9.0, 9.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]
    assert forecast("SEASONAL_NAIVE", y, h=6, period=4).tolist() == [5, 6, 7, 8, 5, 6]


def test_holt_winters_follows_generator():
    s = np.array([3.0, -1.0, 0.5, -2.5])
    t = np.arange(56)
    y = 20 + 0.5 * t + s[t % 4]
    fc = forecast("HOLT_WINTERS", y[:48], {"alpha": 0.5, "beta": 0.1, "gamma": 0.1}, h=8, period=4)
    assert np.max(np.abs(fc - y[48:]) / np.abs(y[48:])) <= 0.02


def test_holt_winters_initial_states():
    y = np.array([1.0, 5.0, 3.0, 7.0, 3.0, 9.0, 5.0, 11.0, 6.0])
    level, trend, season = _kernels.hw_init(y, 4)[:3]
    c1, c2 = y[:4], y[4:8]
    assert trend == pytest.approx((c2.mean() - c1.mean()) / 4)
    # level sits on the line through the cycle-1 mean, at the last cycle-1 point
    assert level == pytest.approx(c1.mean() + 1.5 * trend)
    assert np.allclose(season, c1 - (c1.mean() + trend * (np.arange(4) - 1.5)))
    assert abs(season.sum()) <= 1e-12


def test_theta_on_line():
    n = 60
    fc = forecast("THETA", 2 + 3 * np.arange(float(n)), {"theta": 2.0}, h=5)
    steps = np.arange(1, 6)
    truth = 2 + 3 * (n - 1 + steps)
    assert np.max(np.abs(fc - truth) / truth) <= 0.05
    # the theta=2 line equals the data, SES settles on the last value, and the
    # average with the trend line leaves half the slope as drift
    assert np.allclose(fc, 2 + 3 * (n - 1) + 1.5 * steps, atol=1e-8)


def test_holt_linear_constant_fixed_point():
    fc = forecast("HOLT_LINEAR", np.full(30, 12.5), {"alpha": 0.3, "beta": 0.05})
    assert np.allclose(fc, 12.5, atol=1e-6)


def test_stlf_naive_on_tiled_pattern():
    pattern = np.array([4.0, 8.0, 1.0, 6.0, 3.0, 2.0])
    y = np.tile(pattern, 8)
    fc = forecast("STLF", y, {"base_method": "naive", "alpha": 0.5}, h=9, period=6)
    assert np.allclose(fc, np.tile(pattern, 2)[:9], atol=1e-6)


def test_seasonal_models_need_two_cycles():
    y = np.arange(1.0, 8.0)
    for m, p in [("HOLT_WINTERS", {"alpha": 0.5, "beta": 0.1, "gamma": 0.1}),
                 ("STLF", {"base_method": "ses", "alpha": 0.5}), ("SEASONAL_NAIVE", None)]:
        with pytest.raises(FitFailure):
            models.fit(m, TimeSeries.from_values(y, period=4), p)


def test_params_are_validated():
    with pytest.raises(InvalidAssignment):
        models.fit("HOLT_LINEAR", TimeSeries.from_values(np.arange(1.0, 20.0)), {"alpha": 2.0, "beta": 0.1})


def test_arima_rejects_explosive_ar():
    assert not ar_is_stationary(np.array([1.0]))
    assert not ar_is_stationary(np.array([0.9995]))
    assert ar_is_stationary(np.array([0.5, 0.2]))
    y = 1.05 ** np.arange(60.0)
    with pytest.raises(FitFailure):
        fit_arima(y, 1, 0, 0)


def test_arima_too_short():
    with pytest.raises(FitFailure):
        models.fit("ARIMA", TimeSeries.from_values(np.arange(1.0, 11.0) ** 1.3), {"p": 3, "d": 2, "q": 3})


def test_arima_recovers_ar1_coefficient():
    rng = np.random.default_rng(7)
    x = np.zeros(3000)
    for t in range(1, len(x)):
        x[t] = 0.6 * x[t - 1] + rng.normal()
    state = fit_arima(x + 10, 1, 0, 0)
    assert abs(state["phi"][0] - 0.6) <= 0.05
    assert abs(state["mu"] - 10) <= 0.2


def test_hannan_rissanen_matches_ols_for_pure_ar():
    x = np.random.default_rng(3).normal(size=300)
    x = x - x.mean()
    phi, theta = hannan_rissanen(x, 2, 0)
    design = np.column_stack([x[1:-1], x[:-2]])
    ols = np.linalg.lstsq(design, x[2:], rcond=None)[0]
    assert theta.size == 0
    assert np.allclose(phi, ols, atol=1e-10)


@pytest.mark.parametrize("case", range(12))
def test_compiled_nelder_mead_matches_scipy(case):
    rng = np.random.default_rng(100 + case)
    p, q = int(rng.integers(0, 3)), int(rng.integers(1, 3))
    x = rng.normal(size=int(rng.integers(40, 150)))
    x = x - x.mean()
    phi, theta = hannan_rissanen(x, p, q)
    start = np.concatenate([phi, theta])
    scale = _kernels.arma_css(x, phi, theta)

    def objective(v):
        val = _kernels.arma_css(x, v[:p], v[p:]) / scale
        return val if np.isfinite(val) else 1e300

    ref = minimize(objective, start, method="Nelder-Mead",
                   options={"maxiter": 200, "xatol": 1e-6, "fatol": 1e-10})
    best, fbest = _kernels.arma_css_nelder_mead(x, start, p, scale, 200, 1e-6, 1e-10)
    assert np.allclose(best, ref.x, atol=1e-12, rtol=0)
    assert fbest == pytest.approx(ref.fun, abs=1e-12)


def test_arma_residuals_direct_recursion():
    rng = np.random.default_rng(5)
    x = rng.normal(size=30)
    phi, theta = np.array([0.4, -0.2]), np.array([0.3])
    e = np.zeros(30)
    for t in range(2, 30):
        e[t] = x[t] - phi[0] * x[t - 1] - phi[1] * x[t - 2] - theta[0] * e[t - 1]
    assert np.allclose(_kernels.arma_residuals(x, phi, theta)[2:], e[2:], atol=1e-12)


SHIFTABLE = [ ("HOLT_LINEAR", {"alpha": 0.4, "beta": 0.2}),
             ("HOLT_WINTERS", {"alpha": 0.3, "beta": 0.1, "gamma": 0.2}),
             ("STLF", {"base_method": "ses", "alpha": 0.6}), ("STLF", {"base_method": "linear", "alpha": 0.6}),
             ("SEASONAL_NAIVE", None)]


@pytest.mark.parametrize("model_id,params", SHIFTABLE)
@given(seed=st.integers(0, 10**6), c=st.floats(-1e3, 1e3))
@settings(max_examples=25, deadline=None)
def test_shift_equivariance(model_id, params, seed, c):
    rng = np.random.default_rng(seed)
    t = np.arange(48)
    y = 100 + 0.3 * t + 5 * np.sin(2 * np.pi * t / 6) + rng.normal(size=48)
    a = forecast(model_id, y, params, h=7, period=6)
    b = forecast(model_id, y + c, params, h=7, period=6)
    assert np.allclose(b, a + c, atol=1e-6, rtol=0)


@pytest.mark.parametrize("model_id", list(ModelId))
def test_fit_and_predict_are_deterministic(model_id):
    rng = np.random.default_rng(2)
    y = 80 + rng.normal(size=72).cumsum()
    ts = TimeSeries.from_values(y, period=12)
    params = default_space(model_id).sample(np.random.default_rng(9))
    try:
        first = models.predict(models.fit(model_id, ts, params), 12)
    except FitFailure:
        pytest.skip("sampled parameters do not fit this series")
    second = models.predict(models.fit(model_id, ts, params), 12)
    fm = models.fit(model_id, ts, params)
    assert first.point_forecasts == second.point_forecasts
    assert models.predict(fm, 12).point_forecasts == models.predict(fm, 12).point_forecasts
    assert np.all(np.isfinite(first.point_forecasts)) and len(first.point_forecasts) == 12


@given(seed=st.integers(0, 10**6), c=st.floats(-1e3, 1e3))
@settings(max_examples=25, deadline=None)
def test_theta_shift_equivariance_without_seasonal_adjustment(seed, c):
    y = 100 + 0.3 * np.arange(48) + np.random.default_rng(seed).normal(size=48).cumsum()
    a = forecast("THETA", y, {"theta": 1.3}, h=7)
    b = forecast("THETA", y + c, {"theta": 1.3}, h=7)
    assert np.allclose(b, a + c, atol=1e-6, rtol=0)


def test_theta_seasonal_adjustment_is_multiplicative():
    t = np.arange(72)
    y = (50 + 0.2 * t) * (1 + 0.2 * np.sin(2 * np.pi * t / 12))
    ts = TimeSeries.from_values(y, period=12)
    fm = models.fit("THETA", ts, {"theta": 2.0})
    assert fm.state["index"] is not None
    assert fm.state["index"].mean() == pytest.approx(1.0, abs=1e-9)
