import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xrtrace.arma import (
    ArmaModel,
    acf,
    adf_test,
    evaluate,
    fit_arma,
    forecast,
    pacf,
    schwert_lag,
    select_order,
)
from xrtrace.errors import InsufficientData, InsufficientHistory, SingularDesign, ZeroVarianceError


def simulate(phi, theta, n, seed, c=0.0, sigma=1.0, burn=500):
    rng = np.random.default_rng(seed)
    e = rng.normal(0, sigma, n + burn)
    x = np.zeros(n + burn)
    for t in range(n + burn):
        v = c + e[t]
        for i, a in enumerate(phi, 1):
            if t - i >= 0:
                v += a * x[t - i]
        for j, b in enumerate(theta, 1):
            if t - j >= 0:
                v += b * e[t - j]
        x[t] = v
    return x[burn:]


# --- ADF -----------------------------------------------------------------------

def test_adf_matches_reference_implementation():
    adfuller = pytest.importorskip("statsmodels.tsa.stattools").adfuller
    for seed in range(5):
        for x in (np.random.default_rng(seed).standard_normal(500),
                  np.cumsum(np.random.default_rng(seed).standard_normal(500))):
            # the reference library rounds the Schwert bound up; pass the floored bound explicitly
            ref = adfuller(x, maxlag=schwert_lag(x.size), regression="c", autolag="t-stat")
            ours = adf_test(x)
            assert ours.statistic == pytest.approx(ref[0], rel=1e-9, abs=1e-9)
            assert ours.lags_used == ref[2]
            assert ours.n_obs == ref[3]


def test_adf_white_noise_and_random_walk():
    z = np.random.default_rng(42).standard_normal(500)
    assert adf_test(z).reject_unit_root
    assert not adf_test(np.cumsum(z)).reject_unit_root


def test_adf_ramp_does_not_reject():
    try:
        res = adf_test(np.arange(200, dtype=float))
    except SingularDesign:
        return
    assert not res.reject_unit_root


def test_adf_critical_values_and_short_series():
    res = adf_test(np.random.default_rng(0).standard_normal(100))
    assert res.critical_values == {"1%": -3.43, "5%": -2.86, "10%": -2.57}
    with pytest.raises(InsufficientData):
        adf_test(np.arange(10.0))


def test_adf_fixed_lag():
    x = np.random.default_rng(1).standard_normal(300)
    res = adf_test(x, max_lag=3, autolag=False)
    assert res.lags_used == 3
    assert res.n_obs == 300 - 1 - 3


@settings(max_examples=25, deadline=None)
@given(st.floats(0.01, 1000), st.floats(-1e4, 1e4), st.integers(0, 1000))
def test_adf_affine_invariant(a, b, seed):
    x = np.random.default_rng(seed).standard_normal(200)
    ref = adf_test(x)
    for s in (a, -a):
        res = adf_test(s * x + b)
        assert res.statistic == pytest.approx(ref.statistic, rel=1e-6, abs=1e-6)


# --- ACF / PACF --------------------------------------------------------------------

def test_acf_pacf_basics():
    x = np.random.default_rng(3).standard_normal(300)
    r, pr = acf(x, 10), pacf(x, 10)
    assert r[0] == 1.0
    assert pr[1] == pytest.approx(r[1], abs=1e-15)
    assert np.all(np.abs(r) <= 1) and np.all(np.abs(pr) <= 1)


def test_acf_pacf_match_reference():
    sm = pytest.importorskip("statsmodels.tsa.stattools")
    x = simulate([0.4, -0.2], [0.5], 800, seed=5)
    np.testing.assert_allclose(acf(x, 15), sm.acf(x, nlags=15, fft=False), atol=1e-12)
    np.testing.assert_allclose(pacf(x, 15), sm.pacf(x, nlags=15, method="ldb"), atol=1e-12)


def test_ar1_correlogram():
    n = 5000
    x = simulate([0.5], [], n, seed=7)
    assert 0.45 <= acf(x, 5)[1] <= 0.55
    assert abs(pacf(x, 5)[2]) < 0.05


def test_pacf_cuts_off_after_ar_order():
    n = 5000
    x = simulate([0.5, -0.3], [], n, seed=8)
    assert np.all(np.abs(pacf(x, 15)[3:]) < 3 / math.sqrt(n))


def test_constant_series_correlogram():
    with pytest.raises(ZeroVarianceError):
        acf(np.ones(50), 5)
    with pytest.raises(ZeroVarianceError):
        pacf(np.ones(50), 5)


# --- fitting -----------------------------------------------------------------------

def test_fit_constant_white():
    m = fit_arma(np.full(100, 7.0), 0, 0)
    assert m.c == 7.0 and m.sigma2 == 0.0


def test_fit_arma11_recovery():
    x = simulate([0.6], [0.3], 5000, seed=0)
    m = fit_arma(x, 1, 1)
    assert abs(m.phi[0] - 0.6) < 0.1
    assert abs(m.theta[0] - 0.3) < 0.15
    assert m.is_stationary() and m.is_invertible()


def test_fit_white_noise_ar1():
    n = 5000
    x = np.random.default_rng(12).standard_normal(n)
    assert abs(fit_arma(x, 1, 0).phi[0]) < 3 / math.sqrt(n)


@pytest.mark.parametrize("order", [(1, 0), (2, 1), (0, 2)])
def test_training_residual_mean_is_zero(order):
    x = simulate([0.3, 0.2], [0.4], 2000, seed=3, c=5.0)
    m = fit_arma(x, *order)
    assert abs(np.mean(m.residuals)) < 1e-8


def test_too_short_series():
    with pytest.raises(InsufficientData):
        fit_arma(np.random.default_rng(0).standard_normal(50), 3, 3)


def test_model_dict_round_trip():
    m = fit_arma(simulate([0.5], [0.2], 1000, seed=1), 1, 1)
    back = ArmaModel.from_dict(m.to_dict())
    assert (back.p, back.q, back.c, back.sigma2) == (m.p, m.q, m.c, m.sigma2)
    np.testing.assert_array_equal(back.phi, m.phi)


# --- order selection ---------------------------------------------------------------

def test_select_order_ar2():
    x = simulate([0.5, -0.3], [], 5000, seed=2)
    sel = select_order(x, 4, 4)
    assert sel.p in (2, 3) and sel.q in (0, 1)


def test_select_order_white_noise():
    x = np.random.default_rng(6).standard_normal(2000)
    assert (select_order(x, 3, 3).p, select_order(x, 3, 3).q) == (0, 0)


def test_select_order_agrees_with_reference_aic():
    arima = pytest.importorskip("statsmodels.tsa.arima.model")
    x = simulate([0.5, -0.3], [], 3000, seed=4)
    best, best_aic = None, math.inf
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for p in range(3):
            for q in range(2):
                aic = arima.ARIMA(x, order=(p, 0, q)).fit().aic
                if aic < best_aic:
                    best, best_aic = (p, q), aic
    sel = select_order(x, 2, 1)
    assert (sel.p, sel.q) == best


# --- forecasting --------------------------------------------------------------------

def test_forecast_examples():
    ar = ArmaModel(1, 0, 1.0, np.array([0.5]), np.array([]), 1.0)
    assert forecast(ar, [2.0], [], 1) == [2.0]
    ma = ArmaModel(0, 1, 0.0, np.array([]), np.array([0.4]), 1.0)
    assert forecast(ma, [], [1.0], 2) == pytest.approx([0.4, 0.0])
    m = ArmaModel(2, 2, 0.0, np.array([0.3, 0.1]), np.array([0.2, 0.1]), 1.0)
    assert forecast(m, [0.0, 0.0], [0.0, 0.0], 5) == [0.0] * 5


def test_forecast_insufficient_history():
    m = ArmaModel(2, 1, 0.0, np.array([0.3, 0.1]), np.array([0.2]), 1.0)
    with pytest.raises(InsufficientHistory):
        forecast(m, [1.0], [0.0], 1)
    with pytest.raises(InsufficientHistory):
        forecast(m, [1.0, 2.0], [], 1)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-0.9, 0.9), min_size=1, max_size=4), st.floats(-5, 5), st.floats(0.1, 10),
       st.floats(-100, 100), st.integers(1, 5))
def test_forecast_linear_for_ar(phi, c, a, b, steps):
    phi = np.array(phi)
    hist = np.random.default_rng(0).standard_normal(len(phi))
    base = ArmaModel(len(phi), 0, c, phi, np.array([]), 1.0)
    # y = a x + b satisfies y_t = a c + b (1 - sum phi) + sum phi y_{t-i}
    moved = ArmaModel(len(phi), 0, a * c + b * (1 - phi.sum()), phi, np.array([]), 1.0)
    expect = [a * v + b for v in forecast(base, hist, [], steps)]
    assert forecast(moved, a * hist + b, [], steps) == pytest.approx(expect, rel=1e-9, abs=1e-9)


def test_evaluate_constant_series():
    rep = evaluate(np.full(100, 5.0), 0, 0)
    assert np.all(rep.predictions == 5.0)
    assert rep.rmse == 0.0
    assert (rep.train_size, rep.test_start, rep.test_end) == (70, 70, 100)


def test_evaluate_iid_sizes_floor():
    from xrtrace.analysis import analyze_trace
    from xrtrace.generate import TrafficModel, generate_trace
    m = TrafficModel(duration_s=40.0, seed=3)
    sizes = analyze_trace(generate_trace(m)).series.sizes.astype(float)
    rep = evaluate(sizes, 1, 0)
    assert rep.rmse <= 1.10 * m.frame_size[1]


def test_reflect_ma():
    from xrtrace.arma.model import reflect_ma
    assert reflect_ma([2.0]) == pytest.approx([0.5])
    theta = np.array([0.3, 0.2])
    assert reflect_ma(theta) is not None and np.allclose(reflect_ma(theta), theta)
    # reflected MA(2) keeps the autocorrelation at lag 1 and 2
    def rho(t):
        t = np.r_[1.0, t]
        g = [np.dot(t[: len(t) - k], t[k:]) for k in range(3)]
        return np.array(g[1:]) / g[0]
    bad = np.array([-2.5, 1.2])
    fixed = reflect_ma(bad)
    assert ArmaModel(0, 2, 0.0, [], fixed, 1.0).is_invertible()
    np.testing.assert_allclose(rho(fixed), rho(bad), atol=1e-12)


def test_overfit_white_noise_stays_finite():
    x = np.random.default_rng(0).standard_normal(600)
    rep = evaluate(x, 5, 4)
    assert rep.model.is_invertible()
    assert math.isfinite(rep.rmse)
