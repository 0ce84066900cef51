"""ARMA(p, q) frame-size model: Hannan-Rissanen fitting, forecasting, evaluation.

The model is ``F_t = c + e_t + sum(phi_i F_{t-i}) + sum(theta_i e_{t-i})``.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from ..errors import (
    InsufficientData,
    InsufficientHistory,
    OrderSelectionError,
    SingularDesign,
    XRTraceError,
)
from .stattools import acf, adf_test, pacf

logger = logging.getLogger(__name__)


class NonStationaryWarning(RuntimeWarning):
    pass


@dataclass
class ArmaModel:
    p: int
    q: int
    c: float
    phi: list[float]
    theta: list[float]
    sigma2: float
    n_obs: int = 0
    residuals: np.ndarray = field(default_factory=lambda: np.zeros(0), repr=False)

    def __post_init__(self):
        self.phi = [float(v) for v in self.phi]
        self.theta = [float(v) for v in self.theta]
        if len(self.phi) != self.p or len(self.theta) != self.q:
            raise ValueError("coefficient counts must match (p, q)")
        if self.sigma2 < 0:
            raise ValueError("sigma2 must be non-negative")

    def ar_roots(self) -> np.ndarray:
        # roots of 1 - phi_1 z - ... - phi_p z^p
        if self.p == 0:
            return np.zeros(0)
        return np.roots(np.r_[-np.array(self.phi)[::-1], 1.0])

    def ma_roots(self) -> np.ndarray:
        if self.q == 0:
            return np.zeros(0)
        return np.roots(np.r_[np.array(self.theta)[::-1], 1.0])

    def is_stationary(self, tol: float = 1e-6) -> bool:
        return bool(np.all(np.abs(self.ar_roots()) > 1 + tol))

    def is_invertible(self, tol: float = 1e-6) -> bool:
        return bool(np.all(np.abs(self.ma_roots()) > 1 + tol))

    def to_dict(self) -> dict:
        return {"p": self.p, "q": self.q, "c": self.c, "phi": list(self.phi),
                "theta": list(self.theta), "sigma2": self.sigma2}

    @classmethod
    def from_dict(cls, d: dict) -> "ArmaModel":
        return cls(p=int(d["p"]), q=int(d["q"]), c=float(d["c"]), phi=d["phi"],
                   theta=d["theta"], sigma2=float(d["sigma2"]))


def _regress(X: np.ndarray, y: np.ndarray, op: str) -> np.ndarray:
    beta, _, rank, _ = np.linalg.lstsq(X, y, rcond=None)
    if rank < X.shape[1] or X.shape[0] <= X.shape[1]:
        raise SingularDesign(f"design of shape {X.shape} has rank {rank}", op)
    return beta


def _design(x: np.ndarray, e: np.ndarray | None, p: int, q: int, start: int) -> np.ndarray:
    n = x.size
    cols = [np.ones(n - start)]
    cols += [x[start - i:n - i] for i in range(1, p + 1)]
    cols += [e[start - i:n - i] for i in range(1, q + 1)]
    return np.column_stack(cols)


def reflect_ma(theta) -> np.ndarray:
    """Move MA roots inside the unit circle to their reciprocals.

    The reflected polynomial has the same autocorrelation shape and keeps
    recursive residuals bounded.
    """
    theta = np.asarray(theta, dtype=float)
    if theta.size == 0:
        return theta
    roots = np.roots(np.r_[theta[::-1], 1.0])
    inside = np.abs(roots) < 1
    if not inside.any():
        return theta
    roots[inside] = 1 / np.conj(roots[inside])
    poly = np.poly(roots)  # leading coefficient 1, highest power first
    poly = np.real(poly[::-1] / poly[-1])  # constant term 1, ascending powers
    return poly[1:]


def recursive_residuals(x, c: float, phi, theta) -> np.ndarray:
    """Innovations implied by the model, zero before the first computable index."""
    x = [float(v) for v in x]
    p, q = len(phi), len(theta)
    e = [0.0] * len(x)
    for t in range(p, len(x)):
        pred = c
        for i in range(1, p + 1):
            pred += phi[i - 1] * x[t - i]
        for i in range(1, min(q, t) + 1):
            pred += theta[i - 1] * e[t - i]
        e[t] = x[t] - pred
    return np.array(e)


def long_ar_order(p: int, q: int) -> int:
    return max(20, 2 * (p + q))


def min_burn_in(p: int, q: int) -> int:
    """First usable regression row for an ARMA(p, q) fit."""
    if q == 0:
        return p
    return long_ar_order(p, q) + max(p, q)


def fit_arma(series, p: int, q: int, burn_in: int | None = None, check_stationarity: bool = True) -> ArmaModel:
    """Fit ARMA(p, q) by Hannan-Rissanen with one refinement pass.

    1. A long AR (order ``max(20, 2(p+q))``) fitted by least squares gives
       residual proxies.
    2. ``F_t`` is regressed on a constant, ``p`` lagged values and ``q``
       lagged proxies.
    3. Residuals are recomputed recursively from that model and the
       regression is repeated with them.

    ``sigma2`` is the mean squared residual of the final regression.
    ``burn_in`` moves the first regression row later, which lets a grid of
    orders share one estimation sample.
    """
    op = "arma_engine.fit_arma"
    x = np.asarray(series, dtype=float)
    n = x.size
    if p < 0 or q < 0:
        raise ValueError("orders must be non-negative")
    if n < 10 * (p + q + 1):
        raise InsufficientData(f"ARMA({p},{q}) needs at least {10 * (p + q + 1)} points, got {n}", op)
    start = max(min_burn_in(p, q), burn_in or 0)
    if n - start <= p + q + 1:
        raise InsufficientData(f"only {n - start} usable rows after burn-in {start}", op)

    if p == 0 and q == 0:
        s = x[start:]
        c = float(s.mean())
        resid = s - c
        return ArmaModel(0, 0, c, [], [], float(np.mean(resid ** 2)), n_obs=s.size, residuals=resid)

    if check_stationarity and n >= 20:
        try:
            if not adf_test(x).reject_unit_root:
                warnings.warn("series fails the ADF stationarity check; ARMA fit may be unreliable",
                              NonStationaryWarning, stacklevel=2)
        except XRTraceError:
            pass

    # grid searches fit many over-parameterized candidates; keep them quiet
    log = logger.warning if check_stationarity else logger.debug
    y = x[start:]
    if q == 0:
        beta = _regress(_design(x, None, p, 0, start), y, op)
        resid = y - _design(x, None, p, 0, start) @ beta
    else:
        m = long_ar_order(p, q)
        ar_beta = _regress(_design(x, None, m, 0, m), x[m:], op)
        proxy = np.zeros(n)
        proxy[m:] = x[m:] - _design(x, None, m, 0, m) @ ar_beta
        X = _design(x, proxy, p, q, start)
        beta = _regress(X, y, op)
        theta = beta[1 + p:]
        if ArmaModel(p, q, 0.0, beta[1:1 + p], theta, 0.0).is_invertible():
            e = recursive_residuals(x, beta[0], beta[1:1 + p], theta)
            X = _design(x, e, p, q, start)
            beta = _regress(X, y, op)
        else:
            log("ARMA(%d,%d) first-stage MA part is not invertible; skipping refinement", p, q)
        resid = y - X @ beta
        if not ArmaModel(p, q, 0.0, beta[1:1 + p], beta[1 + p:], 0.0).is_invertible():
            log("ARMA(%d,%d) fitted MA part is not invertible; reflecting its roots", p, q)
            beta = np.r_[beta[:1 + p], reflect_ma(beta[1 + p:])]

    model = ArmaModel(p, q, float(beta[0]), beta[1:1 + p], beta[1 + p:], float(np.mean(resid ** 2)),
                      n_obs=y.size, residuals=resid)
    if not model.is_stationary():
        log("fitted ARMA(%d,%d) AR polynomial has a root on or inside the unit circle", p, q)
    return model


def forecast(model: ArmaModel, history, residual_history, steps: int = 1) -> list[float]:
    """Iterate the model forward with future innovations set to zero.

    ``history`` and ``residual_history`` are chronological; only the last
    ``p`` and ``q`` entries are used. Multi-step forecasts feed their own
    predictions back as history.
    """
    op = "arma_engine.forecast"
    history = list(history)
    residual_history = list(residual_history)
    if len(history) < model.p:
        raise InsufficientHistory(f"need {model.p} past values, got {len(history)}", op)
    if len(residual_history) < model.q:
        raise InsufficientHistory(f"need {model.q} past residuals, got {len(residual_history)}", op)
    h = [float(v) for v in history[len(history) - model.p:]]
    e = [float(v) for v in residual_history[len(residual_history) - model.q:]]
    out = []
    for _ in range(steps):
        pred = model.c
        for i, phi in enumerate(model.phi, start=1):
            pred += phi * h[-i]
        for i, theta in enumerate(model.theta, start=1):
            pred += theta * e[-i]
        out.append(pred)
        if model.p:
            h.append(pred)
        if model.q:
            e.append(0.0)
    return out


@dataclass
class OrderSelection:
    p: int
    q: int
    aic: dict[tuple[int, int], float | None]
    acf: np.ndarray
    pacf: np.ndarray
    n_eff: int

    def aic_table(self) -> list[dict]:
        return [{"p": p, "q": q, "aic": v} for (p, q), v in sorted(self.aic.items())]


def select_order(series, max_p: int = 5, max_q: int = 5, n_lags: int = 20) -> OrderSelection:
    """Grid-search (p, q) by AIC = n ln(sigma2) + 2(p + q + 1) on a common sample.

    ACF and PACF values are returned alongside the AIC grid so the orders
    can also be read off the correlograms by hand.
    """
    x = np.asarray(series, dtype=float)
    n_lags = min(n_lags, x.size - 1)
    r = acf(x, n_lags)
    pr = pacf(x, n_lags)
    grid = [(p, q) for p in range(max_p + 1) for q in range(max_q + 1)
            if x.size >= 10 * (p + q + 1)]
    if not grid:
        raise OrderSelectionError("series too short for any candidate order", "arma_engine.select_order")
    burn_in = max(min_burn_in(p, q) for p, q in grid)
    n_eff = x.size - burn_in
    aic: dict[tuple[int, int], float | None] = {}
    best = None
    for p in range(max_p + 1):
        for q in range(max_q + 1):
            try:
                m = fit_arma(x, p, q, burn_in=burn_in, check_stationarity=False)
            except XRTraceError:
                aic[(p, q)] = None
                continue
            val = n_eff * math.log(m.sigma2) + 2 * (p + q + 1) if m.sigma2 > 0 else -math.inf
            aic[(p, q)] = val
            if best is None or val < aic[best]:
                best = (p, q)
    if best is None:
        raise OrderSelectionError("every candidate fit failed", "arma_engine.select_order")
    return OrderSelection(best[0], best[1], aic, r, pr, n_eff)


@dataclass
class ForecastReport:
    split_fraction: float
    train_size: int
    test_start: int
    test_end: int
    predictions: np.ndarray
    actuals: np.ndarray
    mae: float
    rmse: float
    mape: float | None
    model: ArmaModel

    def to_dict(self) -> dict:
        return {
            "split_fraction": self.split_fraction,
            "train": [0, self.train_size],
            "test": [self.test_start, self.test_end],
            "n_test": int(self.actuals.size),
            "mae": self.mae,
            "rmse": self.rmse,
            "mape": self.mape,
        }


def evaluate(series, p: int, q: int, split: float = 0.7, model: ArmaModel | None = None) -> ForecastReport:
    """Fit on the first ``floor(split * n)`` points, then walk forward one step at a time.

    Each test prediction sees the true history; innovations are updated from
    the fitted model as actual values arrive. MAPE (percent) skips zero
    actuals and is None when all are zero.
    """
    op = "arma_engine.evaluate"
    x = np.asarray(series, dtype=float)
    n = x.size
    n_train = int(math.floor(split * n))
    if not 0 < split < 1 or n_train < max(p, 1) or n_train >= n:
        raise InsufficientData(f"split {split} of {n} points leaves no usable train/test portion", op)
    if model is None:
        model = fit_arma(x[:n_train], p, q)
    e = recursive_residuals(x, model.c, model.phi, model.theta)
    preds = np.empty(n - n_train)
    for k, t in enumerate(range(n_train, n)):
        preds[k] = forecast(model, x[t - model.p:t], e[t - model.q:t], 1)[0]
    actual = x[n_train:]
    err = actual - preds
    nz = actual != 0
    return ForecastReport(
        split_fraction=split,
        train_size=n_train,
        test_start=n_train,
        test_end=n,
        predictions=preds,
        actuals=actual,
        mae=float(np.mean(np.abs(err))),
        rmse=float(np.sqrt(np.mean(err ** 2))),
        mape=float(np.mean(np.abs(err[nz] / actual[nz])) * 100) if nz.any() else None,
        model=model,
    )
