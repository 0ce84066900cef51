"""Autocorrelation, partial autocorrelation and the augmented Dickey-Fuller test."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import InsufficientData, SingularDesign, ZeroVarianceError

# constant, no trend; asymptotic values
ADF_CRITICAL_VALUES = {"1%": -3.43, "5%": -2.86, "10%": -2.57}
# |t| below this drops the last lag during backward trimming (two-sided 10%)
_TRIM_T = 1.6448536269514722


def ols(X: np.ndarray, y: np.ndarray, op: str = "ols"):
    """Least squares with coefficient standard errors.

    Returns ``(beta, se, resid)``; raises SingularDesign on a rank-deficient
    design or a perfect fit (standard errors undefined).
    """
    n, k = X.shape
    if n <= k:
        raise SingularDesign(f"{n} observations for {k} regressors", op)
    q, r = np.linalg.qr(X)
    diag = np.abs(np.diag(r))
    if diag.min() <= diag.max() * max(n, k) * np.finfo(float).eps * 16:
        raise SingularDesign("design matrix is rank deficient", op)
    beta = np.linalg.solve(r, q.T @ y)
    resid = y - X @ beta
    ssr = float(resid @ resid)
    if ssr <= 1e-20 * max(1.0, float(y @ y)):
        raise SingularDesign("regression fits exactly; standard errors undefined", op)
    rinv = np.linalg.inv(r)
    se = np.sqrt(ssr / (n - k) * np.sum(rinv * rinv, axis=1))
    return beta, se, resid


def _check_series(x, n_lags: int, op: str) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if not 0 <= n_lags < x.size:
        raise InsufficientData(f"n_lags={n_lags} must be in [0, {x.size})", op)
    if np.ptp(x) == 0:
        raise ZeroVarianceError("constant series has no autocorrelation", op)
    return x


def acf(series, n_lags: int) -> np.ndarray:
    """Sample autocorrelation at lags 0..n_lags (biased autocovariance over lag 0)."""
    x = _check_series(series, n_lags, "arma_engine.acf")
    d = x - x.mean()
    n = d.size
    gamma = np.array([d[: n - k] @ d[k:] for k in range(n_lags + 1)]) / n
    return gamma / gamma[0]


def pacf(series, n_lags: int) -> np.ndarray:
    """Partial autocorrelation at lags 0..n_lags via the Durbin-Levinson recursion."""
    rho = acf(series, n_lags)
    out = np.zeros(n_lags + 1)
    out[0] = 1.0
    if n_lags == 0:
        return out
    phi = np.array([rho[1]])
    v = 1.0 - rho[1] ** 2
    out[1] = rho[1]
    for k in range(2, n_lags + 1):
        a = (rho[k] - phi @ rho[k - 1:0:-1]) / v
        phi = np.append(phi - a * phi[::-1], a)
        v *= 1.0 - a * a
        out[k] = a
    return out


@dataclass
class AdfResult:
    statistic: float
    lags_used: int
    n_obs: int
    critical_values: dict
    reject_unit_root: bool

    def to_dict(self) -> dict:
        return {
            "statistic": self.statistic,
            "lags_used": self.lags_used,
            "n_obs": self.n_obs,
            "critical_values": dict(self.critical_values),
            "reject_unit_root": self.reject_unit_root,
        }


def _adf_design(x: np.ndarray, lags: int, nobs: int):
    dx = np.diff(x)
    m = dx.size
    cols = [x[m - nobs:m], np.ones(nobs)]  # level F_{t-1}, constant
    for i in range(1, lags + 1):
        cols.append(dx[m - nobs - i:m - i])
    return np.column_stack(cols), dx[m - nobs:m]


def schwert_lag(n: int) -> int:
    return int(math.floor(12 * (n / 100) ** 0.25))


def adf_test(series, max_lag: int | str | None = "auto", autolag: bool = True) -> AdfResult:
    """Augmented Dickey-Fuller test with a constant and no trend.

    Regresses the first difference on the lagged level, a constant and
    lagged differences; the statistic is the t-ratio of the level term.
    The lag search starts at ``max_lag`` (Schwert's rule when ``"auto"``) and
    drops the highest lag while its |t| < 1.645, all candidates fitted on a
    common sample. ``autolag=False`` uses ``max_lag`` as is. Rejection is
    against the asymptotic 5% value, -2.86.
    """
    op = "arma_engine.adf_test"
    x = np.asarray(series, dtype=float)
    n = x.size
    if n < 20:
        raise InsufficientData(f"ADF needs at least 20 points, got {n}", op)
    cap = n // 2 - 3
    if max_lag in (None, "auto"):
        top = min(schwert_lag(n), cap)
    else:
        top = int(max_lag)
        if not 0 <= top <= cap:
            raise InsufficientData(f"max_lag={top} must be in [0, {cap}] for n={n}", op)
    lags = top
    if autolag:
        nobs = n - 1 - top
        lags = 0
        for k in range(top, 0, -1):
            X, y = _adf_design(x, k, nobs)
            beta, se, _ = ols(X, y, op)
            if abs(beta[-1] / se[-1]) >= _TRIM_T:
                lags = k
                break
    nobs = n - 1 - lags
    X, y = _adf_design(x, lags, nobs)
    beta, se, _ = ols(X, y, op)
    stat = float(beta[0] / se[0])
    return AdfResult(
        statistic=stat,
        lags_used=lags,
        n_obs=nobs,
        critical_values=dict(ADF_CRITICAL_VALUES),
        reject_unit_root=stat < ADF_CRITICAL_VALUES["5%"],
    )
