from .model import (
    ArmaModel,
    ForecastReport,
    NonStationaryWarning,
    OrderSelection,
    evaluate,
    fit_arma,
    forecast,
    recursive_residuals,
    select_order,
)
from .stattools import ADF_CRITICAL_VALUES, AdfResult, acf, adf_test, pacf, schwert_lag

__all__ = [
    "ADF_CRITICAL_VALUES",
    "AdfResult",
    "ArmaModel",
    "ForecastReport",
    "NonStationaryWarning",
    "OrderSelection",
    "acf",
    "adf_test",
    "evaluate",
    "fit_arma",
    "forecast",
    "pacf",
    "recursive_residuals",
    "schwert_lag",
    "select_order",
]
