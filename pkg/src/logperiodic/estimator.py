"""Scikit-learn style estimator wrapping the scan + refine pipeline.

`LogPeriodicRegressor` follows the sklearn contract: constructor arguments
are stored verbatim, all work happens in ``fit``, fitted state lives in
trailing-underscore attributes, and ``get_params``/``set_params`` come
from ``BaseEstimator`` so the model composes with model-selection tools.
X is the observation time in days (one column); y is the price level.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.exceptions import NotFittedError

from .fit import (
    ConsistencyThresholds,
    FitConfig,
    default_tc_range,
    fit_series,
)
from .model import evaluate
from .series import TimeSeries


def _as_times(X) -> np.ndarray:
    t = np.asarray(X, dtype=float)
    if t.ndim == 2 and t.shape[1] == 1:
        t = t[:, 0]
    if t.ndim != 1:
        raise ValueError(f"X must be a single column of times, got shape {t.shape}")
    return t


class LogPeriodicRegressor(RegressorMixin, BaseEstimator):
    """Least-squares log-periodic critical-time model.

    Parameters mirror :class:`logperiodic.fit.FitConfig`; ``tc_range=None``
    derives the search range from the data window.  After ``fit`` the
    estimator exposes ``params_`` (the fitted parameter set), ``result_``
    and ``report_`` (the full fit result and grid scan report), ``tc_``,
    ``rmse_`` and ``consistent_``.
    """

    def __init__(
        self,
        phase: str = "accelerating",
        tc_range: tuple[float, float] | None = None,
        tc_step: float = 1.0,
        alpha_range: tuple[float, float] = (-1.0, 1.0),
        alpha_step: float = 0.05,
        lambda_mode: str = "fixed",
        lam: float = 2.0,
        lambda_range: tuple[float, float] = (1.5, 3.0),
        lambda_step: float = 0.05,
        tc_margin: float = 5.0,
        refine: bool = True,
        use_log_price: bool = False,
        top_k: int = 5,
        thresholds: ConsistencyThresholds | None = None,
        workers: int = 1,
    ):
        self.phase = phase
        self.tc_range = tc_range
        self.tc_step = tc_step
        self.alpha_range = alpha_range
        self.alpha_step = alpha_step
        self.lambda_mode = lambda_mode
        self.lam = lam
        self.lambda_range = lambda_range
        self.lambda_step = lambda_step
        self.tc_margin = tc_margin
        self.refine = refine
        self.use_log_price = use_log_price
        self.top_k = top_k
        self.thresholds = thresholds
        self.workers = workers

    def _config(self, series: TimeSeries) -> FitConfig:
        tc_range = self.tc_range
        if tc_range is None:
            tc_range = default_tc_range(series, self.phase, self.tc_margin)
        return FitConfig(
            phase=self.phase,
            tc_range=tc_range,
            tc_step=self.tc_step,
            alpha_range=self.alpha_range,
            alpha_step=self.alpha_step,
            lambda_mode=self.lambda_mode,
            lam=self.lam,
            lambda_range=self.lambda_range,
            lambda_step=self.lambda_step,
            tc_margin=self.tc_margin,
            refine=self.refine,
            use_log_price=self.use_log_price,
            top_k=self.top_k,
            thresholds=self.thresholds or ConsistencyThresholds(),
        )

    def fit(self, X, y):
        t = _as_times(X)
        values = np.asarray(y, dtype=float)
        if values.shape != t.shape:
            raise ValueError("X and y must have matching lengths")
        order = np.argsort(t, kind="stable")
        series = TimeSeries(t[order], values[order])
        config = self._config(series)
        result, report = fit_series(series, config, workers=self.workers)
        self.config_ = config
        self.result_ = result
        self.report_ = report
        self.params_ = result.params
        self.tc_ = result.params.tc
        self.rmse_ = result.rmse
        self.consistent_ = result.consistent
        return self

    def predict(self, X) -> np.ndarray:
        if not hasattr(self, "params_"):
            raise NotFittedError(
                "This LogPeriodicRegressor instance is not fitted yet."
            )
        values = evaluate(self.params_, _as_times(X))
        if self.use_log_price:
            values = np.exp(values)
        return np.asarray(values, dtype=float)
