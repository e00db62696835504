"""Forward scenarios: extended model curve, critical date, uncertainty band.

A scenario extends a fitted curve daily from the window start out to a
requested horizon, stopping short of the critical time by the fitting
margin.  The band is a residual-scale heuristic (+/- 2 standard deviations
of the fit residuals, constant in value units), not a calibrated forecast
interval; the model is deliberately not evaluated past the critical time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date
from typing import NamedTuple

import numpy as np

from .errors import DomainError
from .fit import DEFAULT_TC_MARGIN, FitResult
from .model import Extremum, ModelCurve, Phase, evaluate, extrema_schedule, sample_curve
from .series import TimeSeries, Window, offset_date


@dataclass(frozen=True)
class Scenario:
    """A forward extension of a fitted model with its uncertainty band."""

    fit: FitResult
    curve: ModelCurve
    band_halfwidth: float
    tc_date: date
    extrema: tuple[Extremum, ...]
    truncated: bool

    def __post_init__(self) -> None:
        if not (math.isfinite(self.band_halfwidth) and self.band_halfwidth >= 0.0):
            raise ValueError("band_halfwidth must be finite and >= 0")

    @property
    def band_low(self) -> np.ndarray:
        return self.curve.value - self.band_halfwidth

    @property
    def band_high(self) -> np.ndarray:
        return self.curve.value + self.band_halfwidth


class ComparisonReport(NamedTuple):
    coverage_fraction: float
    max_deviation: float
    n_points: int


def build_scenario(
    series: TimeSeries,
    fit: FitResult,
    horizon: float,
    *,
    tc_margin: float = DEFAULT_TC_MARGIN,
) -> Scenario:
    """Sample the fitted curve daily from the window start past its end.

    ``horizon`` is the number of days to extend beyond the last
    observation.  For an accelerating phase the curve never crosses
    tc - tc_margin; a request that would is truncated there and flagged.
    The band halfwidth is twice the standard deviation of the fit
    residuals, so a noiseless fit gets a zero-width band.
    """
    if not horizon >= 0.0:
        raise DomainError(f"horizon must be >= 0 days, got {horizon}")
    params = fit.params
    requested_end = series.t_end + horizon
    if params.phase is Phase.ACCELERATING:
        end = min(requested_end, params.tc - tc_margin)
    else:
        end = requested_end
    truncated = requested_end > end
    n = int(math.floor(end - series.t_start + 1e-9))
    if n < 1:
        raise DomainError(
            "scenario span is empty: the critical time sits too close to the window start"
        )
    t = series.t_start + np.arange(n + 1, dtype=float)
    curve = sample_curve(params, t)
    if fit.residuals.size:
        halfwidth = 2.0 * float(np.std(fit.residuals))
    else:
        halfwidth = 0.0
    extrema = tuple(extrema_schedule(params, Window(float(t[0]), float(t[-1]))))
    return Scenario(
        fit=fit,
        curve=curve,
        band_halfwidth=halfwidth,
        tc_date=offset_date(params.tc),
        extrema=extrema,
        truncated=truncated,
    )


def compare_to_actual(scenario: Scenario, later: TimeSeries) -> ComparisonReport:
    """Score realized observations against the scenario band.

    Only points inside the curve's time span are compared; the model value
    is re-evaluated exactly at each observation time (no interpolation
    drift).  Band membership is inclusive, so a zero-width band still
    covers exact matches.
    """
    t0, t1 = scenario.curve.t[0], scenario.curve.t[-1]
    mask = (later.t >= t0) & (later.t <= t1)
    if not mask.any():
        raise DomainError(
            f"series [{later.t_start}, {later.t_end}] does not overlap the "
            f"scenario span [{t0}, {t1}]"
        )
    t = later.t[mask]
    deviation = np.abs(later.value[mask] - evaluate(scenario.fit.params, t))
    covered = deviation <= scenario.band_halfwidth
    return ComparisonReport(
        coverage_fraction=float(np.mean(covered)),
        max_deviation=float(deviation.max()),
        n_points=int(mask.sum()),
    )
