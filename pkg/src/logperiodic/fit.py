"""Parameter estimation by separable nonlinear least squares.

The model is linear in three derived coefficients once the nonlinear
parameters (tc, alpha, lambda) are fixed:

    phi(t) = a * x**alpha
           + c1 * x**alpha * cos(omega * ln x)
           + c2 * x**alpha * sin(omega * ln x),        x = |t - tc|,

with b = sqrt(c1**2 + c2**2) and phi = atan2(-c2, c1).  The linear
subproblem is solved exactly by ordinary least squares inside a grid
search over (tc, alpha[, lambda]), optionally polished by a local simplex
descent.  Scans are deterministic: cells are ranked by RMSE with a total,
documented tie-break, so the result does not depend on evaluation order.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .errors import (
    DegenerateDesignError,
    DomainError,
    InsufficientDataError,
    NoFitError,
    PhaseDomainError,
)
from .model import TWO_PI, X_MIN, LogPeriodicParams, Phase, canonical_phase
from .optimize import polished_minimum
from .series import TimeSeries, Window, log_transform

DEFAULT_TC_MARGIN = 5.0


class LambdaMode(enum.Enum):
    """Treat the scaling factor as pinned at a value, or scan a range."""

    FIXED = "fixed"
    SCAN = "scan"

    @classmethod
    def parse(cls, text: "LambdaMode | str") -> "LambdaMode":
        if isinstance(text, LambdaMode):
            return text
        return cls(text.strip().lower())


@dataclass(frozen=True)
class ConsistencyThresholds:
    """Quantified acceptance gates for a genuine log-periodic signature.

    Each clause is independently configurable: the scaling factor must sit
    near its preferred value, the window must span enough oscillation
    periods, the oscillation must be visible but subdominant, and the
    residual must stay small against the value range.
    """

    lambda_center: float = 2.0
    lambda_tol: float = 0.2
    min_oscillations: float = 2.0
    max_amplitude_ratio: float = 1.0
    max_rmse_fraction: float = 0.15


@dataclass(frozen=True)
class FitConfig:
    """Everything the scan and refinement stages need besides the data."""

    phase: Phase
    tc_range: tuple[float, float]
    tc_step: float = 1.0
    alpha_range: tuple[float, float] = (-1.0, 1.0)
    alpha_step: float = 0.05
    lambda_mode: LambdaMode = LambdaMode.FIXED
    lam: float = 2.0
    lambda_range: tuple[float, float] = (1.5, 3.0)
    lambda_step: float = 0.05
    tc_margin: float = DEFAULT_TC_MARGIN
    refine: bool = True
    use_log_price: bool = False
    top_k: int = 5
    thresholds: ConsistencyThresholds = ConsistencyThresholds()
    # Simplex termination: per-axis simplex diameter (tc, alpha, lambda) and
    # iteration cap.  Defaults are deliberately tight; the refined optimum
    # must pin tc to ~1e-6 day for the linear coefficients to stabilise to
    # the guaranteed six digits.
    refine_xtol: tuple[float, float, float] = (1e-8, 1e-10, 1e-10)
    refine_max_iter: int = 2000
    refine_restarts: int = 3

    def __post_init__(self) -> None:
        object.__setattr__(self, "phase", Phase.parse(self.phase))
        object.__setattr__(self, "lambda_mode", LambdaMode.parse(self.lambda_mode))
        for name in ("tc_range", "alpha_range", "lambda_range"):
            lo, hi = getattr(self, name)
            lo, hi = float(lo), float(hi)
            if not (math.isfinite(lo) and math.isfinite(hi)) or hi < lo:
                raise ValueError(f"{name} must be a finite (lo, hi) with lo <= hi")
            object.__setattr__(self, name, (lo, hi))
        for name in ("tc_step", "alpha_step", "lambda_step"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.alpha_range[0] < -1.0 or self.alpha_range[1] > 1.0:
            raise ValueError("alpha_range must stay within [-1, 1]")
        if self.lambda_range[0] <= 1.0 or self.lam <= 1.0:
            raise ValueError("scaling factors must exceed 1")
        if self.tc_margin < X_MIN:
            raise ValueError(f"tc_margin must be >= the singularity guard {X_MIN}")
        if self.top_k < 0:
            raise ValueError("top_k must be >= 0")

    def lambda_grid(self) -> np.ndarray:
        if self.lambda_mode is LambdaMode.FIXED:
            return np.array([self.lam])
        return _grid(*self.lambda_range, self.lambda_step)

    def alpha_grid(self) -> np.ndarray:
        return _grid(*self.alpha_range, self.alpha_step)

    def tc_grid(self) -> np.ndarray:
        return _grid(*self.tc_range, self.tc_step)


def _grid(lo: float, hi: float, step: float) -> np.ndarray:
    n = int(math.floor((hi - lo) / step + 1e-9))
    return lo + step * np.arange(n + 1)


def default_tc_range(
    series: TimeSeries, phase: Phase | str, tc_margin: float = DEFAULT_TC_MARGIN
) -> tuple[float, float]:
    """Critical-time search range when none is given: from the margin
    boundary out to half the window span beyond it."""
    phase = Phase.parse(phase)
    half = 0.5 * series.span
    if phase is Phase.ACCELERATING:
        lo = series.t_end + tc_margin
        return (lo, lo + half)
    hi = series.t_start - tc_margin
    return (hi - half, hi)


class LinearFit(NamedTuple):
    """Exact OLS solution of the linear subproblem at fixed (tc, alpha, lambda)."""

    a: float
    b: float
    phi: float
    rmse: float
    residuals: np.ndarray


class GridCell(NamedTuple):
    tc: float
    alpha: float
    lam: float
    rmse: float


@dataclass(frozen=True)
class FitResult:
    """Best-fit parameters plus residual statistics for one window."""

    params: LogPeriodicParams
    rmse: float
    n_points: int
    oscillation_count: float
    consistent: bool
    reasons: tuple[str, ...]
    residuals: np.ndarray
    value_range: float
    warnings: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        residuals = np.array(self.residuals, dtype=float)
        residuals.setflags(write=False)
        object.__setattr__(self, "residuals", residuals)
        if self.rmse < 0:
            raise ValueError("rmse must be >= 0")


@dataclass(frozen=True)
class ScanReport:
    """RMSE surface over the parameter grid with ranked candidates."""

    grid_results: tuple[GridCell, ...]
    best: FitResult
    runner_ups: tuple[FitResult, ...]


class Verdict(NamedTuple):
    consistent: bool
    reasons: tuple[str, ...]


def _distances(series: TimeSeries, tc: float, phase: Phase, tc_margin: float) -> np.ndarray:
    if phase is Phase.ACCELERATING:
        x = tc - series.t
    else:
        x = series.t - tc
    if np.any(x <= 0.0):
        side = "before" if phase is Phase.ACCELERATING else "after"
        raise PhaseDomainError(
            f"{phase.value} phase requires every observation strictly {side} tc={tc}"
        )
    if x.min() < tc_margin - 1e-9:
        raise DomainError(
            f"tc={tc} is {x.min():.3f} days from the nearest observation; "
            f"need at least tc_margin={tc_margin}"
        )
    return x


def _regressors(x: np.ndarray, lnx: np.ndarray, alpha: float, omega: float) -> np.ndarray:
    w = x**alpha
    ang = omega * lnx
    return np.column_stack((w, w * np.cos(ang), w * np.sin(ang)))


def _solve(design: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    beta, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
    if rank < 3:
        raise DegenerateDesignError(
            f"regressor matrix has rank {rank} < 3 (too few distinct distances)"
        )
    residuals = y - design @ beta
    rmse = float(np.sqrt(np.mean(residuals**2)))
    return beta, residuals, rmse


def linear_subfit(
    series: TimeSeries,
    tc: float,
    alpha: float,
    lam: float,
    phase: Phase | str,
    *,
    tc_margin: float = DEFAULT_TC_MARGIN,
) -> LinearFit:
    """Solve the linear subproblem exactly at fixed (tc, alpha, lambda).

    Returns the canonical representative: b >= 0 and phi in [0, 2*pi).
    Requires at least 4 points, all at least ``tc_margin`` days from tc and
    on the phase's side of it.
    """
    phase = Phase.parse(phase)
    if len(series) < 4:
        raise InsufficientDataError(
            f"linear subfit needs >= 4 points, got {len(series)}"
        )
    if lam <= 1.0:
        raise DomainError(f"scaling factor lambda must exceed 1, got {lam}")
    x = _distances(series, tc, phase, tc_margin)
    omega = TWO_PI / math.log(lam)
    design = _regressors(x, np.log(x), alpha, omega)
    beta, residuals, rmse = _solve(design, series.value)
    a, c1, c2 = (float(v) for v in beta)
    b = math.hypot(c1, c2)
    phi = canonical_phase(math.atan2(-c2, c1)) if b > 0.0 else 0.0
    return LinearFit(a, b, phi, rmse, residuals)


def _rank_key(cell: GridCell):
    # rmse, then |lambda - 2|, then |alpha|, then earlier tc; the trailing
    # (lam, alpha) entries make the order total so ranking is reproducible.
    return (cell.rmse, abs(cell.lam - 2.0), abs(cell.alpha), cell.tc, cell.lam, cell.alpha)


def _make_result(
    fitted: TimeSeries,
    cell: GridCell,
    config: FitConfig,
    warnings: tuple[str, ...] = (),
) -> FitResult:
    lin = linear_subfit(
        fitted, cell.tc, cell.alpha, cell.lam, config.phase, tc_margin=config.tc_margin
    )
    params = LogPeriodicParams(
        lin.a, lin.b, cell.alpha, lin.phi, cell.lam, cell.tc, config.phase
    )
    x = np.abs(fitted.t - cell.tc)
    oscillations = float((math.log(x.max()) - math.log(x.min())) / math.log(cell.lam))
    value_range = float(fitted.value.max() - fitted.value.min())
    verdict = _verdict(params, lin.rmse, oscillations, value_range, config.thresholds)
    return FitResult(
        params=params,
        rmse=lin.rmse,
        n_points=len(fitted),
        oscillation_count=oscillations,
        consistent=verdict.consistent,
        reasons=verdict.reasons,
        residuals=lin.residuals,
        value_range=value_range,
        warnings=warnings,
    )


def _validate_geometry(series: TimeSeries, config: FitConfig) -> None:
    lo, hi = config.tc_range
    if config.phase is Phase.ACCELERATING:
        bound = series.t_end + config.tc_margin
        if lo < bound - 1e-9:
            raise DomainError(
                f"accelerating phase needs the tc grid to start at or after "
                f"window end + margin = {bound}; got {lo}"
            )
    else:
        bound = series.t_start - config.tc_margin
        if hi > bound + 1e-9:
            raise DomainError(
                f"decelerating phase needs the tc grid to end at or before "
                f"window start - margin = {bound}; got {hi}"
            )


def _prepare(series: TimeSeries, config: FitConfig) -> TimeSeries:
    return log_transform(series) if config.use_log_price else series


def scan(series: TimeSeries, config: FitConfig, *, workers: int = 1) -> ScanReport:
    """Evaluate the linear subfit on every grid cell and rank the surface.

    Cells are independent pure computations; ``workers > 1`` evaluates them
    in a thread pool.  The report is bitwise identical for any worker
    count because all cells are materialized and then sorted.
    """
    fitted = _prepare(series, config)
    _validate_geometry(series, config)
    cells = [
        (float(tc), float(alpha), float(lam))
        for tc in config.tc_grid()
        for alpha in config.alpha_grid()
        for lam in config.lambda_grid()
    ]

    def cell_rmse(cell: tuple[float, float, float]) -> float:
        tc, alpha, lam = cell
        try:
            return linear_subfit(
                fitted, tc, alpha, lam, config.phase, tc_margin=config.tc_margin
            ).rmse
        except DegenerateDesignError:
            return math.nan

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rmses = list(pool.map(cell_rmse, cells))
    else:
        rmses = [cell_rmse(cell) for cell in cells]

    grid_results = tuple(
        GridCell(tc, alpha, lam, rmse)
        for (tc, alpha, lam), rmse in zip(cells, rmses)
    )
    valid = [cell for cell in grid_results if math.isfinite(cell.rmse)]
    if not valid:
        raise NoFitError("every grid cell was degenerate")
    ranked = sorted(valid, key=_rank_key)
    best = _make_result(fitted, ranked[0], config)
    runner_ups = tuple(
        _make_result(fitted, cell, config)
        for cell in ranked[1 : 1 + config.top_k]
    )
    return ScanReport(grid_results=grid_results, best=best, runner_ups=runner_ups)


def refine(series: TimeSeries, start: FitResult, config: FitConfig) -> FitResult:
    """Simplex descent over the nonlinear parameters from a grid optimum.

    Re-solves the linear subproblem at every probe, so the objective is the
    same exact RMSE the scan ranks by.  Never returns a result worse than
    ``start``; when the objective is not finite at the start the input is
    returned annotated instead.
    """
    fitted = _prepare(series, config)
    scan_lambda = config.lambda_mode is LambdaMode.SCAN

    def objective(v: np.ndarray) -> float:
        tc, alpha = float(v[0]), float(v[1])
        lam = float(v[2]) if scan_lambda else config.lam
        if not config.alpha_range[0] <= alpha <= config.alpha_range[1]:
            return math.inf
        if scan_lambda and not config.lambda_range[0] <= lam <= config.lambda_range[1]:
            return math.inf
        try:
            return linear_subfit(
                fitted, tc, alpha, lam, config.phase, tc_margin=config.tc_margin
            ).rmse
        except (DomainError, DegenerateDesignError):
            return math.inf

    p = start.params
    v0 = [p.tc, p.alpha, p.lam] if scan_lambda else [p.tc, p.alpha]
    if not math.isfinite(objective(np.asarray(v0))):
        return replace(
            start,
            warnings=start.warnings + ("refinement failed: objective not finite at start",),
        )
    steps = [config.tc_step, config.alpha_step]
    xtol = list(config.refine_xtol[:2])
    if scan_lambda:
        steps.append(config.lambda_step)
        xtol.append(config.refine_xtol[2])
    result = polished_minimum(
        objective,
        v0,
        steps,
        xtol,
        max_iter=config.refine_max_iter,
        restarts=config.refine_restarts,
    )
    if not math.isfinite(result.fx) or result.fx > start.rmse:
        return start
    lam = float(result.x[2]) if scan_lambda else config.lam
    cell = GridCell(float(result.x[0]), float(result.x[1]), lam, result.fx)
    return _make_result(fitted, cell, config)


def fit_series(
    series: TimeSeries, config: FitConfig, *, workers: int = 1
) -> tuple[FitResult, ScanReport]:
    """Full pipeline: grid scan, then local refinement when enabled."""
    report = scan(series, config, workers=workers)
    result = refine(series, report.best, config) if config.refine else report.best
    return result, report


def _verdict(
    params: LogPeriodicParams,
    rmse: float,
    oscillations: float,
    value_range: float,
    thresholds: ConsistencyThresholds,
) -> Verdict:
    reasons = []
    lo = thresholds.lambda_center - thresholds.lambda_tol
    hi = thresholds.lambda_center + thresholds.lambda_tol
    if not lo <= params.lam <= hi:
        reasons.append(f"lambda outside [{lo:g}, {hi:g}]")
    if not oscillations >= thresholds.min_oscillations:
        reasons.append(
            f"only {oscillations:.2f} oscillation periods in window "
            f"(need >= {thresholds.min_oscillations:g})"
        )
    b = abs(params.b)
    if b == 0.0:
        reasons.append("no visible oscillation")
    elif params.a == 0.0 or b / abs(params.a) > thresholds.max_amplitude_ratio:
        ratio = math.inf if params.a == 0.0 else b / abs(params.a)
        reasons.append(
            f"oscillation amplitude dominates baseline "
            f"(B/|A| = {ratio:.3g} > {thresholds.max_amplitude_ratio:g})"
        )
    limit = thresholds.max_rmse_fraction * value_range
    if rmse > limit:
        reasons.append(
            f"rmse {rmse:.6g} exceeds {thresholds.max_rmse_fraction:.0%} "
            f"of the value range {value_range:.6g}"
        )
    return Verdict(not reasons, tuple(reasons))


def consistency_gate(result: FitResult, config: FitConfig) -> Verdict:
    """Re-apply the consistency clauses to a completed fit."""
    return _verdict(
        result.params,
        result.rmse,
        result.oscillation_count,
        result.value_range,
        config.thresholds,
    )


def window_candidates(
    series: TimeSeries, min_span: float, *, neighborhood: float = 5.0
) -> list[Window]:
    """Candidate analysis windows anchored at local minima.

    A local minimum is an interior point strictly smaller than every other
    value within ``neighborhood`` days; minima that are not the global
    minimum are deliberately included, since the deepest trough may still
    belong to the preceding market phase.  Each window runs from its
    minimum to the series end; windows shorter than ``min_span`` are
    dropped.
    """
    t, v = series.t, series.value
    out: list[Window] = []
    for i in range(1, len(series) - 1):
        lo = int(np.searchsorted(t, t[i] - neighborhood, side="left"))
        hi = int(np.searchsorted(t, t[i] + neighborhood, side="right"))
        neighbors = np.concatenate((v[lo:i], v[i + 1 : hi]))
        if neighbors.size == 0 or not np.all(v[i] < neighbors):
            continue
        if series.t_end - t[i] >= min_span:
            out.append(Window(float(t[i]), series.t_end))
    return out
