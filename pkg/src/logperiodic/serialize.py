"""Document serialization: JSON result documents, manifests, CSV surfaces.

All numeric fields are emitted with Python's shortest round-trip float
representation, so ``parse(serialize(x))`` reproduces every value bit for
bit.  Keys are sorted and documents end with a newline, which makes
reruns byte-identical given identical inputs and flags.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from .errors import DomainError, FormatError
from .fit import (
    ConsistencyThresholds,
    FitConfig,
    FitResult,
    LambdaMode,
    ScanReport,
)
from .model import LogPeriodicParams, Phase
from .scenario import ComparisonReport, Scenario
from .series import TimeSeries, Window, offset_date, parse_time

FIT_SCHEMA = "logperiodic.fit/1"
SCAN_SCHEMA = "logperiodic.scan/1"
SCENARIO_SCHEMA = "logperiodic.scenario/1"


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def dumps(document: dict) -> str:
    return json.dumps(document, indent=2, sort_keys=True) + "\n"


@dataclass(frozen=True)
class RunManifest:
    """Provenance record embedded in every emitted document."""

    command: str
    config: dict
    input_sha256: str | None
    version: str
    timestamp: str

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "config": self.config,
            "input_sha256": self.input_sha256,
            "version": self.version,
            "timestamp": self.timestamp,
        }


def params_to_dict(params: LogPeriodicParams) -> dict:
    return {
        "A": params.a,
        "B": params.b,
        "alpha": params.alpha,
        "phi": params.phi,
        "lambda": params.lam,
        "tc": params.tc,
        "tc_date": offset_date(params.tc).isoformat(),
        "phase": params.phase.value,
    }


def params_from_dict(d: dict) -> LogPeriodicParams:
    try:
        return LogPeriodicParams(
            a=float(d["A"]),
            b=float(d["B"]),
            alpha=float(d["alpha"]),
            phi=float(d["phi"]),
            lam=float(d["lambda"]),
            tc=float(d["tc"]),
            phase=Phase.parse(d["phase"]),
        )
    except KeyError as exc:
        raise FormatError(f"params object is missing key {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise FormatError(f"bad params object: {exc}") from exc


def _thresholds_to_dict(thresholds: ConsistencyThresholds) -> dict:
    return {
        "lambda_center": thresholds.lambda_center,
        "lambda_tol": thresholds.lambda_tol,
        "min_oscillations": thresholds.min_oscillations,
        "max_amplitude_ratio": thresholds.max_amplitude_ratio,
        "max_rmse_fraction": thresholds.max_rmse_fraction,
    }


def config_to_dict(config: FitConfig) -> dict:
    return {
        "phase": config.phase.value,
        "tc_range": list(config.tc_range),
        "tc_step": config.tc_step,
        "alpha_range": list(config.alpha_range),
        "alpha_step": config.alpha_step,
        "lambda_mode": config.lambda_mode.value,
        "lambda": config.lam,
        "lambda_range": list(config.lambda_range),
        "lambda_step": config.lambda_step,
        "tc_margin": config.tc_margin,
        "refine": config.refine,
        "use_log_price": config.use_log_price,
        "top_k": config.top_k,
        "thresholds": _thresholds_to_dict(config.thresholds),
    }


def config_from_dict(d: dict) -> FitConfig:
    try:
        thresholds = ConsistencyThresholds(**d.get("thresholds", {}))
        return FitConfig(
            phase=Phase.parse(d["phase"]),
            tc_range=tuple(d["tc_range"]),
            tc_step=float(d["tc_step"]),
            alpha_range=tuple(d["alpha_range"]),
            alpha_step=float(d["alpha_step"]),
            lambda_mode=LambdaMode.parse(d["lambda_mode"]),
            lam=float(d["lambda"]),
            lambda_range=tuple(d["lambda_range"]),
            lambda_step=float(d["lambda_step"]),
            tc_margin=float(d["tc_margin"]),
            refine=bool(d["refine"]),
            use_log_price=bool(d["use_log_price"]),
            top_k=int(d["top_k"]),
            thresholds=thresholds,
        )
    except KeyError as exc:
        raise FormatError(f"config object is missing key {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise FormatError(f"bad config object: {exc}") from exc


def _result_block(result: FitResult) -> dict:
    return {
        "params": params_to_dict(result.params),
        "rmse": result.rmse,
        "n_points": result.n_points,
        "oscillation_count": result.oscillation_count,
        "consistent": result.consistent,
        "reasons": list(result.reasons),
        "warnings": list(result.warnings),
        "residual_std": float(np.std(result.residuals)) if result.residuals.size else 0.0,
        "value_range": result.value_range,
    }


def _result_from_block(d: dict) -> FitResult:
    try:
        return FitResult(
            params=params_from_dict(d["params"]),
            rmse=float(d["rmse"]),
            n_points=int(d["n_points"]),
            oscillation_count=float(d["oscillation_count"]),
            consistent=bool(d["consistent"]),
            reasons=tuple(d["reasons"]),
            residuals=np.empty(0),
            value_range=float(d["value_range"]),
            warnings=tuple(d.get("warnings", ())),
        )
    except KeyError as exc:
        raise FormatError(f"result block is missing key {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise FormatError(f"bad result block: {exc}") from exc


def fit_document(
    result: FitResult,
    config: FitConfig,
    manifest: RunManifest,
    *,
    window: Window | None = None,
    value_column: str = "close",
    runner_ups: tuple[FitResult, ...] = (),
) -> dict:
    doc = {"schema": FIT_SCHEMA}
    doc.update(_result_block(result))
    doc["fit_config"] = config_to_dict(config)
    doc["window"] = (
        {"start": window.t_start, "end": window.t_end} if window is not None else None
    )
    doc["value_column"] = value_column
    doc["runner_ups"] = [_result_block(r) for r in runner_ups]
    doc["manifest"] = manifest.to_dict()
    return doc


@dataclass(frozen=True)
class LoadedFit:
    """A fit document parsed back into library objects.

    ``result.residuals`` is empty (documents store only the residual
    standard deviation); ``residual_std`` carries the persisted value.
    """

    result: FitResult
    config: FitConfig
    window: Window | None
    value_column: str
    residual_std: float


def load_fit_document(doc: dict) -> LoadedFit:
    if doc.get("schema") != FIT_SCHEMA:
        raise FormatError(
            f"expected schema {FIT_SCHEMA!r}, got {doc.get('schema')!r}"
        )
    result = _result_from_block(doc)
    config = config_from_dict(doc["fit_config"])
    w = doc.get("window")
    window = Window(float(w["start"]), float(w["end"])) if w else None
    return LoadedFit(
        result=result,
        config=config,
        window=window,
        value_column=str(doc.get("value_column", "close")),
        residual_std=float(doc.get("residual_std", 0.0)),
    )


def scan_document(
    report: ScanReport,
    config: FitConfig,
    manifest: RunManifest,
    *,
    window: Window | None = None,
    value_column: str = "close",
) -> dict:
    return {
        "schema": SCAN_SCHEMA,
        "best": _result_block(report.best),
        "runner_ups": [_result_block(r) for r in report.runner_ups],
        "grid_cells": len(report.grid_results),
        "fit_config": config_to_dict(config),
        "window": (
            {"start": window.t_start, "end": window.t_end} if window is not None else None
        ),
        "value_column": value_column,
        "manifest": manifest.to_dict(),
    }


def grid_to_csv(report: ScanReport) -> str:
    lines = ["tc,alpha,lambda,rmse"]
    for cell in report.grid_results:
        rmse = "nan" if math.isnan(cell.rmse) else repr(cell.rmse)
        lines.append(f"{cell.tc!r},{cell.alpha!r},{cell.lam!r},{rmse}")
    return "\n".join(lines) + "\n"


def scenario_document(scenario: Scenario, manifest: RunManifest) -> dict:
    curve = scenario.curve
    return {
        "schema": SCENARIO_SCHEMA,
        "params": params_to_dict(scenario.fit.params),
        "tc_date": scenario.tc_date.isoformat(),
        "band_halfwidth": scenario.band_halfwidth,
        "truncated": scenario.truncated,
        "extrema": [
            {"t": e.t, "date": offset_date(e.t).isoformat(), "kind": e.kind}
            for e in scenario.extrema
        ],
        "curve": {
            "t": [float(v) for v in curve.t],
            "value": [float(v) for v in curve.value],
            "band_low": [float(v) for v in scenario.band_low],
            "band_high": [float(v) for v in scenario.band_high],
        },
        "manifest": manifest.to_dict(),
    }


def comparison_to_dict(report: ComparisonReport) -> dict:
    return {
        "coverage_fraction": report.coverage_fraction,
        "max_deviation": report.max_deviation,
        "n_points": report.n_points,
    }


def series_to_csv(series: TimeSeries, value_column: str = "close") -> str:
    """Render a series in the ingest CSV format (ISO dates).

    Only whole-day offsets have a calendar date; fractional sampling is a
    domain error here, not a rounding.
    """
    lines = [f"date,{value_column}"]
    for t, value in series:
        if abs(t - round(t)) > 1e-9:
            raise DomainError(
                f"time offset {t} is not a whole day; cannot render a date column"
            )
        lines.append(f"{offset_date(round(t)).isoformat()},{value!r}")
    return "\n".join(lines) + "\n"


def parse_window_arg(text: str, series: TimeSeries) -> Window:
    """Parse a ``start:end`` window argument; either side may be empty to
    mean the corresponding series bound.  Sides accept ISO dates or day
    offsets."""
    if ":" not in text:
        raise FormatError(f"window must look like start:end, got {text!r}")
    left, _, right = text.partition(":")
    start = parse_time(left) if left.strip() else series.t_start
    end = parse_time(right) if right.strip() else series.t_end
    return Window(start, end)


def parse_range_arg(text: str, name: str) -> tuple[float, float]:
    """Parse a ``lo:hi`` numeric-or-date range flag."""
    if ":" not in text:
        raise FormatError(f"{name} must look like lo:hi, got {text!r}")
    left, _, right = text.partition(":")
    try:
        return (parse_time(left), parse_time(right))
    except FormatError as exc:
        raise FormatError(f"bad {name}: {exc}") from exc


def any_to_json(value: Any) -> Any:
    """Best-effort conversion of flag values into JSON-compatible types."""
    if isinstance(value, (str, bool, int, float)) or value is None:
        return value
    if isinstance(value, (list, tuple)):
        return [any_to_json(v) for v in value]
    return str(value)


__all__ = [
    "FIT_SCHEMA",
    "SCAN_SCHEMA",
    "SCENARIO_SCHEMA",
    "LoadedFit",
    "RunManifest",
    "comparison_to_dict",
    "config_from_dict",
    "config_to_dict",
    "dumps",
    "fit_document",
    "grid_to_csv",
    "load_fit_document",
    "params_from_dict",
    "params_to_dict",
    "parse_range_arg",
    "parse_window_arg",
    "scan_document",
    "scenario_document",
    "series_to_csv",
    "sha256_hex",
]
