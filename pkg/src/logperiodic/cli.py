"""Command-line interface: fit, scan, forecast, synth, report.

Exit codes let pipelines tell "the model disagrees" from "the tool
failed": 0 = consistent fit, 3 = fit produced but inconsistent (the
document is still written), 1 = input/configuration error, 2 = no grid
cell produced a usable fit.  Every document embeds a manifest with the
resolved configuration and the SHA-256 of the input bytes; pass
``--timestamp`` to pin the manifest clock when byte-identical reruns
matter.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .errors import FormatError, LogPeriodicError, NoFitError
from .fit import FitConfig, default_tc_range, fit_series, scan
from .model import Phase, evaluate
from .scenario import build_scenario
from .serialize import (
    RunManifest,
    config_to_dict,
    dumps,
    fit_document,
    grid_to_csv,
    load_fit_document,
    params_from_dict,
    parse_range_arg,
    parse_window_arg,
    scan_document,
    scenario_document,
    series_to_csv,
    sha256_hex,
)
from .series import TimeSeries, Window, log_transform, offset_date, parse_csv, parse_time
from .svgchart import render_chart
from .synth import SynthConfig, generate

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NO_FIT = 2
EXIT_INCONSISTENT = 3


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; 2 means "no fit" here, so
    remap usage problems onto the input-error code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _say(message: str) -> None:
    print(message, file=sys.stderr)


def _now(args) -> str:
    if args.timestamp:
        return args.timestamp
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _write_text(path: str | None, text: str) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load_input(path: str, column: str):
    data = Path(path).read_bytes()
    parsed = parse_csv(data.decode("utf-8"), value_column=column)
    if parsed.skipped:
        _say(f"note: skipped {parsed.skipped} rows without a usable {column!r} value")
    return parsed.series, sha256_hex(data)


def _resolve_config(args, windowed: TimeSeries, refine: bool) -> FitConfig:
    phase = Phase.parse(args.phase)
    if args.tc_range:
        tc_range = parse_range_arg(args.tc_range, "--tc-range")
    else:
        tc_range = default_tc_range(windowed, phase, args.margin)
    return FitConfig(
        phase=phase,
        tc_range=tc_range,
        tc_step=args.tc_step,
        alpha_range=parse_range_arg(args.alpha_range, "--alpha-range"),
        alpha_step=args.alpha_step,
        lambda_mode=args.lambda_mode,
        lam=args.lambda_value,
        lambda_range=parse_range_arg(args.lambda_range, "--lambda-range"),
        lambda_step=args.lambda_step,
        tc_margin=args.margin,
        refine=refine,
        use_log_price=args.log_price,
        top_k=args.top_k,
    )


def _manifest(command: str, args, config_extra: dict, input_sha256: str | None) -> RunManifest:
    return RunManifest(
        command=command,
        config=config_extra,
        input_sha256=input_sha256,
        version=__version__,
        timestamp=_now(args),
    )


def _summarize(result) -> str:
    p = result.params
    verdict = "consistent" if result.consistent else "inconsistent"
    line = (
        f"tc={p.tc:.3f} ({offset_date(p.tc).isoformat()})  "
        f"alpha={p.alpha:.4f}  lambda={p.lam:.4f}  rmse={result.rmse:.6g}  {verdict}"
    )
    if result.reasons:
        line += "\n  " + "\n  ".join(result.reasons)
    return line


def cmd_fit(args) -> int:
    series, digest = _load_input(args.input, args.column)
    window = parse_window_arg(args.window, series)
    windowed = series.slice(window)
    config = _resolve_config(args, windowed, refine=not args.no_refine)
    result, report = fit_series(windowed, config, workers=args.workers)
    manifest = _manifest(
        "fit",
        args,
        {
            "input": args.input,
            "value_column": args.column,
            "window": {"start": window.t_start, "end": window.t_end},
            "workers": args.workers,
            **config_to_dict(config),
        },
        digest,
    )
    doc = fit_document(
        result,
        config,
        manifest,
        window=window,
        value_column=args.column,
        runner_ups=report.runner_ups,
    )
    _write_text(args.out, dumps(doc))
    _say(_summarize(result))
    return EXIT_OK if result.consistent else EXIT_INCONSISTENT


def cmd_scan(args) -> int:
    series, digest = _load_input(args.input, args.column)
    window = parse_window_arg(args.window, series)
    windowed = series.slice(window)
    config = _resolve_config(args, windowed, refine=False)
    report = scan(windowed, config, workers=args.workers)
    manifest = _manifest(
        "scan",
        args,
        {
            "input": args.input,
            "value_column": args.column,
            "window": {"start": window.t_start, "end": window.t_end},
            "workers": args.workers,
            **config_to_dict(config),
        },
        digest,
    )
    doc = scan_document(
        report, config, manifest, window=window, value_column=args.column
    )
    if args.grid_out:
        Path(args.grid_out).write_text(grid_to_csv(report), encoding="utf-8")
    _write_text(args.out, dumps(doc))
    _say(_summarize(report.best))
    return EXIT_OK if report.best.consistent else EXIT_INCONSISTENT


def cmd_forecast(args) -> int:
    loaded = load_fit_document(json.loads(Path(args.fit).read_text(encoding="utf-8")))
    result = loaded.result
    if not result.consistent and not args.force:
        _say(
            "fit is inconsistent; pass --force to build a scenario anyway\n  "
            + "\n  ".join(result.reasons)
        )
        return EXIT_INCONSISTENT
    series, digest = _load_input(args.input, loaded.value_column)
    windowed = series.slice(loaded.window) if loaded.window else series
    fitted = log_transform(windowed) if loaded.config.use_log_price else windowed
    # Recover residuals exactly: the document stores parameters, and the
    # window slice of the input reproduces the data the fit saw.
    residuals = fitted.value - evaluate(result.params, fitted.t)
    result = replace(result, residuals=residuals)
    if args.horizon is not None:
        horizon = args.horizon
    elif result.params.phase is Phase.ACCELERATING:
        horizon = max(result.params.tc - loaded.config.tc_margin - fitted.t_end, 0.0)
    else:
        horizon = 0.0
    scenario = build_scenario(
        fitted, result, horizon, tc_margin=loaded.config.tc_margin
    )
    manifest = _manifest(
        "forecast",
        args,
        {
            "fit": args.fit,
            "input": args.input,
            "horizon": horizon,
            "force": bool(args.force),
        },
        digest,
    )
    _write_text(args.out, dumps(scenario_document(scenario, manifest)))
    if args.svg:
        title = args.title or f"log-periodic scenario, tc {scenario.tc_date.isoformat()}"
        Path(args.svg).write_text(
            render_chart(fitted, scenario, title=title), encoding="utf-8"
        )
    if scenario.truncated:
        _say(f"note: curve truncated at tc - margin ({scenario.tc_date.isoformat()})")
    _say(
        f"tc_date={scenario.tc_date.isoformat()}  "
        f"band_halfwidth={scenario.band_halfwidth:.6g}  "
        f"extrema={len(scenario.extrema)}"
    )
    return EXIT_OK


def _params_arg(text: str) -> dict:
    raw = text if text.lstrip().startswith("{") else Path(text).read_text(encoding="utf-8")
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise FormatError(f"bad params JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise FormatError("params JSON must be an object")
    if isinstance(obj.get("tc"), str):
        obj = {**obj, "tc": parse_time(obj["tc"])}
    return obj


def _window_pair(text: str) -> Window:
    left, sep, right = text.partition(":")
    if not sep or not left.strip() or not right.strip():
        raise FormatError(f"--window must look like start:end, got {text!r}")
    return Window(parse_time(left), parse_time(right))


def cmd_synth(args) -> int:
    obj = _params_arg(args.params)
    substructure = None
    if "substructure" in obj:
        substructure = params_from_dict(obj.pop("substructure"))
    params = params_from_dict(obj)
    config = SynthConfig(
        params=params,
        window=_window_pair(args.window),
        sampling=args.sampling,
        noise_sigma=args.sigma,
        seed=args.seed,
        substructure=substructure,
    )
    result = generate(config)
    csv_text = series_to_csv(result.series, value_column=args.column)
    _write_text(args.out, csv_text)
    if result.redraw_count:
        _say(f"note: re-drew {result.redraw_count} non-positive noise draws")
    if args.manifest:
        manifest = _manifest(
            "synth",
            args,
            {
                "params": args.params,
                "window": args.window,
                "sampling": args.sampling,
                "sigma": args.sigma,
                "seed": args.seed,
                "redraws": result.redraw_count,
                "out": args.out,
            },
            None,
        )
        doc = {
            "schema": "logperiodic.synth-manifest/1",
            "manifest": manifest.to_dict(),
            "output_sha256": sha256_hex(csv_text.encode("utf-8")),
        }
        Path(args.manifest).write_text(dumps(doc), encoding="utf-8")
    return EXIT_OK


def cmd_report(args) -> int:
    loaded = load_fit_document(json.loads(Path(args.fit).read_text(encoding="utf-8")))
    result = loaded.result
    series, _ = _load_input(args.input, loaded.value_column)
    windowed = series.slice(loaded.window) if loaded.window else series
    fitted = log_transform(windowed) if loaded.config.use_log_price else windowed
    residuals = fitted.value - evaluate(result.params, fitted.t)
    result = replace(result, residuals=residuals)
    scenario = build_scenario(fitted, result, 0.0, tc_margin=loaded.config.tc_margin)
    title = args.title or f"log-periodic fit, tc {scenario.tc_date.isoformat()}"
    Path(args.svg).write_text(
        render_chart(fitted, scenario, title=title), encoding="utf-8"
    )
    _say(_summarize(result))
    return EXIT_OK


def _add_fit_flags(parser: _Parser) -> None:
    parser.add_argument("--input", required=True, help="input CSV (date + value columns)")
    parser.add_argument("--column", default="close", help="value column name")
    parser.add_argument(
        "--window",
        default=":",
        metavar="START:END",
        help="analysis window; ISO dates or day offsets, either side may be empty",
    )
    parser.add_argument(
        "--phase",
        required=True,
        choices=["accel", "accelerating", "decel", "decelerating"],
        help="accelerating: oscillations contract toward tc ahead; "
        "decelerating: they expand away from tc behind",
    )
    parser.add_argument(
        "--lambda",
        dest="lambda_mode",
        default="fixed",
        choices=["fixed", "scan"],
        help="pin the scaling factor (default 2.0) or scan a range",
    )
    parser.add_argument("--lambda-value", type=float, default=2.0)
    parser.add_argument("--lambda-range", default="1.5:3.0", metavar="LO:HI")
    parser.add_argument("--lambda-step", type=float, default=0.05)
    parser.add_argument("--log-price", action="store_true", help="fit log(value)")
    parser.add_argument(
        "--tc-range",
        default=None,
        metavar="LO:HI",
        help="critical-time search range (dates or offsets); "
        "default: margin boundary to half a span beyond",
    )
    parser.add_argument("--tc-step", type=float, default=1.0)
    parser.add_argument("--alpha-range", default="-1:1", metavar="LO:HI")
    parser.add_argument("--alpha-step", type=float, default=0.05)
    parser.add_argument("--margin", type=float, default=5.0, help="tc margin, days")
    parser.add_argument("--top-k", type=int, default=5)
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--out", default=None, help="JSON path (default stdout)")
    parser.add_argument("--timestamp", default=None, help="pin the manifest timestamp")


def build_parser() -> _Parser:
    parser = _Parser(prog="logperiodic", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_fit = sub.add_parser("fit", help="grid scan + local refinement on one window")
    _add_fit_flags(p_fit)
    p_fit.add_argument("--no-refine", action="store_true", help="grid scan only")
    p_fit.set_defaults(func=cmd_fit)

    p_scan = sub.add_parser("scan", help="grid scan; emit ranked candidates")
    _add_fit_flags(p_scan)
    p_scan.add_argument("--grid-out", default=None, help="write the RMSE surface as CSV")
    p_scan.set_defaults(func=cmd_scan)

    p_fc = sub.add_parser("forecast", help="extend a fitted curve into a scenario")
    p_fc.add_argument("--fit", required=True, help="fit JSON document")
    p_fc.add_argument("--input", required=True, help="input CSV the fit was made from")
    p_fc.add_argument(
        "--horizon",
        type=float,
        default=None,
        help="days past the last observation (default: up to tc - margin)",
    )
    p_fc.add_argument("--svg", default=None, help="also render a chart")
    p_fc.add_argument("--out", default=None, help="scenario JSON path (default stdout)")
    p_fc.add_argument("--title", default=None)
    p_fc.add_argument("--force", action="store_true", help="proceed on inconsistent fits")
    p_fc.add_argument("--timestamp", default=None)
    p_fc.set_defaults(func=cmd_forecast)

    p_synth = sub.add_parser("synth", help="generate a synthetic series from parameters")
    p_synth.add_argument("--params", required=True, help="params JSON (path or inline)")
    p_synth.add_argument("--window", required=True, metavar="START:END")
    p_synth.add_argument("--sampling", type=float, default=1.0, help="days between points")
    p_synth.add_argument("--sigma", type=float, default=0.0, help="noise stddev")
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--column", default="close")
    p_synth.add_argument("--out", default=None, help="CSV path (default stdout)")
    p_synth.add_argument("--manifest", default=None, help="also write a manifest JSON")
    p_synth.add_argument("--timestamp", default=None)
    p_synth.set_defaults(func=cmd_synth)

    p_rep = sub.add_parser("report", help="render an SVG chart of data + fitted curve")
    p_rep.add_argument("--fit", required=True)
    p_rep.add_argument("--input", required=True)
    p_rep.add_argument("--svg", required=True)
    p_rep.add_argument("--title", default=None)
    p_rep.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits on usage errors, --help, and --version; surface the
        # code to in-process callers instead of unwinding the interpreter
        return int(exc.code or 0)
    try:
        return args.func(args)
    except NoFitError as exc:
        _say(f"no fit: {exc}")
        return EXIT_NO_FIT
    except (LogPeriodicError, ValueError, OSError, json.JSONDecodeError) as exc:
        _say(f"error: {exc}")
        return EXIT_INPUT


if __name__ == "__main__":
    raise SystemExit(main())
