"""SVG chart rendering: structure, escaping, band/rule visibility."""

import xml.etree.ElementTree as ET

import numpy as np
import pytest

from logperiodic import (
    LogPeriodicParams,
    Phase,
    SynthConfig,
    TimeSeries,
    Window,
    build_scenario,
    fit_series,
    generate,
    render_chart,
)
from logperiodic.fit import FitConfig

TRUTH = LogPeriodicParams(
    a=100.0, b=5.0, alpha=-0.4, phi=1.0, lam=2.0, tc=400.0, phase=Phase.ACCELERATING
)


@pytest.fixture(scope="module")
def scenario():
    series = generate(
        SynthConfig(params=TRUTH, window=Window(100.0, 380.0), noise_sigma=1.0, seed=17)
    ).series
    cfg = FitConfig(
        phase=Phase.ACCELERATING,
        tc_range=(395.0, 405.0),
        tc_step=1.0,
        alpha_range=(-0.6, -0.2),
        alpha_step=0.05,
    )
    result, _ = fit_series(series, cfg)
    return series, build_scenario(series, result, horizon=10.0)


def test_series_only_chart_is_valid_xml():
    series = TimeSeries(np.arange(0.0, 40.0), np.linspace(10.0, 20.0, 40))
    svg = render_chart(series=series)
    root = ET.fromstring(svg)
    assert root.tag == "{http://www.w3.org/2000/svg}svg"
    assert svg.count("<polyline") == 1


def test_full_chart_has_band_model_and_rule(scenario):
    series, scen = scenario
    svg = render_chart(series=series, scenario=scen)
    ET.fromstring(svg)
    assert svg.count("<polyline") == 2  # data + model
    assert "<polygon" in svg  # uncertainty band
    assert "stroke-dasharray" in svg  # tc rule
    assert "tc 1971-02-" in svg
    assert svg.count("<circle") == len(scen.extrema)


def test_zero_band_suppresses_polygon():
    series = generate(SynthConfig(params=TRUTH, window=Window(100.0, 380.0))).series
    from logperiodic.fit import FitResult

    exact = FitResult(
        params=TRUTH, rmse=0.0, n_points=len(series.t), oscillation_count=3.9,
        consistent=True, reasons=(), residuals=np.zeros(len(series.t)),
        value_range=1.0,
    )
    scen = build_scenario(series, exact, horizon=5.0)
    svg = render_chart(series=series, scenario=scen)
    assert "<polygon" not in svg


def test_title_is_escaped():
    series = TimeSeries(np.arange(0.0, 10.0), np.linspace(1.0, 2.0, 10))
    svg = render_chart(series=series, title='<b>&"risky"</b>')
    ET.fromstring(svg)
    assert "&lt;b&gt;" in svg


def test_dimensions_respected():
    series = TimeSeries(np.arange(0.0, 10.0), np.linspace(1.0, 2.0, 10))
    root = ET.fromstring(render_chart(series=series, width=640, height=360))
    assert root.get("width") == "640"
    assert root.get("height") == "360"


def test_nothing_to_draw_rejected():
    with pytest.raises(ValueError):
        render_chart()


def test_axis_labels_are_dates():
    series = TimeSeries(np.arange(0.0, 40.0), np.linspace(10.0, 20.0, 40))
    svg = render_chart(series=series)
    assert "1970-01-01" in svg


def test_flat_series_does_not_crash():
    series = TimeSeries(np.arange(0.0, 10.0), np.full(10, 5.0))
    ET.fromstring(render_chart(series=series))
