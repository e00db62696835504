"""Top-level verification gate.

Seven numbered checks, one printed verdict line each, covering oracle
recovery, noise calibration, scale-invariance identities, the separable
solver against brute force, optional historical reproductions,
determinism of the scan command, and first-order optimality at the
refined optimum.
"""

import json
import math
import time
from pathlib import Path

import numpy as np
import pytest

from logperiodic import (
    LogPeriodicParams,
    Phase,
    SynthConfig,
    TimeSeries,
    Window,
    day_offset,
    evaluate,
    extrema_schedule,
    fit_series,
    generate,
    linear_subfit,
    offset_date,
    oscillatory_factor,
    parse_csv,
    parse_time,
)
from logperiodic.cli import main as cli_main
from logperiodic.fit import FitConfig

TRUTH = LogPeriodicParams(
    a=100.0, b=5.0, alpha=-0.4, phi=1.0, lam=2.0, tc=400.0, phase=Phase.ACCELERATING
)

ORACLE_CONFIG = FitConfig(
    phase=Phase.ACCELERATING,
    tc_range=(385.0, 430.0),
    tc_step=1.0,
    alpha_range=(-1.0, 1.0),
    alpha_step=0.05,
)

# Frozen calibration: 95th-percentile |tc error| in days, measured over
# seeds 0..99 at noise sigma = 1.0 (1% of the baseline A = 100) with the
# grid + refinement settings above.  Reruns may not regress past +10%.
FROZEN_P95_TC_ERROR = 2.0190
P95_REGRESSION_BOUND = FROZEN_P95_TC_ERROR * 1.10

DATA_DIR = Path(__file__).parent / "data"


def announce(capsys, number, ok, detail):
    verdict = "PASS" if ok else "FAIL"
    with capsys.disabled():
        print(f"[criterion {number}] {verdict} — {detail}", flush=True)
    assert ok, f"criterion {number}: {detail}"


def announce_skip(capsys, number, detail):
    with capsys.disabled():
        print(f"[criterion {number}] SKIP — {detail}", flush=True)
    pytest.skip(detail)


@pytest.fixture(scope="module")
def noiseless_fit():
    series = generate(SynthConfig(params=TRUTH, window=Window(100.0, 380.0))).series
    start = time.perf_counter()
    result, _ = fit_series(series, ORACLE_CONFIG)
    elapsed = time.perf_counter() - start
    return series, result, elapsed


@pytest.fixture(scope="module")
def noisy_ensemble():
    """One hundred seeded refits of the oracle truth at sigma = 1.0."""
    fits = []
    for seed in range(100):
        series = generate(
            SynthConfig(
                params=TRUTH, window=Window(100.0, 380.0), noise_sigma=1.0, seed=seed
            )
        ).series
        result, _ = fit_series(series, ORACLE_CONFIG)
        fits.append((series, result))
    return fits


def test_criterion_1_noiseless_recovery(noiseless_fit, capsys):
    _, result, elapsed = noiseless_fit
    p = result.params
    checks = {
        "tc": abs(p.tc - 400.0) <= 0.01,
        "alpha": abs(p.alpha - (-0.4)) <= 1e-3,
        "A": abs(p.a - 100.0) / 100.0 <= 1e-6,
        "B": abs(p.b - 5.0) / 5.0 <= 1e-6,
        "phi": abs(p.phi - 1.0) <= 1e-6,
        "runtime": elapsed <= 10.0,
    }
    detail = (
        f"tc err {abs(p.tc - 400.0):.2e} d, alpha err {abs(p.alpha + 0.4):.2e}, "
        f"A rel {abs(p.a - 100.0) / 100.0:.2e}, B rel {abs(p.b - 5.0) / 5.0:.2e}, "
        f"phi err {abs(p.phi - 1.0):.2e}, {elapsed:.2f}s"
    )
    announce(capsys, 1, all(checks.values()), detail)


def test_criterion_2_noisy_calibration(noisy_ensemble, capsys):
    errors = np.array([abs(result.params.tc - 400.0) for _, result in noisy_ensemble])
    p95 = float(np.percentile(errors, 95))
    ok = p95 <= P95_REGRESSION_BOUND
    announce(
        capsys, 2, ok,
        f"p95 tc error {p95:.4f} d over {len(errors)} seeds "
        f"(frozen {FROZEN_P95_TC_ERROR:.4f} d, bound {P95_REGRESSION_BOUND:.4f} d)",
    )


def test_criterion_3_discrete_scale_invariance(capsys):
    rng = np.random.Generator(np.random.PCG64(99))
    worst_pi = 0.0
    worst_phi = 0.0
    for _ in range(1000):
        params = LogPeriodicParams(
            a=rng.uniform(1.0, 200.0),
            b=rng.uniform(0.0, 20.0),
            alpha=rng.uniform(-0.9, 0.9),
            phi=rng.uniform(0.0, 2.0 * math.pi),
            lam=rng.uniform(1.2, 4.0),
            tc=0.0,
            phase=Phase.DECELERATING,
        )
        x = rng.uniform(1.0, 500.0, size=16)
        pi_x = oscillatory_factor(params, x)
        pi_lx = oscillatory_factor(params, params.lam * x)
        worst_pi = max(worst_pi, float(np.max(np.abs(pi_lx - pi_x) / np.abs(pi_x))))
        phi_x = evaluate(params, x)
        phi_lx = evaluate(params, params.lam * x)
        scaled = params.lam**params.alpha * phi_x
        worst_phi = max(
            worst_phi, float(np.max(np.abs(phi_lx - scaled) / np.abs(scaled)))
        )

    # closed-form contraction at alpha = 0: with tc = 0 the extremum times
    # are the distances themselves, and doubling is exact in binary
    flat = LogPeriodicParams(
        a=10.0, b=1.0, alpha=0.0, phi=0.5, lam=2.0, tc=0.0, phase=Phase.DECELERATING
    )
    extrema = extrema_schedule(flat, Window(5.0, 5000.0))
    ratios = [b.t / a.t for a, b in zip(extrema, extrema[2:])]
    ratios_exact = bool(ratios) and all(r == 2.0 for r in ratios)

    ok = worst_pi <= 1e-12 and worst_phi <= 1e-12 and ratios_exact
    announce(
        capsys, 3, ok,
        f"1000 draws: max Pi dev {worst_pi:.2e}, max scaling dev {worst_phi:.2e}; "
        f"{len(ratios)} alpha=0 contraction ratios exactly 2.0: {ratios_exact}",
    )


def test_criterion_4_separable_solver_vs_brute_force(capsys):
    rng = np.random.Generator(np.random.PCG64(2026))
    tc, lam = 400.0, 2.0
    omega = 2.0 * math.pi / math.log(lam)
    worst = 0.0
    for _ in range(20):
        a_true = rng.uniform(50.0, 150.0)
        b_true = rng.uniform(2.0, 4.0)
        alpha = rng.uniform(-0.6, 0.3)
        phi_true = rng.uniform(0.0, 2.0 * math.pi)
        x = np.geomspace(20.0, 300.0, 30) * np.exp(rng.uniform(-0.01, 0.01, 30))
        t = np.sort(tc - x)
        x = tc - t
        w = x**alpha
        truth = LogPeriodicParams(
            a=a_true, b=b_true, alpha=alpha, phi=phi_true, lam=lam, tc=tc,
            phase=Phase.ACCELERATING,
        )
        sigma = 0.1 * b_true * math.sqrt(float(np.sum(w**2)))
        y = evaluate(truth, t) + sigma * rng.standard_normal(30)
        series = TimeSeries(t, y - y.min() + 1.0) if np.any(y <= 0) else TimeSeries(t, y)
        y = series.value

        lin = linear_subfit(series, tc, alpha, lam, Phase.ACCELERATING)

        # dense search over (B, phi) with A solved exactly per cell, using
        # the Gram-matrix expansion of the sum of squares
        theta = omega * np.log(x)
        c, s = w * np.cos(theta), w * np.sin(theta)
        yy = float(y @ y)
        yu, yc, ys = float(y @ w), float(y @ c), float(y @ s)
        uu, uc, us = float(w @ w), float(w @ c), float(w @ s)
        cc, cs, ss = float(c @ c), float(c @ s), float(s @ s)

        b_grid = np.arange(0.0, 2.0 * b_true + 5e-4, 1e-3)
        phi_grid = np.arange(0.0, 2.0 * math.pi, 1e-3)
        cosphi, sinphi = np.cos(phi_grid), np.sin(phi_grid)
        best_sse = math.inf
        for lo in range(0, len(b_grid), 256):
            b_blk = b_grid[lo : lo + 256, None]
            p = b_blk * cosphi[None, :]
            q = -b_blk * sinphi[None, :]
            a_star = (yu - p * uc - q * us) / uu
            sse = (
                yy
                - 2.0 * a_star * yu
                - 2.0 * p * yc
                - 2.0 * q * ys
                + a_star**2 * uu
                + p**2 * cc
                + q**2 * ss
                + 2.0 * a_star * p * uc
                + 2.0 * a_star * q * us
                + 2.0 * p * q * cs
            )
            best_sse = min(best_sse, float(sse.min()))
        brute_rmse = math.sqrt(max(best_sse, 0.0) / len(y))
        worst = max(worst, abs(lin.rmse - brute_rmse) / brute_rmse)

    announce(
        capsys, 4, worst <= 1e-6,
        f"20 instances: worst relative RMSE gap vs brute force {worst:.3g}",
    )


def test_criterion_5_historical_windows(capsys):
    cases = [
        (
            "sp500.csv",
            "2009-02-01", "2009-08-25",
            ("2009-09-20", "2009-09-30"),
        ),
        (
            "gold.csv",
            "2008-10-01", "2009-11-12",
            ("2009-11-21", "2009-12-05"),
        ),
    ]
    available = [c for c in cases if (DATA_DIR / c[0]).exists()]
    if not available:
        announce_skip(
            capsys, 5,
            "historical daily closes not provided (tests/data/sp500.csv, gold.csv)",
        )
    outcomes = []
    for name, start, end, (lo, hi) in available:
        parsed = parse_csv((DATA_DIR / name).read_text(encoding="utf-8"))
        window = Window(parse_time(start), parse_time(end))
        series = parsed.series.slice(window)
        config = FitConfig(
            phase=Phase.ACCELERATING,
            tc_range=(series.t_end + 5.0, series.t_end + 120.0),
            tc_step=1.0,
            alpha_range=(-1.0, 1.0),
            alpha_step=0.05,
            use_log_price=True,
        )
        result, _ = fit_series(series, config)
        tc_date = offset_date(result.params.tc)
        hit = parse_time(lo) <= day_offset(tc_date) <= parse_time(hi)
        outcomes.append((name, tc_date.isoformat(), hit))
    ok = all(hit for _, _, hit in outcomes)
    detail = "; ".join(f"{n}: tc {d} ({'in' if h else 'outside'} range)" for n, d, h in outcomes)
    announce(capsys, 5, ok, detail)


def test_criterion_6_scan_determinism(tmp_path, capsys):
    params = dict(
        A=100.0, B=5.0, alpha=-0.4, phi=1.0, tc=400.0, phase="accelerating"
    )
    params["lambda"] = 2.0
    csv = tmp_path / "series.csv"
    code = cli_main([
        "synth", "--params", json.dumps(params), "--window", "100:299",
        "--sigma", "0.5", "--seed", "7", "--out", str(csv),
    ])
    assert code == 0
    assert len(csv.read_text().strip().split("\n")) == 201  # header + 200 points

    def scan_run(tag, workers):
        out = tmp_path / f"{tag}.json"
        grid = tmp_path / f"{tag}.csv"
        start = time.perf_counter()
        rc = cli_main([
            "scan", "--input", str(csv), "--phase", "accel",
            "--workers", str(workers), "--out", str(out), "--grid-out", str(grid),
            "--timestamp", "2026-01-01T00:00:00Z",
        ])
        elapsed = time.perf_counter() - start
        assert rc in (0, 3)
        return out.read_bytes(), grid.read_bytes(), elapsed

    json1, grid1, t1 = scan_run("first", 1)
    json2, grid2, t2 = scan_run("second", 1)
    json4, grid4, _ = scan_run("parallel", 4)

    doc1 = json.loads(json1)
    doc4 = json.loads(json4)
    doc1.pop("manifest")
    doc4.pop("manifest")  # records the differing --workers flag

    reruns_identical = json1 == json2 and grid1 == grid2
    workers_identical = doc1 == doc4 and grid1 == grid4
    within_budget = max(t1, t2) <= 60.0
    announce(
        capsys, 6, reruns_identical and workers_identical and within_budget,
        f"rerun bytes identical: {reruns_identical}; serial == parallel: "
        f"{workers_identical}; default grid on 200 points in {max(t1, t2):.1f}s",
    )


def test_criterion_7_stationarity_at_optimum(noiseless_fit, noisy_ensemble, capsys):
    step = 1e-3
    worst = 0.0
    fits = [noiseless_fit[:2]] + noisy_ensemble
    for series, result in fits:
        p = result.params
        up = linear_subfit(series, p.tc + step, p.alpha, p.lam, p.phase)
        down = linear_subfit(series, p.tc - step, p.alpha, p.lam, p.phase)
        grad = abs(up.rmse - down.rmse) / (2.0 * step)
        scale = float(np.std(series.value))
        worst = max(worst, grad / scale)
    ok = worst <= 1e-4
    announce(
        capsys, 7, ok,
        f"max |dRMSE/dtc| over {len(fits)} optima = {worst:.2e} of the value "
        f"spread (limit 1e-4)",
    )
