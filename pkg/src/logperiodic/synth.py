"""Synthetic series generation from known parameters — the test oracle.

Values are the exact model curve plus i.i.d. additive Gaussian noise from
a seeded PCG64 generator (pinned algorithm, not the platform default, so
identical configs produce identical bytes everywhere).  Draws that land at
or below zero are re-drawn rather than clipped — clipping would bias the
noise distribution — and the number of re-draws is reported so heavy
distortion is visible.  An optional substructure adds a second
log-periodic component at a shorter scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError
from .model import LogPeriodicParams, distance, evaluate
from .series import TimeSeries, Window


@dataclass(frozen=True)
class SynthConfig:
    params: LogPeriodicParams
    window: Window
    sampling: float = 1.0
    noise_sigma: float = 0.0
    seed: int = 0
    substructure: LogPeriodicParams | None = None

    def __post_init__(self) -> None:
        if not self.sampling > 0.0:
            raise ValueError("sampling must be > 0 days")
        if not self.noise_sigma >= 0.0:
            raise ValueError("noise_sigma must be >= 0")
        object.__setattr__(self, "seed", int(self.seed))
        for component in (self.params, self.substructure):
            if component is None:
                continue
            # Raises if either endpoint crosses the phase side or the
            # singularity guard; that covers the interior too, since the
            # offending sample would always include an endpoint.
            distance(component, self.window.t_start)
            distance(component, self.window.t_end)


class SynthResult(NamedTuple):
    series: TimeSeries
    redraw_count: int


def sample_times(config: SynthConfig) -> np.ndarray:
    n = int(math.floor(config.window.span / config.sampling + 1e-9))
    return config.window.t_start + config.sampling * np.arange(n + 1)


def generate(config: SynthConfig) -> SynthResult:
    """Deterministically synthesize a positive series from the config."""
    t = sample_times(config)
    if t.size < 2:
        raise DomainError("window and sampling produce fewer than 2 points")
    curve = evaluate(config.params, t)
    if config.substructure is not None:
        curve = curve + evaluate(config.substructure, t)
    if np.any(curve <= 0.0):
        raise DomainError(
            "noiseless model curve is not strictly positive on the window; "
            "cannot synthesize a price series"
        )
    if config.noise_sigma == 0.0:
        return SynthResult(TimeSeries(t, curve), 0)
    rng = np.random.Generator(np.random.PCG64(config.seed))
    values = curve + config.noise_sigma * rng.standard_normal(t.size)
    redraws = 0
    bad = values <= 0.0
    for _ in range(1000):
        if not bad.any():
            break
        k = int(bad.sum())
        redraws += k
        values[bad] = curve[bad] + config.noise_sigma * rng.standard_normal(k)
        bad = values <= 0.0
    else:
        raise DomainError(
            "positivity re-draws did not converge; noise_sigma overwhelms the curve"
        )
    return SynthResult(TimeSeries(t, values), redraws)
