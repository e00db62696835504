"""The log-periodic critical-time model.

The oscillatory factor is

    pi(x) = A + B * cos(omega * ln(x) + phi),      omega = 2*pi / ln(lambda)

and the full curve is

    phi(t) = x**alpha * pi(x),                     x = |t - tc|

where ``tc`` is the critical time and ``lambda`` the preferred scaling
factor.  Because omega * ln(lambda) = 2*pi, the curve is invariant under
x -> lambda*x up to the factor lambda**alpha (discrete scale invariance):
successive oscillations contract geometrically by exactly lambda as the
distance to ``tc`` shrinks.

Two phases are supported.  In an accelerating phase ``tc`` lies ahead of
the data (x = tc - t, shrinking as t grows); in a decelerating phase it
lies behind (x = t - tc, growing).  Evaluation is guarded within
``X_MIN`` days of ``tc``, where the representation is singular or
degenerate.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .errors import DomainError, PhaseDomainError, SingularityGuardError
from .series import Window

TWO_PI = 2.0 * math.pi

# Evaluation guard around tc, in days.  Half a day is below the data
# resolution, so no observation ever sits this close to a usable tc; the
# fitter enforces a larger margin on top (see fit.FitConfig.tc_margin).
X_MIN = 0.5


class Phase(enum.Enum):
    """Which side of the critical time the data lives on."""

    ACCELERATING = "accelerating"
    DECELERATING = "decelerating"

    @classmethod
    def parse(cls, text: "Phase | str") -> "Phase":
        if isinstance(text, Phase):
            return text
        key = text.strip().lower()
        if key in ("accel", "accelerating", "bubble"):
            return cls.ACCELERATING
        if key in ("decel", "decelerating", "anti-bubble", "antibubble"):
            return cls.DECELERATING
        raise ValueError(f"unknown phase {text!r}")


def canonical_phase(phi_raw: float) -> float:
    """Reduce a phase offset to the canonical interval [0, 2*pi)."""
    if not math.isfinite(phi_raw):
        raise DomainError(f"phase offset must be finite, got {phi_raw}")
    phi = math.fmod(phi_raw, TWO_PI)
    if phi < 0.0:
        phi += TWO_PI
    if phi >= TWO_PI:  # rounding of tiny negative inputs
        phi = 0.0
    return phi


@dataclass(frozen=True)
class LogPeriodicParams:
    """Full parameter set of the model.

    ``omega`` is always derived from ``lam`` and never stored, so the
    identity omega = 2*pi/ln(lambda) cannot drift.  ``b`` may be negative;
    (b, phi) and (-b, phi + pi) describe the same curve, and
    :meth:`canonical` picks the b >= 0 representative.
    """

    a: float
    b: float
    alpha: float
    phi: float
    lam: float
    tc: float
    phase: Phase

    def __post_init__(self) -> None:
        for name in ("a", "b", "alpha", "phi", "lam", "tc"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ValueError(f"parameter {name} must be finite, got {v!r}")
            object.__setattr__(self, name, float(v))
        if self.lam <= 1.0:
            raise ValueError(f"scaling factor lambda must exceed 1, got {self.lam}")
        if not 0.0 <= self.phi < TWO_PI:
            raise ValueError(f"phi must lie in [0, 2*pi), got {self.phi}")
        object.__setattr__(self, "phase", Phase.parse(self.phase))

    @property
    def omega(self) -> float:
        return TWO_PI / math.log(self.lam)

    def canonical(self) -> "LogPeriodicParams":
        """Equivalent parameters with b >= 0 (and phi = 0 when b == 0)."""
        if self.b > 0.0:
            return self
        if self.b == 0.0:
            return replace(self, phi=0.0)
        return replace(self, b=-self.b, phi=canonical_phase(self.phi + math.pi))


def oscillatory_factor(params: LogPeriodicParams, x):
    """The bounded oscillation pi(x) = a + b*cos(omega*ln(x) + phi).

    ``x`` is a positive distance to the critical time, in days; scalar or
    array input is accepted.
    """
    x_arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x_arr)) or np.any(x_arr <= 0.0):
        raise DomainError("distance x must be finite and positive")
    out = params.a + params.b * np.cos(params.omega * np.log(x_arr) + params.phi)
    return float(out) if np.isscalar(x) or x_arr.ndim == 0 else out


def distance(params: LogPeriodicParams, t):
    """Signed-checked distance x = |t - tc| for the parameter phase.

    Raises :class:`PhaseDomainError` when ``t`` sits on the wrong side of
    ``tc`` and :class:`SingularityGuardError` within ``X_MIN`` days of it.
    """
    t_arr = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(t_arr)):
        raise DomainError("time must be finite")
    if params.phase is Phase.ACCELERATING:
        x = params.tc - t_arr
    else:
        x = t_arr - params.tc
    if np.any(x <= 0.0):
        side = "before" if params.phase is Phase.ACCELERATING else "after"
        raise PhaseDomainError(
            f"{params.phase.value} phase requires t strictly {side} tc={params.tc}"
        )
    if np.any(x < X_MIN):
        raise SingularityGuardError(
            f"|t - tc| must be >= {X_MIN} days (tc={params.tc})"
        )
    return x


def evaluate(params: LogPeriodicParams, t):
    """Model value phi(t) = x**alpha * pi(x) with x = |t - tc|."""
    x = distance(params, t)
    out = x**params.alpha * (
        params.a + params.b * np.cos(params.omega * np.log(x) + params.phi)
    )
    t_arr = np.asarray(t)
    return float(out) if np.isscalar(t) or t_arr.ndim == 0 else out


@dataclass(frozen=True)
class ModelCurve:
    """A sampled model curve; every sample respects the singularity guard."""

    params: LogPeriodicParams
    t: np.ndarray
    value: np.ndarray

    def __post_init__(self) -> None:
        t = np.array(self.t, dtype=float)
        value = np.array(self.value, dtype=float)
        if t.shape != value.shape or t.ndim != 1:
            raise ValueError("curve samples must be matched 1-d arrays")
        if np.any(np.abs(t - self.params.tc) < X_MIN):
            raise SingularityGuardError(
                f"curve samples must keep |t - tc| >= {X_MIN}"
            )
        t.setflags(write=False)
        value.setflags(write=False)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "value", value)

    @property
    def t_start(self) -> float:
        return float(self.t[0])

    @property
    def t_end(self) -> float:
        return float(self.t[-1])


def sample_curve(params: LogPeriodicParams, t) -> ModelCurve:
    return ModelCurve(params, np.asarray(t, dtype=float), evaluate(params, t))


class Extremum(NamedTuple):
    t: float
    kind: str  # "max" or "min"


def extrema_schedule(
    params: LogPeriodicParams, window: Window, *, x_tol: float = 1e-6
) -> list[Extremum]:
    """Stationary points of the model inside a window, ordered by time.

    For alpha == 0 the extrema of the oscillatory factor are exact:
    x_k = exp((k*pi - phi)/omega), alternating maxima and minima, with
    same-kind distances contracting by exactly lambda.  For alpha != 0 the
    stationary points of the full curve are located numerically on a dense
    grid with bisection refinement to ``x_tol`` days.

    The window must not contain ``tc`` in its interior.
    """
    if window.t_start < params.tc < window.t_end:
        raise DomainError(
            f"window [{window.t_start}, {window.t_end}] contains tc={params.tc}"
        )
    if params.phase is Phase.ACCELERATING:
        x_lo, x_hi = params.tc - window.t_end, params.tc - window.t_start
    else:
        x_lo, x_hi = window.t_start - params.tc, window.t_end - params.tc
    x_lo = max(x_lo, X_MIN)
    if x_hi < x_lo or params.b == 0.0:
        return []

    if params.alpha == 0.0:
        found = _exact_oscillation_extrema(params, x_lo, x_hi)
    else:
        found = _numeric_extrema(params, x_lo, x_hi, x_tol)

    if params.phase is Phase.ACCELERATING:
        out = [Extremum(params.tc - x, kind) for x, kind in found]
    else:
        out = [Extremum(params.tc + x, kind) for x, kind in found]
    out.sort(key=lambda e: e.t)
    return out


def _exact_oscillation_extrema(params, x_lo, x_hi):
    """Closed-form stationary points of pi for alpha == 0.

    cos(omega*ln x + phi) is stationary where the argument hits k*pi.
    Each parity stream (fixed extremum kind) is generated multiplicatively,
    x -> lambda*x, so consecutive same-kind distances contract by the
    float product with lambda itself; for lambda = 2 the ratio is exact.
    """
    omega, phi = params.omega, params.phi
    k_lo = math.ceil((omega * math.log(x_lo) + phi) / math.pi - 1e-12)
    k_hi = math.floor((omega * math.log(x_hi) + phi) / math.pi + 1e-12)
    found: list[tuple[float, str]] = []
    for parity in (0, 1):
        k0 = k_lo if (k_lo - parity) % 2 == 0 else k_lo + 1
        if k0 > k_hi:
            continue
        # cos(k*pi) = +1 at even k: a maximum when b > 0, a minimum when b < 0
        if (parity == 0) == (params.b > 0):
            kind = "max"
        else:
            kind = "min"
        x = math.exp((k0 * math.pi - phi) / omega)
        k = k0
        while k <= k_hi:
            if x_lo * (1.0 - 1e-12) <= x <= x_hi * (1.0 + 1e-12):
                found.append((x, kind))
            x *= params.lam
            k += 2
    return found


def _numeric_extrema(params, x_lo, x_hi, x_tol):
    """Sign changes of d(phi)/dx on a dense log-spaced grid, bisected.

    The derivative sign equals the sign of
    s(x) = alpha*(a + b*cos(theta)) - omega*b*sin(theta),  theta = omega*ln x + phi,
    since phi'(x) = x**(alpha-1) * s(x) and x > 0.
    """
    omega = params.omega

    def slope(x):
        theta = omega * math.log(x) + params.phi
        return params.alpha * (
            params.a + params.b * math.cos(theta)
        ) - omega * params.b * math.sin(theta)

    # 256 samples per oscillation period of theta
    n = max(int(math.ceil((math.log(x_hi) - math.log(x_lo)) / math.log(params.lam) * 256)), 2)
    grid = np.exp(np.linspace(math.log(x_lo), math.log(x_hi), n + 1))
    values = [slope(x) for x in grid]

    found: list[tuple[float, str]] = []
    for i in range(n):
        s0, s1 = values[i], values[i + 1]
        if s0 * s1 < 0.0:
            lo, hi = float(grid[i]), float(grid[i + 1])
            while hi - lo > x_tol:
                mid = 0.5 * (lo + hi)
                if slope(mid) * s0 <= 0.0:
                    hi = mid
                else:
                    lo = mid
            kind = "max" if s0 > 0.0 else "min"
            found.append((0.5 * (lo + hi), kind))
    return found
