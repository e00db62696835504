"""Derivative-free simplex minimization (Nelder-Mead).

Written here rather than borrowed so the termination rule can be stated
per dimension: the search stops when the simplex extent along every axis
falls below that axis' tolerance.  Infinite objective values are allowed
and act as soft constraints; vertices landing outside the feasible region
are simply reflected back by the ordinary simplex moves.
"""

from __future__ import annotations

from typing import Callable, NamedTuple, Sequence

import numpy as np


class SimplexResult(NamedTuple):
    x: np.ndarray
    fx: float
    iterations: int
    converged: bool


def nelder_mead(
    fn: Callable[[np.ndarray], float],
    x0: Sequence[float],
    steps: Sequence[float],
    xtol: Sequence[float],
    max_iter: int = 500,
) -> SimplexResult:
    """Minimize ``fn`` from ``x0`` with an axis-aligned initial simplex.

    ``steps`` sets the initial vertex displacement per axis and ``xtol``
    the per-axis simplex diameter below which the search terminates.
    """
    x0 = np.asarray(x0, dtype=float)
    steps = np.asarray(steps, dtype=float)
    xtol = np.asarray(xtol, dtype=float)
    dim = x0.size
    if steps.size != dim or xtol.size != dim:
        raise ValueError("steps and xtol must match the dimension of x0")

    alpha, gamma, rho, sigma = 1.0, 2.0, 0.5, 0.5

    vertices = np.tile(x0, (dim + 1, 1))
    for i in range(dim):
        vertices[i + 1, i] += steps[i]
    fvals = np.array([fn(v) for v in vertices])

    iterations = 0
    converged = False
    while iterations < max_iter:
        order = np.argsort(fvals, kind="stable")
        vertices = vertices[order]
        fvals = fvals[order]

        spread = vertices.max(axis=0) - vertices.min(axis=0)
        if np.all(spread < xtol):
            converged = True
            break
        if not np.isfinite(fvals[0]):
            break  # nowhere feasible to descend from

        iterations += 1
        centroid = vertices[:-1].mean(axis=0)

        reflected = centroid + alpha * (centroid - vertices[-1])
        f_r = fn(reflected)
        if fvals[0] <= f_r < fvals[-2]:
            vertices[-1], fvals[-1] = reflected, f_r
            continue

        if f_r < fvals[0]:
            expanded = centroid + gamma * (centroid - vertices[-1])
            f_e = fn(expanded)
            if f_e < f_r:
                vertices[-1], fvals[-1] = expanded, f_e
            else:
                vertices[-1], fvals[-1] = reflected, f_r
            continue

        contracted = centroid + rho * (vertices[-1] - centroid)
        f_c = fn(contracted)
        if f_c < fvals[-1]:
            vertices[-1], fvals[-1] = contracted, f_c
            continue

        # shrink toward the best vertex
        for i in range(1, dim + 1):
            vertices[i] = vertices[0] + sigma * (vertices[i] - vertices[0])
            fvals[i] = fn(vertices[i])

    best = int(np.argmin(fvals))
    return SimplexResult(vertices[best].copy(), float(fvals[best]), iterations, converged)


def polished_minimum(
    fn: Callable[[np.ndarray], float],
    x0: Sequence[float],
    steps: Sequence[float],
    xtol: Sequence[float],
    max_iter: int = 500,
    restarts: int = 3,
) -> SimplexResult:
    """Nelder-Mead with restarts from the incumbent.

    A fresh axis-aligned simplex around the best point escapes the
    degenerate (collapsed) simplexes the plain method can stall in, which
    matters when the optimum must be located to many digits.  Each restart
    shrinks the initial step; restarting stops once it no longer improves
    the objective.
    """
    steps = np.asarray(steps, dtype=float)
    xtol = np.asarray(xtol, dtype=float)
    best = nelder_mead(fn, x0, steps, xtol, max_iter)
    total_iter = best.iterations
    for k in range(1, restarts + 1):
        restart_steps = np.maximum(steps * 0.01**k, 20.0 * xtol)
        result = nelder_mead(fn, best.x, restart_steps, xtol, max_iter)
        total_iter += result.iterations
        gain = best.fx - result.fx
        if result.fx < best.fx:
            best = result
        if not gain > 1e-14 * max(abs(best.fx), 1e-300):
            break
    return SimplexResult(best.x, best.fx, total_iter, best.converged)
