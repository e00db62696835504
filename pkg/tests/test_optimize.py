"""Derivative-free simplex minimizer."""

import math

import numpy as np
import pytest

from logperiodic.optimize import nelder_mead, polished_minimum


def quadratic(v):
    return (v[0] - 3.0) ** 2 + 2.0 * (v[1] + 1.5) ** 2


def rosenbrock(v):
    return (1.0 - v[0]) ** 2 + 100.0 * (v[1] - v[0] ** 2) ** 2


class TestNelderMead:
    def test_quadratic_bowl(self):
        res = nelder_mead(quadratic, [0.0, 0.0], [0.5, 0.5], [1e-9, 1e-9])
        assert res.converged
        assert res.x[0] == pytest.approx(3.0, abs=1e-7)
        assert res.x[1] == pytest.approx(-1.5, abs=1e-7)
        assert res.fx == pytest.approx(0.0, abs=1e-12)

    def test_one_dimensional(self):
        res = nelder_mead(lambda v: math.cosh(v[0] - 2.0), [0.0], [1.0], [1e-10])
        assert res.x[0] == pytest.approx(2.0, abs=1e-8)

    def test_rosenbrock_with_restarts(self):
        res = polished_minimum(rosenbrock, [-1.2, 1.0], [0.5, 0.5], [1e-10, 1e-10])
        assert res.fx < 1e-12
        assert res.x[0] == pytest.approx(1.0, abs=1e-5)
        assert res.x[1] == pytest.approx(1.0, abs=1e-5)

    def test_per_axis_tolerances(self):
        # wildly different parameter scales: termination must respect each
        # axis's own tolerance, not a shared norm
        def f(v):
            return (v[0] / 1000.0 - 1.0) ** 2 + (v[1] - 0.001) ** 2

        res = polished_minimum(f, [0.0, 0.0], [500.0, 0.01], [1e-4, 1e-10])
        assert res.x[0] == pytest.approx(1000.0, abs=1e-2)
        assert res.x[1] == pytest.approx(0.001, abs=1e-7)

    def test_infinite_objective_acts_as_constraint(self):
        def f(v):
            if v[0] < 0.0:
                return math.inf
            return (v[0] - 0.3) ** 2 + abs(v[1])

        res = polished_minimum(f, [1.0, 1.0], [0.8, 0.8], [1e-9, 1e-9])
        assert res.x[0] == pytest.approx(0.3, abs=1e-6)
        assert abs(res.x[1]) < 1e-6

    def test_iteration_cap_reported(self):
        res = nelder_mead(rosenbrock, [-1.2, 1.0], [0.5, 0.5], [1e-12, 1e-12], max_iter=5)
        assert not res.converged
        assert res.iterations <= 5

    def test_start_already_optimal(self):
        res = nelder_mead(quadratic, [3.0, -1.5], [0.1, 0.1], [1e-10, 1e-10])
        assert res.fx <= quadratic(np.array([3.0, -1.5]))

    def test_restarts_never_worsen(self):
        seen = []

        def f(v):
            seen.append(float(rosenbrock(v)))
            return seen[-1]

        res = polished_minimum(f, [-1.2, 1.0], [0.5, 0.5], [1e-8, 1e-8])
        assert res.fx == min(seen)
