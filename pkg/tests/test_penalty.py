"""Closed-form penalized paths and the a-priori bounds."""

import numpy as np
import pytest

from reflectsde.domain import Ball, HalfSpace
from reflectsde.path import StepPath
from reflectsde.penalty import (
    SUP_FACTOR,
    VARIATION_FACTOR,
    PenalizedPath,
    penalty_bounds,
    solve_penalized,
)
from reflectsde.skorokhod import solve_skorokhod

HALFLINE = HalfSpace([1.0], 0.0, anchor=[1.0])


def random_halfline_driver(rng, jumps=8):
    times = np.concatenate([[0.0], np.sort(rng.uniform(0, 1, jumps))])
    steps = rng.normal(scale=0.5, size=jumps + 1)
    steps[0] = abs(steps[0])
    return StepPath(times, np.cumsum(steps), q=1.0)


class TestClosedForm:
    def test_single_overshoot_halfline(self):
        y = StepPath([0.0, 0.5], [[0.5], [-1.0]], q=1.0)
        sol = solve_penalized(HALFLINE, y, n=9.0)
        assert sol.eval(0.25) == pytest.approx(0.5)  # interior: no pull
        assert sol.left_limit(0.5) == pytest.approx(0.5)
        assert sol.eval(0.5) == pytest.approx(-1.0)
        assert sol.eval(0.75) == pytest.approx(-np.exp(-2.25), abs=1e-15)
        assert sol.eval(1.0) == pytest.approx(-np.exp(-4.5), abs=1e-15)
        assert sol.penalty_variation() == pytest.approx(1.0 - np.exp(-4.5))

    def test_radial_relaxation_on_ball(self):
        # outside start; the radius contracts as 1 + (r0 - 1) e^{-n t}
        sol = PenalizedPath(2.0, [0.0], [[2.0, 0.0]], [[1.0, 0.0]], 1.0)
        for t in (0.0, 0.3, 1.0):
            want = 1.0 + np.exp(-2.0 * t)
            assert np.linalg.norm(sol.eval(t)) == pytest.approx(want, abs=1e-15)

    def test_confined_driver_is_untouched(self, rng):
        ball = Ball([0.0, 0.0], 3.0)
        steps = rng.uniform(-0.2, 0.2, size=(10, 2))
        steps[0] = 0.1
        y = StepPath(
            np.concatenate([[0.0], np.sort(rng.uniform(0, 1, 9))]),
            np.cumsum(steps, axis=0),
            q=1.0,
        )
        sol = solve_penalized(ball, y, n=50.0)
        assert np.array_equal(sol.states, y.values)
        assert np.array_equal(sol.projections, y.values)
        assert sol.penalty_variation() == 0.0
        ts = rng.uniform(0, 1, 20)
        assert np.array_equal(sol.eval_many(ts), y.eval_many(ts))

    def test_two_overshoots_saturate_variation(self):
        y = StepPath([0.0, 0.3, 0.6], [[0.5], [-1.0], [-2.0]], q=1.0)
        sol = solve_penalized(HALFLINE, y, n=100.0)
        assert sol.penalty_variation() == pytest.approx(2.0, abs=1e-13)

    def test_variation_matches_quadrature(self, rng):
        # independent check: n * integral of the distance to the domain
        y = random_halfline_driver(rng)
        n = 5.0
        sol = solve_penalized(HALFLINE, y, n=n)
        trapezoid = getattr(np, "trapezoid", None) or np.trapz
        quad = 0.0
        ends = np.append(sol.times[1:], sol.q)
        for lo, hi in zip(sol.times, ends):
            ts = np.linspace(lo, hi, 5001)
            vals = np.concatenate(
                [sol.eval_many(ts[:-1])[:, 0], sol.left_limit(hi)]
            )
            quad += n * trapezoid(np.maximum(-vals, 0.0), ts)
        assert sol.penalty_variation() == pytest.approx(quad, abs=1e-6)

    def test_variation_monotone_in_time(self, rng):
        y = random_halfline_driver(rng)
        sol = solve_penalized(HALFLINE, y, n=20.0)
        ts = np.linspace(0, 1, 17)
        vals = [sol.penalty_variation(t) for t in ts]
        assert vals[0] == 0.0
        assert all(a <= b + 1e-15 for a, b in zip(vals, vals[1:]))

    def test_jump_sizes_match_driver(self, rng):
        y = random_halfline_driver(rng)
        sol = solve_penalized(HALFLINE, y, n=13.0)
        for t in y.times[1:]:
            got = sol.eval(t) - sol.left_limit(t)
            assert got == pytest.approx(y.jump(t), abs=1e-12)

    def test_continuity_between_jumps(self, rng):
        y = random_halfline_driver(rng)
        sol = solve_penalized(HALFLINE, y, n=40.0)
        t = float(y.times[3]) + 1e-10
        assert sol.left_limit(t) == pytest.approx(sol.eval(t), abs=1e-7)

    def test_underflow_rate_reproduces_reflection(self, rng):
        # n dt <= -exp underflow: the relaxed state IS the projection, so
        # breakpoint projections coincide bitwise with the reflected path
        times = np.arange(0.0, 1.0, 0.01)
        steps = rng.normal(scale=0.3, size=times.shape[0])
        steps[0] = 0.4
        y = StepPath(times, np.cumsum(steps), q=1.0)
        sol = solve_penalized(HALFLINE, y, n=1e8)
        ref = solve_skorokhod(HALFLINE, y)
        assert np.array_equal(sol.projections, ref.x.values)

    def test_sup_deviation_is_exact(self, rng):
        y = random_halfline_driver(rng)
        sol = solve_penalized(HALFLINE, y, n=7.0)
        exact = sol.sup_deviation([1.0])
        ts = np.linspace(0, 1, 40_001)
        dense = float(np.max(np.abs(sol.eval_many(ts)[:, 0] - 1.0)))
        assert dense <= exact + 1e-12
        assert exact - dense <= 1e-4

    def test_json_round_trip(self, rng):
        y = random_halfline_driver(rng)
        sol = solve_penalized(HALFLINE, y, n=3.5)
        back = PenalizedPath.from_json(sol.to_json())
        assert back.n == sol.n and back.q == sol.q
        assert np.array_equal(back.times, sol.times)
        assert np.array_equal(back.states, sol.states)
        assert np.array_equal(back.projections, sol.projections)

    def test_to_step_samples_closed_form(self, rng):
        y = random_halfline_driver(rng)
        sol = solve_penalized(HALFLINE, y, n=6.0)
        grid = np.linspace(0, 1, 11)
        step = sol.to_step(grid)
        assert np.array_equal(step.values, sol.eval_many(grid))
        assert step.q == sol.q

    def test_validation(self):
        y = StepPath([0.0], [[0.5]], q=1.0)
        with pytest.raises(ValueError):
            solve_penalized(HALFLINE, y, n=0.0)
        with pytest.raises(ValueError):
            solve_penalized(HALFLINE, StepPath([0.0], [[0.5, 0.5]], q=1.0), n=1.0)
        from reflectsde.domain import DomainViolationError

        with pytest.raises(DomainViolationError):
            solve_penalized(HALFLINE, StepPath([0.0], [[-2.0]], q=1.0), n=1.0)
        with pytest.raises(ValueError):
            PenalizedPath(1.0, [0.0, 0.5], [[1.0]], [[1.0]], 1.0)
        with pytest.raises(ValueError):
            PenalizedPath(1.0, [0.0], [[1.0]], [[1.0]], -1.0)
        sol = solve_penalized(HALFLINE, y, n=1.0)
        with pytest.raises(AttributeError):
            sol.n = 2.0


class TestAprioriBounds:
    def test_frozen_multipliers(self):
        y = StepPath.constant(0.0, 1.0)  # boundary point, distance 1 to anchor
        b = penalty_bounds(HALFLINE, y, delta=0.5)
        assert b.cells == 3
        assert b.modulus == 0.0
        assert b.precondition_ok
        assert b.sup_deviation == pytest.approx(1.0)
        assert b.bound_sup == pytest.approx(6.0 * np.sqrt(7.0))
        assert b.bound_var == pytest.approx(55.0 * 27.0)
        assert SUP_FACTOR == pytest.approx(2.0 * np.sqrt(7.0))
        assert VARIATION_FACTOR == 55.0

    def test_driver_at_anchor_gives_zero_bounds(self):
        y = StepPath.constant(1.0, 1.0)
        b = penalty_bounds(HALFLINE, y, delta=0.25)
        assert b.sup_deviation == 0.0
        assert b.bound_sup == 0.0
        assert b.bound_var == 0.0

    def test_precondition_gate(self):
        # two large jumps 0.05 apart cannot be separated at delta = 0.25
        y = StepPath([0.0, 0.3, 0.35], [[0.5], [5.0], [0.5]], q=1.0)
        b = penalty_bounds(HALFLINE, y, delta=0.25)
        assert b.modulus == pytest.approx(4.5)
        assert not b.precondition_ok

    def test_anchor_override(self):
        y = StepPath.constant(0.5, 1.0)
        b = penalty_bounds(HALFLINE, y, delta=0.5, anchor=[2.0])
        assert b.clearance == pytest.approx(2.0)
        assert b.sup_deviation == pytest.approx(1.5)
        with pytest.raises(ValueError):
            penalty_bounds(HALFLINE, y, delta=0.5, anchor=[-1.0])
        with pytest.raises(ValueError):
            penalty_bounds(HALFLINE, y, delta=0.5, anchor=[0.0])

    def test_bounds_hold_across_rates(self, rng):
        # jumps isolated by construction so the modulus vanishes
        times = np.array([0.0, 0.2, 0.4, 0.6, 0.8])
        for _ in range(10):
            steps = rng.normal(scale=1.5, size=5)
            steps[0] = abs(steps[0])
            y = StepPath(times, np.cumsum(steps), q=1.0)
            b = penalty_bounds(HALFLINE, y, delta=0.19)
            assert b.precondition_ok
            for n in (1.0, 10.0, 100.0, 1000.0):
                sol = solve_penalized(HALFLINE, y, n=n)
                assert sol.sup_deviation([1.0]) <= b.bound_sup + 1e-9
                assert sol.penalty_variation() <= b.bound_var + 1e-9

    def test_delta_validation(self):
        y = StepPath.constant(0.5, 1.0)
        with pytest.raises(ValueError):
            penalty_bounds(HALFLINE, y, delta=1.5)
        with pytest.raises(ValueError):
            penalty_bounds(HALFLINE, y, delta=0.0)
