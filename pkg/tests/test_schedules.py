import math

import numpy as np
import pytest

from pite_lab.core.schedules import (
    ScheduleKind,
    constant_schedule,
    exponential_final_step,
    exponential_schedule,
    linear_schedule,
    make_schedule,
    schedule_fractions,
)
from pite_lab.errors import InvalidArgumentError


class TestLinearSchedule:
    def test_endpoints(self):
        sched = linear_schedule(1e-4, math.pi, 200)
        assert sched.K == 200
        assert sched.steps[0] == 1e-4
        assert sched.final_step == math.pi

    def test_cumulative_tau_matches_direct_sum(self):
        sched = linear_schedule(1e-4, math.pi, 200)
        assert sched.cumulative_tau == pytest.approx(200 * (math.pi + 1e-4) / 2, rel=1e-12)
        assert sched.steps.sum() == pytest.approx(sched.cumulative_tau, rel=1e-12)

    def test_constant_increment(self):
        steps = linear_schedule(0.0, 1.0, 11).steps
        np.testing.assert_allclose(np.diff(steps), 0.1, atol=1e-15)

    def test_degenerate_range_is_constant(self):
        steps = linear_schedule(0.3, 0.3, 5).steps
        np.testing.assert_array_equal(steps, 0.3)

    @pytest.mark.parametrize("args", [(0.0, 1.0, 1), (1.0, 0.5, 10), (-0.1, 1.0, 10)])
    def test_invalid(self, args):
        with pytest.raises(InvalidArgumentError):
            linear_schedule(*args)


class TestExponentialSchedule:
    def test_final_step_formula(self):
        sched = exponential_schedule(0.0, 1.0, 200, 1.0)
        assert sched.final_step == pytest.approx(1 - math.exp(1 / 200 - 1), rel=1e-12)
        assert exponential_final_step(0.0, 1.0, 200, 1.0) == pytest.approx(sched.final_step, rel=1e-12)

    def test_first_step_is_minimum(self):
        sched = exponential_schedule(1e-4, 2.0, 50, 0.5)
        assert sched.steps[0] == pytest.approx(1e-4)
        assert np.all(np.diff(sched.steps) > 0)
        assert sched.final_step < 2.0

    @pytest.mark.parametrize("kappa_bar", [0.25, 0.5, 1.0])
    def test_cumulative_tau_closed_form(self, kappa_bar):
        sched = exponential_schedule(1e-4, 2.0, 50, kappa_bar)
        assert sched.cumulative_tau == pytest.approx(sched.steps.sum(), rel=1e-12)

    def test_requires_positive_kappa_bar(self):
        with pytest.raises(InvalidArgumentError):
            exponential_schedule(0.0, 1.0, 10, 0.0)


class TestConstantSchedule:
    def test_steps(self):
        sched = constant_schedule(0.25, 8)
        np.testing.assert_array_equal(sched.steps, 0.25)
        assert sched.cumulative_tau == pytest.approx(2.0)

    def test_rejects_negative_step(self):
        with pytest.raises(InvalidArgumentError):
            constant_schedule(-1.0, 3)


class TestMakeSchedule:
    @pytest.mark.parametrize("kind", ["linear", "exponential", "constant"])
    def test_dispatch(self, kind):
        sched = make_schedule(kind, 0.1, 1.0, 10, kappa_bar=0.5)
        assert sched.kind is ScheduleKind(kind)
        assert sched.K == 10

    def test_exponential_needs_kappa_bar(self):
        with pytest.raises(InvalidArgumentError):
            make_schedule("exponential", 0.1, 1.0, 10)

    def test_scaled(self):
        sched = make_schedule("constant", 0.0, 0.5, 3)
        np.testing.assert_allclose(sched.scaled(2.0), 1.0)

    def test_steps_are_read_only(self):
        sched = make_schedule("linear", 0.0, 1.0, 4)
        with pytest.raises(ValueError):
            sched.steps[0] = 3.0

    def test_fractions_end_at_one_for_linear(self):
        frac = schedule_fractions("linear", 7)
        assert frac[0] == 0.0
        assert frac[-1] == 1.0


class TestScheduleProperties:
    def test_closed_form_sums_over_random_draws(self, rng):
        for _ in range(1000):
            dtau_min = float(rng.uniform(0, 1))
            dtau_max = dtau_min + float(rng.uniform(0, 3))
            K = int(rng.integers(2, 301))
            if rng.random() < 0.5:
                sched = linear_schedule(dtau_min, dtau_max, K)
            else:
                sched = exponential_schedule(dtau_min, dtau_max, K, float(rng.uniform(0.1, 2.0)))
            assert sched.cumulative_tau == pytest.approx(math.fsum(sched.steps), rel=1e-12)
            assert sched.steps[0] == pytest.approx(dtau_min, abs=1e-15)
            assert np.all(np.diff(sched.steps) >= 0)

    def test_exponential_final_step_over_random_draws(self, rng):
        for _ in range(200):
            dtau_min = float(rng.uniform(0, 1))
            dtau_max = dtau_min + float(rng.uniform(0.1, 3))
            K = int(rng.integers(2, 301))
            kappa_bar = float(rng.uniform(0.1, 2.0))
            sched = exponential_schedule(dtau_min, dtau_max, K, kappa_bar)
            expected = exponential_final_step(dtau_min, dtau_max, K, kappa_bar)
            assert sched.final_step == pytest.approx(expected, rel=1e-12)

    def test_larger_kappa_bar_ramps_slower(self):
        K = 50
        steps = [exponential_schedule(1e-4, 2.0, K, kb).steps for kb in (0.25, 0.5, 1.0)]
        for faster, slower in zip(steps, steps[1:]):
            assert np.all(slower[1:-1] < faster[1:-1])
            assert slower[0] == faster[0]
