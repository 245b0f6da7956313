import math
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from shared.core.exceptions import DomainError
from shared.schemas.v1 import SaaConfig
from shared.services.v1.power_opt import (ChannelTrace, PowerSchedule,
                                          QueueEntry, deadline_violations,
                                          draw_traces, fifo_deadlines_met,
                                          optimal_power_single_task,
                                          restore_power, saa_sample_count,
                                          schedule_from_frame,
                                          schedule_to_frame, solve_queue_power,
                                          solve_subproblem, write_csv)
from shared.services.v1.system_model import (DeterministicSampler,
                                             RayleighSampler,
                                             channel_mean_gain, slot_bits)

GOLDEN = Path(__file__).parent / "golden"


class TestSampleCount:
    def test_collapsed_formula(self):
        assert saa_sample_count(0.5, math.exp(-1), 1) == 2

    @pytest.mark.parametrize("n_vars, expected", [(11, 349), (10, 328)])
    def test_fixtures(self, n_vars, expected):
        assert saa_sample_count(0.1, 0.05, n_vars) == expected

    def test_grows_as_epsilon_shrinks(self):
        counts = [saa_sample_count(eps, 0.05, 5) for eps in (0.4, 0.2, 0.1, 0.05)]
        assert counts == sorted(counts)
        assert len(set(counts)) == len(counts)

    def test_corrected_form_is_smaller(self):
        assert saa_sample_count(0.1, 0.05, 11, corrected=True) < saa_sample_count(0.1, 0.05, 11)

    @pytest.mark.parametrize("args", [(0.0, 0.5, 1), (0.5, 1.0, 1), (0.5, 0.5, 0)])
    def test_domain(self, args):
        with pytest.raises(DomainError):
            saa_sample_count(*args)


class TestRestore:
    def test_identical(self):
        sched = PowerSchedule(0, np.array([1.0, 2.0]))
        np.testing.assert_allclose(restore_power([sched, sched], 5.0).powers, [1.0, 2.0])

    def test_mean(self):
        a, b = PowerSchedule(0, np.array([0.0, 2.0])), PowerSchedule(0, np.array([2.0, 0.0]))
        np.testing.assert_allclose(restore_power([a, b], 5.0).powers, [1.0, 1.0])

    def test_clamped(self):
        a, b = PowerSchedule(0, np.array([4.0])), PowerSchedule(0, np.array([6.0]))
        np.testing.assert_allclose(restore_power([a, b], 3.0).powers, [3.0])

    def test_within_copies(self, rng):
        copies = [PowerSchedule(0, rng.uniform(0, 1, 6)) for _ in range(5)]
        stacked = np.stack([c.powers for c in copies])
        restored = restore_power(copies, 10.0).powers
        assert np.all(restored <= stacked.max(axis=0) + 1e-15)
        assert np.all(restored >= stacked.min(axis=0) - 1e-15)

    def test_mismatched(self):
        with pytest.raises(DomainError):
            restore_power([PowerSchedule(0, np.ones(2)), PowerSchedule(1, np.ones(2))], 1.0)


class TestSubproblem:
    def test_empty_queue(self, params):
        sched = solve_subproblem(ChannelTrace.flat(0, 4, 1.0), [], 0, params)
        np.testing.assert_array_equal(sched.powers, np.zeros(4))

    def test_single_task_flat_is_uniform(self, params):
        trace = ChannelTrace.flat(0, 10, channel_mean_gain(params))
        sched = solve_subproblem(trace, [QueueEntry(0, 2e4, 0, 10)], 0, params)
        np.testing.assert_allclose(sched.powers, sched.powers[0], rtol=1e-12)

    def test_delivers_each_task(self, params, rng):
        tasks = [QueueEntry(0, 2e4, 0, 10), QueueEntry(1, 2e4, 3, 13)]
        gains = (rng.exponential(size=13) + 0.2) * channel_mean_gain(params)
        trace = ChannelTrace(0, gains)
        sched = solve_subproblem(trace, tasks, 0, params)
        assert not sched.infeasible
        assert deadline_violations(sched, tasks, trace, params) == 0


class TestFifo:
    def test_head_blocks_until_done(self):
        tasks = [QueueEntry(0, 10.0, 0, 3), QueueEntry(1, 5.0, 0, 4)]
        met = fifo_deadlines_met(np.array([[6.0, 6.0, 6.0, 0.0]]), 0, tasks)
        # второй задаче достается только третий слот
        assert met.tolist() == [[True, True]]

    def test_expired_task_leaves_queue(self):
        tasks = [QueueEntry(0, 100.0, 0, 2), QueueEntry(1, 5.0, 0, 4)]
        met = fifo_deadlines_met(np.array([[1.0, 1.0, 6.0, 0.0]]), 0, tasks)
        assert met.tolist() == [[False, True]]

    def test_waits_for_ready(self):
        tasks = [QueueEntry(0, 5.0, 2, 4)]
        met = fifo_deadlines_met(np.array([[9.0, 9.0, 0.0, 0.0]]), 0, tasks)
        assert met.tolist() == [[False]]


class TestSolveP1b:
    def test_empty_queue(self, params, saa):
        sched = solve_queue_power([], 5, saa, RayleighSampler(), 1, params)
        assert sched.start == 5
        assert len(sched) == 0

    def test_deterministic_for_seed(self, params, saa):
        tasks = [QueueEntry(0, 2e4, 0, 10), QueueEntry(1, 2e4, 2, 12)]
        a = solve_queue_power(tasks, 0, saa, RayleighSampler(), 42, params)
        b = solve_queue_power(tasks, 0, saa, RayleighSampler(), 42, params)
        np.testing.assert_array_equal(a.powers, b.powers)

    def test_single_sample_matches_subproblem(self, params):
        tasks = [QueueEntry(0, 2e4, 0, 10)]
        saa = SaaConfig(k_samples=1)
        plan = solve_queue_power(tasks, 0, saa, RayleighSampler(), 3, params)
        trace = draw_traces(RayleighSampler(), 3, 1, 0, 10, params)[0]
        np.testing.assert_allclose(plan.powers, solve_subproblem(trace, tasks, 0, params).powers)

    def test_zero_variance_channel_is_identity(self, params):
        tasks = [QueueEntry(0, 2e4, 0, 10)]
        plan = solve_queue_power(tasks, 0, SaaConfig(k_samples=6), DeterministicSampler(), 0, params)
        trace = ChannelTrace.flat(0, 10, channel_mean_gain(params))
        np.testing.assert_allclose(plan.powers, solve_subproblem(trace, tasks, 0, params).powers)

    def test_retained_samples_meet_deadlines(self, params, saa):
        tasks = [QueueEntry(0, 2e4, 0, 10), QueueEntry(1, 2e4, 2, 12)]
        plan = solve_queue_power(tasks, 0, saa, RayleighSampler(), 9, params)
        traces = draw_traces(RayleighSampler(), 9, saa.k_samples, 0, 12, params)
        if not plan.chance_infeasible:
            feasible = [
                t for t in traces if not solve_subproblem(t, tasks, 0, params).infeasible
            ]
            assert all(deadline_violations(plan, tasks, t, params) == 0 for t in feasible)
        expected = np.mean([slot_bits(plan.powers, t.gains_h, params) for t in traces], axis=0)
        np.testing.assert_allclose(plan.expected_bits, expected)

    def test_parallel_matches_serial(self, params):
        from concurrent.futures import ThreadPoolExecutor

        tasks = [QueueEntry(0, 2e4, 0, 10), QueueEntry(1, 2e4, 2, 12)]
        saa = SaaConfig(k_samples=8)
        serial = solve_queue_power(tasks, 0, saa, RayleighSampler(), 5, params)
        with ThreadPoolExecutor(max_workers=3) as pool:
            parallel = solve_queue_power(tasks, 0, saa, RayleighSampler(), 5, params, executor=pool)
        np.testing.assert_array_equal(serial.powers, parallel.powers)

    @pytest.mark.integration
    def test_chance_constraint_monte_carlo(self, params):
        tasks = [QueueEntry(0, params.feature_bits, 0, 10), QueueEntry(1, params.feature_bits, 2, 12)]
        saa = SaaConfig(k_samples=64, epsilon=0.1)
        plan = solve_queue_power(tasks, 0, saa, RayleighSampler(), 2024, params)
        fresh = draw_traces(RayleighSampler(), 777, 10_000, 0, len(plan), params)
        violated = sum(deadline_violations(plan, tasks, t, params) > 0 for t in fresh)
        assert violated / len(fresh) <= saa.epsilon + 0.05


def test_schedule_csv_matches_golden_file(tmp_path):
    # τ·W·L бит за L слотов при h = 0.5: равномерная мощность 2 Вт
    trace = ChannelTrace.flat(5, 4, 0.5)
    sched = optimal_power_single_task(0.1 * 2e6 * 4, 4, trace, 10.0, 0.1, 2e6)
    write_csv(schedule_to_frame(sched), tmp_path / "schedule.csv")
    golden = GOLDEN / "schedule_flat_window.csv"
    assert (tmp_path / "schedule.csv").read_text() == golden.read_text()
    restored = schedule_from_frame(pd.read_csv(golden))
    assert restored.start == 5
    np.testing.assert_allclose(restored.powers, sched.powers, rtol=1e-12)
