import math

import numpy as np
import pandas as pd
import pytest

from shared.core.exceptions import ConfigError, PreconditionError
from shared.core.settings import SimSettings
from shared.schemas.v1 import ModeRule, Policy, TransmissionMode
from shared.services.v1.agent import N_ACTIONS, QNetwork
from shared.services.v1.power_opt import PowerOptimizer
from shared.services.v1.simulator import (SUMMARY_COLUMNS, EpisodeJob,
                                          EpisodeState, EpisodeTrace,
                                          ExperimentService, aggregate,
                                          choose_compute_speed,
                                          compute_metrics, episode_seeds,
                                          greedy_energy_estimate,
                                          greedy_mode, greedy_power,
                                          one_task_mode,
                                          run_episode, run_job)
from shared.services.v1.system_model import (RayleighSampler, Task,
                                             TaskStatus)


def xavier_net(settings: SimSettings) -> QNetwork:
    cfg = settings.agent
    return QNetwork.xavier(cfg.n_inputs, cfg.hidden, N_ACTIONS, np.random.default_rng(0))


def with_system(settings: SimSettings, **changes) -> SimSettings:
    system = settings.system.model_copy(update=changes)
    return settings.model_copy(update={"system": system})


def with_run(settings: SimSettings, **changes) -> SimSettings:
    run = settings.run.model_copy(update=changes)
    return settings.model_copy(update={"run": run})


@pytest.fixture
def service(small_settings, optimizer):
    return ExperimentService(small_settings, optimizer, RayleighSampler())


@pytest.mark.parametrize("policy", list(Policy))
class TestEpisode:
    def run(self, settings, policy, seed=11):
        nets = xavier_net(settings) if policy == Policy.OPETRL else None
        return run_episode(settings, nets, seed, policy)

    def test_deterministic(self, small_settings, policy):
        first_metrics, first = self.run(small_settings, policy)
        second_metrics, second = self.run(small_settings, policy)
        assert first_metrics == second_metrics
        pd.testing.assert_frame_equal(first.slots_frame(), second.slots_frame())
        pd.testing.assert_frame_equal(first.tasks_frame(), second.tasks_frame())

    def test_battery_stays_in_bounds(self, small_settings, policy):
        _, trace = self.run(small_settings, policy)
        battery = trace.slots_frame()["battery_J"]
        cap = small_settings.system.batt_cap_emax
        assert battery.min() >= 0.0
        assert battery.max() <= cap * (1 + 1e-12)

    def test_transmission_after_ready(self, small_settings, policy):
        _, trace = self.run(small_settings, policy)
        slots = trace.slots_frame()
        for task in trace.tasks:
            sent = slots[(slots["head_task"] == task.id) & (slots["bits"] > 0)]
            if task.start_t is not None:
                assert task.start_t >= task.ready_t
                assert sent["slot"].min() == task.start_t
            assert sent.empty or sent["slot"].max() < task.deadline

    def test_fifo_order(self, small_settings, policy):
        _, trace = self.run(small_settings, policy)
        started = [t for t in trace.tasks if t.start_t is not None]
        for earlier, later in zip(started, started[1:]):
            assert earlier.finish_t is not None
            assert later.start_t >= earlier.finish_t

    def test_met_tasks_are_delivered_in_time(self, small_settings, policy):
        _, trace = self.run(small_settings, policy)
        for task in trace.tasks:
            if task.status == TaskStatus.MET:
                assert task.delivered == task.payload
                assert task.finish_t < task.deadline
            elif task.status == TaskStatus.MISSED:
                assert task.finish_t == task.deadline

    def test_energy_matches_trace(self, small_settings, policy):
        metrics, trace = self.run(small_settings, policy)
        slots = trace.slots_frame()
        assert metrics.total_energy == pytest.approx(
            float(slots["e_trans_J"].sum() + slots["e_comp_J"].sum())
        )
        tau = small_settings.system.slot_tau
        np.testing.assert_allclose(slots["e_trans_J"], tau * slots["power_watts"])

    def test_power_and_battery_accounting(self, small_settings, policy):
        _, trace = self.run(small_settings, policy)
        slots = trace.slots_frame()
        params = small_settings.system
        assert slots["power_watts"].max() <= params.p_max
        previous = np.concatenate([[params.batt_init_e0], slots["battery_J"].to_numpy()[:-1]])
        expected = np.minimum(
            previous + slots["harvest_J"] - slots["e_trans_J"] - slots["e_comp_J"], params.batt_cap_emax
        )
        np.testing.assert_allclose(slots["battery_J"], expected, rtol=0, atol=1e-12)

    def test_no_arrivals(self, small_settings, policy):
        settings = with_system(small_settings, arrival_prob_q=0.0)
        metrics, trace = self.run(settings, policy)
        assert metrics.tasks_total == 0
        assert metrics.success_prob == 1.0
        assert metrics.total_energy == 0.0
        assert np.all(np.diff(trace.slots_frame()["battery_J"]) >= 0)


@pytest.mark.parametrize("policy", [Policy.GREEDY, Policy.ONE_TASK])
def test_unreachable_rate_misses_tasks(small_settings, policy):
    """При узкой полосе задачи не успевают, но эпизод доходит до конца."""
    settings = with_system(small_settings, bandwidth_w=10.0)
    metrics, _ = run_episode(settings, None, 5, policy)
    assert metrics.tasks_total > 0
    assert metrics.success_prob == 0.0

def test_common_random_numbers(small_settings):
    """Политики видят одинаковые поступления и канал при одном зерне."""
    _, greedy = run_episode(small_settings, None, 5, Policy.GREEDY)
    _, one_task = run_episode(small_settings, None, 5, Policy.ONE_TASK)
    pd.testing.assert_series_equal(
        greedy.slots_frame()["channel_g"], one_task.slots_frame()["channel_g"]
    )
    assert [t.arrive_t for t in greedy.tasks] == [t.arrive_t for t in one_task.tasks]


def test_forced_ct_uses_compute(small_settings):
    settings = with_run(small_settings, greedy_mode=ModeRule.CT)
    metrics, trace = run_episode(settings, None, 3, Policy.GREEDY)
    assert all(t.mode == TransmissionMode.CT for t in trace.tasks)
    if trace.tasks:
        assert metrics.compute_energy > 0
        assert all(t.comp_speed == settings.system.f_max for t in trace.tasks)


def test_opetrl_requires_network(small_settings):
    with pytest.raises(PreconditionError):
        run_episode(small_settings, None, 1, Policy.OPETRL)


def test_run_job_matches_run_episode(small_settings):
    job = EpisodeJob(small_settings, Policy.GREEDY, 21, 0)
    _, metrics, _ = run_job(job)
    expected, _ = run_episode(small_settings, None, 21, Policy.GREEDY)
    assert metrics == expected


class TestEpisodeState:
    def make_state(self, params, now=0):
        return EpisodeState(params=params, battery=0.0, now=now)

    def test_head_skips_hopeless(self, params):
        state = self.make_state(params, now=2)
        hopeless = Task(0, 0, TransmissionMode.CT, 100, 3, comp_time=5)
        live = Task(1, 1, TransmissionMode.DT, 100, 11)
        state.pending = [hopeless, live]
        assert state.head() is live

    def test_plannable_entries(self, params):
        state = self.make_state(params, now=8)
        first = Task(0, 0, TransmissionMode.DT, 100, 9, delivered=40)
        second = Task(1, 0, TransmissionMode.DT, 100, 9)
        third = Task(2, 5, TransmissionMode.DT, 100, 15)
        state.pending = [first, second, third]
        entries = state.plannable_entries()
        # вторая задача не успевает получить слот после первой
        assert [e.task_id for e in entries] == [0, 2]
        assert entries[0].payload == 60
        assert entries[1].ready == 8


class TestPolicyHelpers:
    def test_one_task_mode(self, params):
        assert one_task_mode(params) == TransmissionMode.DT
        bigger_raw = params.model_copy(update={"raw_bits_s": 30000})
        assert one_task_mode(bigger_raw) == TransmissionMode.CT

    def test_greedy_power_is_capped(self, params):
        assert greedy_power(1e9, 1, 1e4, params) == params.p_max
        assert greedy_power(100.0, 0, 1e4, params) == params.p_max
        assert 0 < greedy_power(100.0, 5, 1e4, params) < params.p_max

    def test_greedy_energy_of_unreachable_payload(self, params):
        narrow = params.model_copy(update={"bandwidth_w": 10.0})
        assert greedy_energy_estimate(narrow.raw_bits_s, 1, 1e4, narrow) == math.inf
        assert greedy_mode(1e4, narrow) == TransmissionMode.DT

    def test_greedy_mode_follows_channel(self, params):
        big_raw = params.model_copy(update={"raw_bits_s": 200000})
        assert greedy_mode(1e3, big_raw) == TransmissionMode.CT
        # на хорошем канале передача сырых данных дешевле вычислений
        assert greedy_mode(1e6, big_raw) == TransmissionMode.DT

    def test_greedy_single_slot_inversion(self, params):
        h = 1e4
        bits = 1000.0
        expected = (2 ** (bits / (params.slot_tau * params.bandwidth_w)) - 1) / h
        assert greedy_power(bits, 1, h, params) == pytest.approx(expected)

    def test_compute_speed_on_grid(self, params, optimizer):
        speed = choose_compute_speed(params, optimizer, 0, 0)
        assert speed / params.f_max in (0.125, 0.25, 0.5, 1.0)

    def test_compute_speed_without_window(self, params, optimizer):
        assert choose_compute_speed(params, optimizer, 0, params.deadline_c) == params.f_max


class TestMetrics:
    def test_empty_trace(self):
        metrics = compute_metrics(EpisodeTrace())
        assert metrics.success_prob == 1.0
        assert metrics.total_energy == 0.0

    def test_censored_tasks_are_excluded(self):
        tasks = [
            Task(0, 0, TransmissionMode.DT, 10, 10, status=TaskStatus.MET),
            Task(1, 0, TransmissionMode.DT, 10, 10, status=TaskStatus.MISSED),
            Task(2, 0, TransmissionMode.DT, 10, 10, status=TaskStatus.CENSORED),
        ]
        metrics = compute_metrics(EpisodeTrace(tasks=tasks))
        assert metrics.success_prob == 0.5
        assert metrics.tasks_censored == 1

    def test_aggregate(self):
        rows = [
            {"policy": "greedy", "sweep_var": "none", "sweep_value": 0.0, "success_prob": p, "total_energy": e}
            for p, e in [(1.0, 2.0), (0.5, 4.0)]
        ] + [{"policy": "one_task", "sweep_var": "none", "sweep_value": 0.0, "success_prob": 1.0, "total_energy": 1.0}]
        summary = aggregate(rows, seed=3)
        assert list(summary.columns) == SUMMARY_COLUMNS
        greedy = summary[summary["policy"] == "greedy"].iloc[0]
        assert greedy["success_prob_mean"] == pytest.approx(0.75)
        assert greedy["energy_J_se"] == pytest.approx(1.0)
        assert greedy["episodes"] == 2
        single = summary[summary["policy"] == "one_task"].iloc[0]
        assert single["success_prob_se"] == 0.0
        assert (summary["seed"] == 3).all()

    def test_aggregate_empty(self):
        assert list(aggregate([], seed=1).columns) == SUMMARY_COLUMNS


def test_episode_seeds_are_stable():
    assert episode_seeds(7, 2, 3) == episode_seeds(7, 2, 3)
    assert episode_seeds(7, 2, 3)[:2] == episode_seeds(7, 2, 2)
    assert episode_seeds(7, 1, 3) != episode_seeds(7, 2, 3)


class TestExperimentService:
    def test_train_without_arrivals(self, tmp_path, small_settings):
        settings = with_run(with_system(small_settings, arrival_prob_q=0.0), episodes=1, horizon_slots=10)
        with PowerOptimizer(settings.system, settings.saa, RayleighSampler()) as optimizer:
            result = ExperimentService(settings, optimizer, RayleighSampler()).train(tmp_path)
        assert result.checkpoint.is_file()
        assert len(result.learning_curve) == 1
        assert pd.read_csv(tmp_path / "loss.csv").empty
        assert (tmp_path / "config.conf").is_file()

    def test_evaluate_baselines(self, tmp_path, service):
        summary = service.evaluate(tmp_path, [Policy.GREEDY, Policy.ONE_TASK])
        assert list(summary["policy"]) == ["greedy", "one_task"]
        assert (summary["episodes"] == 2).all()
        written = pd.read_csv(tmp_path / "summary.csv")
        assert list(written.columns) == SUMMARY_COLUMNS
        assert (tmp_path / "traces" / "greedy_ep000_slots.csv").is_file()
        assert (tmp_path / "traces" / "one_task_ep001_tasks.csv").is_file()

    def test_evaluate_opetrl_without_checkpoint(self, tmp_path, service):
        with pytest.raises(PreconditionError):
            service.evaluate(tmp_path, [Policy.OPETRL])

    def test_sweep(self, tmp_path, service):
        summary = service.sweep("raw_bits_s", [20000], tmp_path, [Policy.GREEDY])
        assert len(summary) == 1
        assert summary.iloc[0]["sweep_var"] == "raw_bits_s"
        assert (tmp_path / "sweep_raw_bits_s.csv").is_file()

    def test_sweep_shares_seeds_with_evaluate(self, tmp_path, service, small_settings):
        point = service.sweep("p_max", [small_settings.system.p_max], tmp_path, [Policy.GREEDY])
        baseline = service.evaluate(tmp_path, [Policy.GREEDY])
        assert point.iloc[0]["energy_J_mean"] == pytest.approx(baseline.iloc[0]["energy_J_mean"])

    @pytest.mark.parametrize("variable,values", [("deadline_c", [5]), ("p_max", [-1.0])])
    def test_sweep_rejects(self, tmp_path, service, variable, values):
        with pytest.raises(ConfigError):
            service.sweep(variable, values, tmp_path, [Policy.GREEDY])

    @pytest.mark.integration
    def test_train_then_evaluate(self, tmp_path, small_settings, optimizer):
        settings = with_run(small_settings, horizon_slots=30)
        service = ExperimentService(settings, optimizer, RayleighSampler())
        result = service.train(tmp_path)
        summary = service.evaluate(tmp_path, [Policy.OPETRL], str(result.checkpoint))
        assert summary.iloc[0]["policy"] == "opetrl"
        assert 0.0 <= summary.iloc[0]["success_prob_mean"] <= 1.0

    def test_training_is_reproducible(self, tmp_path, small_settings):
        settings = with_run(small_settings, horizon_slots=30)
        checkpoints = []
        for run in ("a", "b"):
            with PowerOptimizer(settings.system, settings.saa, RayleighSampler()) as optimizer:
                result = ExperimentService(settings, optimizer, RayleighSampler()).train(tmp_path / run)
            checkpoints.append(result.checkpoint.read_bytes())
        assert checkpoints[0] == checkpoints[1]

    def test_evaluation_is_byte_identical(self, tmp_path, service):
        for run in ("a", "b"):
            service.evaluate(tmp_path / run, [Policy.GREEDY, Policy.ONE_TASK])
        assert (tmp_path / "a" / "summary.csv").read_bytes() == (tmp_path / "b" / "summary.csv").read_bytes()
        first = tmp_path / "a" / "traces" / "one_task_ep001_slots.csv"
        assert first.read_bytes() == (tmp_path / "b" / "traces" / first.name).read_bytes()
