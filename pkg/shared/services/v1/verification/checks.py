"""
Набор проверок команды verify: оракулы оптимизатора, агента и среды.
"""

import math
from dataclasses import replace
from typing import List, Tuple

import numpy as np
from scipy.optimize import brentq, minimize

from shared.core.exceptions import InfeasibleQueueError
from shared.core.settings import SimSettings
from shared.schemas.v1 import Policy, SystemParams
from shared.services.v1.agent import (N_ACTIONS, QNetwork, ddqn_target,
                                      loss_and_gradients, sgd_update)
from shared.services.v1.power_opt import (ChannelTrace, QueueEntry,
                                          TimeAllocation, allocate_times,
                                          allocation_cost,
                                          deadline_violations, draw_traces,
                                          enumerate_allocations,
                                          optimal_power_single_task,
                                          saa_sample_count, schedule_energy,
                                          solve_queue_power, water_filling)
from shared.services.v1.simulator import run_episode
from shared.services.v1.system_model import (LN2, channel_mean_gain,
                                             effective_gain, make_sampler,
                                             slot_bits)

from .registry import register_check

MONTE_CARLO_TRACES = 10_000
MONTE_CARLO_SLACK = 0.05
SAMPLE_COUNT_FIXTURES = (
    ((0.1, 0.05, 11), 349),
    ((0.1, 0.05, 10), 328),
    ((0.5, math.exp(-1), 1), 2),
)


def _random_gains(rng: np.random.Generator, size: int, params: SystemParams) -> np.ndarray:
    g = np.maximum(rng.exponential(size=size), 1e-3)
    return np.asarray(effective_gain(g, params), dtype=float)


def _capacity_bits(gains: np.ndarray, params: SystemParams) -> float:
    powers = np.full(gains.size, params.p_max)
    return float(np.sum(slot_bits(powers, gains, params)))


def _oracle_level(target_nats: float, gains: np.ndarray, p_max: float) -> float:
    inverse = 1.0 / gains

    def excess(level: float) -> float:
        return float(np.sum(np.log1p(np.clip(level - inverse, 0.0, p_max) * gains))) - target_nats

    high = float(np.max(inverse)) + p_max
    return brentq(excess, float(np.min(inverse)), high, xtol=1e-15 * high, maxiter=500)


@register_check
def waterfilling_matches_bisection(settings: SimSettings) -> Tuple[bool, str]:
    """Мощности водозаполнения совпадают с уровнем, найденным brentq."""
    params, cfg = settings.system, settings.verify
    rng = np.random.default_rng(cfg.seed)
    worst = 0.0
    for _ in range(cfg.oracle_instances):
        gains = _random_gains(rng, int(rng.integers(1, 21)), params)
        payload = rng.uniform(0.05, 0.95) * _capacity_bits(gains, params)
        result = water_filling(payload, gains, params.p_max, params.slot_tau, params.bandwidth_w)
        level = _oracle_level(
            payload * LN2 / (params.slot_tau * params.bandwidth_w), gains, params.p_max
        )
        oracle = np.clip(level - 1.0 / gains, 0.0, params.p_max)
        scale = max(params.p_max, level)
        worst = max(worst, float(np.max(np.abs(result.powers - oracle))) / scale)
    return worst <= cfg.oracle_rtol, f"макс. отклонение {worst:.2e}"


@register_check
def clipped_waterfilling_matches_slsqp(settings: SimSettings) -> Tuple[bool, str]:
    """Энергия водозаполнения с ограничениями не хуже решения SLSQP."""
    params, cfg = settings.system, settings.verify
    rng = np.random.default_rng(cfg.seed + 1)
    tw = params.slot_tau * params.bandwidth_w
    worst = -math.inf
    for _ in range(cfg.clipped_instances):
        gains = _random_gains(rng, int(rng.integers(2, 7)), params)
        payload = rng.uniform(0.5, 0.95) * _capacity_bits(gains, params)
        ours = water_filling(payload, gains, params.p_max, params.slot_tau, params.bandwidth_w)
        target = payload / tw

        scaled = gains * params.p_max
        solution = minimize(
            lambda x: float(np.sum(x)),
            x0=np.ones(gains.size),
            jac=lambda x: np.ones_like(x),
            method="SLSQP",
            bounds=[(0.0, 1.0)] * gains.size,
            constraints=[
                {
                    "type": "ineq",
                    "fun": lambda x: float(np.sum(np.log2(1.0 + x * scaled))) - target,
                    "jac": lambda x: scaled / ((1.0 + x * scaled) * LN2),
                }
            ],
            options={"ftol": 1e-14, "maxiter": 500},
        )
        reference = float(np.sum(solution.x)) * params.p_max
        gap = (float(np.sum(ours.powers)) - reference) / reference
        worst = max(worst, gap)
    return worst <= cfg.clipped_rtol, f"макс. превышение над SLSQP {worst:.2e}"


@register_check
def rate_constraint_is_tight(settings: SimSettings) -> Tuple[bool, str]:
    """Достижимое расписание доставляет ровно D бит."""
    params, cfg = settings.system, settings.verify
    rng = np.random.default_rng(cfg.seed + 2)
    worst = 0.0
    for _ in range(cfg.oracle_instances):
        gains = _random_gains(rng, int(rng.integers(1, 21)), params)
        payload = rng.uniform(0.05, 0.95) * _capacity_bits(gains, params)
        result = water_filling(payload, gains, params.p_max, params.slot_tau, params.bandwidth_w)
        delivered = float(np.sum(slot_bits(result.powers, gains, params)))
        worst = max(worst, abs(delivered - payload) / payload)
    return worst <= cfg.oracle_rtol, f"макс. относительная невязка {worst:.2e}"


@register_check
def water_level_is_constant(settings: SimSettings) -> Tuple[bool, str]:
    """В неограниченных слотах p_t + 1/h_t равно уровню воды."""
    params, cfg = settings.system, settings.verify
    rng = np.random.default_rng(cfg.seed + 3)
    worst = 0.0
    for _ in range(cfg.oracle_instances):
        gains = _random_gains(rng, int(rng.integers(1, 21)), params)
        payload = rng.uniform(0.05, 0.95) * _capacity_bits(gains, params)
        result = water_filling(payload, gains, params.p_max, params.slot_tau, params.bandwidth_w)
        free = (result.powers > 0) & (result.powers < params.p_max)
        if np.any(free):
            spread = np.abs(result.powers[free] + 1.0 / gains[free] - result.level)
            worst = max(worst, float(np.max(spread)) / result.level)
    return worst <= cfg.oracle_rtol, f"макс. отклонение уровня {worst:.2e}"


@register_check
def energy_monotone_in_window(settings: SimSettings) -> Tuple[bool, str]:
    """Энергия одной задачи не растет при удлинении окна."""
    params, cfg = settings.system, settings.verify
    rng = np.random.default_rng(cfg.seed + 4)
    horizon = params.deadline_c
    violations = 0
    for _ in range(cfg.monotone_instances):
        trace = ChannelTrace(0, _random_gains(rng, horizon, params))
        payload = rng.uniform(0.1, 1.0) * _capacity_bits(trace.window(0, 1), params) * 2
        previous = math.inf
        for window in range(1, horizon + 1):
            sched = optimal_power_single_task(
                payload, window, trace, params.p_max, params.slot_tau, params.bandwidth_w
            )
            if sched.infeasible:
                continue
            energy = schedule_energy(sched, params.slot_tau)
            if energy > previous + cfg.monotone_atol:
                violations += 1
                break
            previous = energy
    return violations == 0, f"нарушений {violations} из {cfg.monotone_instances}"


def _random_queue(rng: np.random.Generator, params: SystemParams, deadline_c: int) -> List[QueueEntry]:
    one_slot = float(
        slot_bits(np.array([params.p_max]), np.array([channel_mean_gain(params)]), params)[0]
    )
    entries, arrive = [], 0
    for task_id in range(int(rng.integers(2, 5))):
        arrive += int(rng.integers(0, 3))
        ready = arrive + int(rng.integers(0, 2))
        entries.append(
            QueueEntry(task_id, rng.uniform(0.3, 2.0) * one_slot, ready, arrive + deadline_c)
        )
    return entries


@register_check
def allocation_matches_bruteforce(settings: SimSettings) -> Tuple[bool, str]:
    """
    Распределение времени совпадает с полным перебором.

    Случайный канал проверяется штатным путем. Итерации по невязке и
    локальный спуск без перебора (exact_limit=0) проверяются на ровном
    канале с окнами, достижимыми за один слот.
    """
    params, cfg = settings.system, settings.verify
    rng = np.random.default_rng(cfg.seed + 5)
    deadline_c = min(params.deadline_c, 6)
    mismatches = local_mismatches = checked = 0
    while checked < cfg.bruteforce_instances:
        entries = _random_queue(rng, params, deadline_c)
        horizon = max(e.deadline for e in entries)
        trace = ChannelTrace(0, _random_gains(rng, horizon, params))
        try:
            alloc = allocate_times(entries, trace, 0, params)
        except InfeasibleQueueError:
            continue
        checked += 1
        if not _matches_bruteforce(entries, alloc, trace, params):
            mismatches += 1

        h = channel_mean_gain(params) * float(rng.uniform(0.5, 2.0))
        one_slot = float(slot_bits(np.array([params.p_max]), np.array([h]), params)[0])
        flat_entries = [
            replace(e, payload=float(rng.uniform(0.1, 1.0)) * one_slot) for e in entries
        ]
        flat = ChannelTrace.flat(0, horizon, h)
        local = allocate_times(flat_entries, flat, 0, params, exact_limit=0)
        if not _matches_bruteforce(flat_entries, local, flat, params):
            local_mismatches += 1

    return mismatches == local_mismatches == 0, (
        f"расхождений {mismatches} из {checked}, без перебора {local_mismatches} из {checked}"
    )


def _matches_bruteforce(
    entries: List[QueueEntry], alloc: TimeAllocation, trace: ChannelTrace, params: SystemParams
) -> bool:
    ours = allocation_cost(entries, alloc, trace, params)
    best = min(
        allocation_cost(entries, candidate, trace, params)
        for candidate in enumerate_allocations(entries, 0)
    )
    return ours[0] == best[0] and ours[1] <= best[1] * (1 + 1e-9) + 1e-300


@register_check
def gradients_match_finite_differences(settings: SimSettings) -> Tuple[bool, str]:
    """Аналитические градиенты совпадают с центральными разностями."""
    cfg = settings.verify
    rng = np.random.default_rng(cfg.seed + 6)
    net = QNetwork.xavier(5, 7, N_ACTIONS, rng)
    states = rng.normal(size=(6, 5))
    actions = rng.integers(0, N_ACTIONS, size=6)
    targets = rng.normal(size=6)
    _, grads = loss_and_gradients(net, states, actions, targets)

    step, worst = 1e-6, 0.0
    for name, param in net.parameters().items():
        numeric = np.zeros_like(param)
        for index in np.ndindex(param.shape):
            saved = param[index]
            param[index] = saved + step
            plus, _ = loss_and_gradients(net, states, actions, targets)
            param[index] = saved - step
            minus, _ = loss_and_gradients(net, states, actions, targets)
            param[index] = saved
            numeric[index] = (plus - minus) / (2 * step)
        denom = max(float(np.max(np.abs(numeric))), 1e-12)
        worst = max(worst, float(np.max(np.abs(numeric - grads[name]))) / denom)
    return worst <= cfg.gradient_rtol, f"макс. относительная ошибка {worst:.2e}"


@register_check
def double_q_target_uses_online_argmax(settings: SimSettings) -> Tuple[bool, str]:
    """Цель DDQN берет действие онлайн-сети и оценку целевой сети."""
    one = np.ones((1, 1))
    online = QNetwork(one.copy(), np.zeros(1), np.array([[2.0], [1.0]]), np.zeros(2))
    target = QNetwork(one.copy(), np.zeros(1), np.array([[1.0], [9.0]]), np.zeros(2))
    y = ddqn_target(0.0, np.array([1.0]), online, target, gamma=1.0, terminal=False)
    return math.isclose(y, 1.0), f"цель {y} (ожидалось 1, max по целевой сети дал бы 9)"


@register_check
def training_reduces_loss(settings: SimSettings) -> Tuple[bool, str]:
    """200 шагов SGD на фиксированном батче уменьшают потерю."""
    rng = np.random.default_rng(settings.verify.seed + 7)
    net = QNetwork.xavier(4, 16, N_ACTIONS, rng)
    states = rng.uniform(size=(64, 4))
    actions = rng.integers(0, N_ACTIONS, size=64)
    targets = rng.normal(size=64)
    first, _ = loss_and_gradients(net, states, actions, targets)
    loss = first
    for _ in range(200):
        loss, grads = loss_and_gradients(net, states, actions, targets)
        sgd_update(net, grads, 1e-2)
    return loss < first, f"потеря {first:.4g} → {loss:.4g}"


@register_check
def saa_sample_count_fixtures(settings: SimSettings) -> Tuple[bool, str]:
    """Число выборок K* на эталонных значениях."""
    got = [saa_sample_count(*args) for args, _ in SAMPLE_COUNT_FIXTURES]
    expected = [value for _, value in SAMPLE_COUNT_FIXTURES]
    return got == expected, f"получено {got}, ожидалось {expected}"


@register_check
def chance_constraint_holds(settings: SimSettings) -> Tuple[bool, str]:
    """План SAA нарушает дедлайн не чаще ε + запас на свежих трассах."""
    params = settings.system
    saa = settings.saa.model_copy(update={"k_samples": 0, "workers": 1})
    sampler = make_sampler(params.channel_model)
    c = params.deadline_c
    tasks = [
        QueueEntry(0, params.feature_bits, 0, c),
        QueueEntry(1, params.feature_bits, 2, 2 + c),
    ]
    plan = solve_queue_power(tasks, 0, saa, sampler, settings.verify.seed, params)
    traces = draw_traces(
        sampler, settings.verify.seed + 1, MONTE_CARLO_TRACES, 0, len(plan), params
    )
    violated = sum(1 for trace in traces if deadline_violations(plan, tasks, trace, params) > 0)
    frequency = violated / MONTE_CARLO_TRACES
    return (
        frequency <= saa.epsilon + MONTE_CARLO_SLACK,
        f"частота нарушений {frequency:.4f} при ε = {saa.epsilon}",
    )


@register_check
def episode_invariants(settings: SimSettings) -> Tuple[bool, str]:
    """Батарея в [0, E_max], причинность, FIFO и детерминизм короткого эпизода."""
    params = settings.system
    short = settings.model_copy(
        update={"run": settings.run.model_copy(update={"horizon_slots": max(200, params.deadline_c)})}
    )
    net = QNetwork.xavier(
        settings.agent.n_inputs, settings.agent.hidden, N_ACTIONS, np.random.default_rng(0)
    )
    problems = []
    for policy in Policy:
        metrics, trace = run_episode(short, net, settings.verify.seed, policy)
        again, _ = run_episode(short, net, settings.verify.seed, policy)
        if metrics != again:
            problems.append(f"{policy.value}: недетерминирован")
        battery = np.array([r.battery_J for r in trace.slots])
        if np.any(battery < 0) or np.any(battery > params.batt_cap_emax * (1 + 1e-12)):
            problems.append(f"{policy.value}: батарея вне [0, E_max]")
        started = [t for t in trace.tasks if t.start_t is not None]
        if any(t.start_t < t.ready_t for t in started):
            problems.append(f"{policy.value}: передача до готовности данных")
        starts = [t.start_t for t in started]
        if starts != sorted(starts):
            problems.append(f"{policy.value}: нарушен порядок FIFO")
    return not problems, "; ".join(problems) or "все политики"
