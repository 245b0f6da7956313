"""
Аппроксимация выборочным средним для задачи с вероятностным ограничением
на дедлайны: K выборок канала, K детерминированных подзадач и
восстановление общего расписания мощности усреднением.
"""

import logging
import math
from concurrent.futures import Executor
from functools import partial
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from shared.core.exceptions import DomainError
from shared.schemas.v1 import SaaConfig, SystemParams
from shared.services.v1.system_model import (ChannelSampler, effective_gain,
                                             slot_bits)

from .allocation import QueueEntry, allocate_times
from .waterfilling import ChannelTrace, PowerSchedule, optimal_power_single_task

logger = logging.getLogger(__name__)

SeedLike = Union[int, np.random.SeedSequence]

# Относительный допуск доставки: задача выполнена, если доставлено ≥ D·(1 − 1e−9)
DELIVERY_RTOL = 1e-9


def saa_sample_count(
    epsilon: float, theta: float, n_vars: int, corrected: bool = False
) -> int:
    """
    Число выборок K*.

    K* = ⌈(1/ε)·(N − 1 + log(1/θ)·√(2(N−1)·log(1/θ) + log²(1/θ)))⌉;
    с corrected=True множитель log(1/θ) заменяется слагаемым.

    Raises:
        DomainError: ε, θ вне (0, 1) или N < 1.
    """
    if not 0 < epsilon < 1 or not 0 < theta < 1:
        raise DomainError(
            "ε и θ должны лежать в (0, 1)", extra={"epsilon": epsilon, "theta": theta}
        )
    if n_vars < 1:
        raise DomainError("N должно быть не меньше 1", extra={"n_vars": n_vars})

    log_inv = -math.log(theta)
    radical = math.sqrt(2.0 * (n_vars - 1) * log_inv + log_inv**2)
    core = log_inv + radical if corrected else log_inv * radical
    # допуск на ошибку округления перед потолком
    return math.ceil((n_vars - 1 + core) / epsilon - 1e-9)


def draw_traces(
    sampler: ChannelSampler,
    seed: SeedLike,
    k: int,
    now_t: int,
    length: int,
    params: SystemParams,
) -> List[ChannelTrace]:
    """K независимых трасс канала; выборка k использует k-й дочерний поток зерна."""
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    traces = []
    for child in root.spawn(k):
        g = sampler.sample(np.random.default_rng(child), length)
        traces.append(ChannelTrace(now_t, effective_gain(g, params)))
    return traces


def solve_subproblem(
    trace_k: ChannelTrace,
    tasks: Sequence[QueueEntry],
    now_t: int,
    params: SystemParams,
    loop_cap: Optional[int] = None,
    exact_limit: int = 64,
) -> PowerSchedule:
    """
    Детерминированная подзадача для одной выборки канала: распределение
    времени, затем водозаполнение в окне каждой задачи.

    Returns:
        PowerSchedule: Расписание на [now_t, последний дедлайн); пустая
        очередь дает нулевое расписание на горизонте трассы.
    """
    if not tasks:
        return PowerSchedule.zeros(trace_k.horizon_start, len(trace_k))

    horizon_end = max(entry.deadline for entry in tasks)
    powers = np.zeros(horizon_end - now_t)
    alloc = allocate_times(tasks, trace_k, now_t, params, loop_cap, exact_limit)

    infeasible = False
    for entry, window in zip(tasks, alloc):
        sched = optimal_power_single_task(
            entry.payload,
            window.len_slots,
            trace_k,
            params.p_max,
            params.slot_tau,
            params.bandwidth_w,
            start=window.start_slot,
        )
        offset = window.start_slot - now_t
        powers[offset : offset + window.len_slots] = sched.powers
        infeasible = infeasible or sched.infeasible

    return PowerSchedule(now_t, powers, infeasible=infeasible)


def restore_power(schedules: Sequence[PowerSchedule], p_max: float) -> PowerSchedule:
    """
    Общее расписание: среднее по копиям в каждом слоте, затем ограничение [0, p_max].

    Raises:
        DomainError: Нет расписаний или горизонты не совпадают.
    """
    if not schedules:
        raise DomainError("нет расписаний для восстановления")
    first = schedules[0]
    for sched in schedules[1:]:
        if sched.start != first.start or len(sched) != len(first):
            raise DomainError(
                "горизонты расписаний не совпадают",
                extra={"start": sched.start, "expected_start": first.start},
            )
    mean = np.mean(np.stack([s.powers for s in schedules]), axis=0)
    return PowerSchedule(first.start, np.clip(mean, 0.0, p_max))


def fifo_deadlines_met(
    bits: np.ndarray, start: int, tasks: Sequence[QueueEntry]
) -> np.ndarray:
    """
    Обслуживание очереди FIFO по битам слотов.

    В слоте передает только головная задача с готовыми данными; остаток
    слота после ее завершения не используется; задача с истекшим
    дедлайном покидает очередь.

    Args:
        bits: Биты по слотам, форма (K, T) для K трасс.
        start: Слот, соответствующий столбцу 0.
        tasks: Очередь.

    Returns:
        np.ndarray: Форма (K, n), True для задач, выполненных до дедлайна.
    """
    bits = np.atleast_2d(bits)
    n_traces, n_slots = bits.shape
    n = len(tasks)
    met = np.zeros((n_traces, n), dtype=bool)
    if n == 0:
        return met

    ready = np.array([e.ready for e in tasks])
    deadline = np.array([e.deadline for e in tasks])
    payload = np.array([e.payload for e in tasks], dtype=float) * (1.0 - DELIVERY_RTOL)
    head = np.zeros(n_traces, dtype=int)
    acc = np.zeros(n_traces)
    rows = np.arange(n_traces)

    for offset in range(n_slots):
        t = start + offset
        while True:
            idx = np.minimum(head, n - 1)
            expired = (head < n) & (deadline[idx] <= t)
            if not expired.any():
                break
            head[expired] += 1
            acc[expired] = 0.0
        idx = np.minimum(head, n - 1)
        serve = (head < n) & (ready[idx] <= t)
        acc = np.where(serve, acc + bits[:, offset], acc)
        done = serve & (acc >= payload[idx])
        met[rows[done], idx[done]] = True
        head[done] += 1
        acc[done] = 0.0

    return met


def deadline_violations(
    schedule: PowerSchedule,
    tasks: Sequence[QueueEntry],
    trace: ChannelTrace,
    params: SystemParams,
) -> int:
    """Число задач, пропускающих дедлайн при исполнении плана на трассе."""
    gains = trace.window(schedule.start, len(schedule))
    bits = slot_bits(schedule.powers, gains, params)
    return int(np.sum(~fifo_deadlines_met(bits, schedule.start, tasks)))


def _lift(
    restored: PowerSchedule,
    tasks: Sequence[QueueEntry],
    traces: Sequence[ChannelTrace],
    params: SystemParams,
    iterations: int,
) -> Tuple[np.ndarray, bool]:
    """
    Наименьший общий подъем δ ≥ 0 (с ограничением p_max), при котором
    каждая выборка выполняет все дедлайны.
    """
    if not traces:
        return restored.powers, True
    gains = np.stack([trace.gains_h for trace in traces])

    def satisfied(delta: float) -> bool:
        powers = np.minimum(restored.powers + delta, params.p_max)
        bits = slot_bits(powers[None, :], gains, params)
        return bool(fifo_deadlines_met(bits, restored.start, tasks).all())

    if satisfied(0.0):
        return restored.powers, True
    if not satisfied(params.p_max):
        return np.full(len(restored), params.p_max), False

    low, high = 0.0, params.p_max
    for _ in range(iterations):
        middle = 0.5 * (low + high)
        if satisfied(middle):
            high = middle
        else:
            low = middle
    return np.minimum(restored.powers + high, params.p_max), True


def solve_queue_power(
    tasks: Sequence[QueueEntry],
    now_t: int,
    saa: SaaConfig,
    sampler: ChannelSampler,
    seed: SeedLike,
    params: SystemParams,
    executor: Optional[Executor] = None,
) -> PowerSchedule:
    """
    Расписание мощности очереди с вероятностным ограничением на дедлайны.

    Алгоритм: K трасс канала → K подзадач (параллельно при наличии
    executor) → отбрасывание недостижимых выборок, если их не больше ε·K →
    усреднение с ограничением → подъем под выборочные ограничения.

    Args:
        tasks: Очередь в порядке FIFO.
        now_t: Текущий слот.
        saa: Параметры SAA (k_samples = 0 - автоматический K*).
        sampler: Распределение мелкомасштабного замирания.
        seed: Зерно; результат детерминирован.
        params: Параметры системы.
        executor: Пул для параллельного решения подзадач.

    Returns:
        PowerSchedule: Общее расписание; chance_infeasible, если ограничение
        не удалось выполнить, expected_bits - средние биты по выборкам.
    """
    if not tasks:
        return PowerSchedule.zeros(now_t, 0)

    length = max(entry.deadline for entry in tasks) - now_t
    if length <= 0:
        raise DomainError("горизонт планирования пуст", extra={"now_t": now_t})

    k = saa.k_samples or saa_sample_count(
        saa.epsilon, saa.theta, saa.n_vars or length, saa.corrected_bound
    )
    traces = draw_traces(sampler, seed, k, now_t, length, params)

    solve = partial(
        solve_subproblem,
        tasks=tasks,
        now_t=now_t,
        params=params,
        loop_cap=saa.loop_cap_factor * length,
        exact_limit=saa.exact_limit,
    )
    if executor is not None and k > 1:
        schedules = list(executor.map(solve, traces))
    else:
        schedules = [solve(trace) for trace in traces]

    feasible = [i for i, s in enumerate(schedules) if not s.infeasible]
    n_bad = k - len(feasible)
    chance_infeasible = n_bad > math.floor(saa.epsilon * k)
    retained = feasible if 0 < n_bad and not chance_infeasible else list(range(k))

    restored = restore_power([schedules[i] for i in retained], params.p_max)
    powers, lifted = _lift(
        restored,
        tasks,
        [traces[i] for i in feasible],
        params,
        saa.lift_iterations,
    )
    chance_infeasible = chance_infeasible or not lifted
    if chance_infeasible:
        logger.debug(
            "План не выполняет вероятностное ограничение",
            extra={"now_t": now_t, "infeasible_samples": n_bad, "k": k},
        )

    gains = np.stack([trace.gains_h for trace in traces])
    expected = slot_bits(powers[None, :], gains, params).mean(axis=0)
    return PowerSchedule(
        now_t,
        powers,
        infeasible=n_bad == k,
        chance_infeasible=chance_infeasible,
        expected_bits=expected,
    )
