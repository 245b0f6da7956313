"""
Распределение времени передачи между задачами очереди.

Окна задач идут подряд в порядке FIFO и задаются границами
b_0 < b_1 < … < b_l: задача k занимает слоты [b_k, b_{k+1}).
Если данные задачи готовы позже дедлайна предыдущей, очередь
распадается на независимые сегменты; в каждом сегменте последняя
задача доходит до своего дедлайна.

Итерация по невязке (f_R − f_L) двигает по одному слоту между парой
задач, затем распределение доводится локальным спуском по истинной
энергии, а на малых экземплярах решается точным перебором.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from shared.core.exceptions import DomainError, InfeasibleQueueError
from shared.schemas.v1 import SystemParams
from shared.services.v1.system_model import LN2, MAX_EXPONENT

from .waterfilling import ChannelTrace, water_filling

logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class QueueEntry:
    """
    Задача очереди с точки зрения планировщика.

    Attributes:
        task_id: Идентификатор задачи.
        payload: Оставшиеся биты.
        ready: Первый слот, когда данные готовы.
        deadline: Первый слот после окна (исключительно).
    """

    task_id: int
    payload: float
    ready: int
    deadline: int


@dataclass(frozen=True, slots=True)
class TaskWindow:
    task_id: int
    start_slot: int
    len_slots: int

    @property
    def end_slot(self) -> int:
        return self.start_slot + self.len_slots


@dataclass(frozen=True)
class TimeAllocation:
    """Окна передачи задач очереди в порядке FIFO."""

    windows: Tuple[TaskWindow, ...]

    def __iter__(self) -> Iterator[TaskWindow]:
        return iter(self.windows)

    def __len__(self) -> int:
        return len(self.windows)

    @property
    def lengths(self) -> Tuple[int, ...]:
        return tuple(w.len_slots for w in self.windows)

    def window_of(self, task_id: int) -> TaskWindow:
        for window in self.windows:
            if window.task_id == task_id:
                return window
        raise DomainError("задача отсутствует в распределении", extra={"task_id": task_id})


@dataclass
class _Segment:
    """Сегмент очереди с непрерывными окнами."""

    first: int
    entries: List[QueueEntry]
    start: int

    @property
    def end(self) -> int:
        return self.entries[-1].deadline

    def lower(self, k: int) -> int:
        return self.entries[k].ready

    def upper(self, k: int) -> int:
        return self.entries[k - 1].deadline

    def is_valid(self, bounds: Sequence[int]) -> bool:
        if bounds[0] != self.start or bounds[-1] != self.end:
            return False
        for k in range(1, len(bounds) - 1):
            if not self.lower(k) <= bounds[k] <= self.upper(k):
                return False
        return all(b < c for b, c in zip(bounds, bounds[1:]))


class _EnergyCache:
    """Память энергий окон: ключ (номер задачи, начало, длина)."""

    def __init__(self, entries: Sequence[QueueEntry], trace: ChannelTrace, params: SystemParams):
        self.entries = entries
        self.trace = trace
        self.params = params
        self._memo: Dict[Tuple[int, int, int], Tuple[float, bool]] = {}

    def window(self, index: int, start: int, length: int) -> Tuple[float, bool]:
        key = (index, start, length)
        if key not in self._memo:
            result = water_filling(
                self.entries[index].payload,
                self.trace.window(start, length),
                self.params.p_max,
                self.params.slot_tau,
                self.params.bandwidth_w,
            )
            energy = self.params.slot_tau * float(np.sum(result.powers))
            self._memo[key] = (energy, result.infeasible)
        return self._memo[key]

    def cost(self, segment: _Segment, bounds: Sequence[int]) -> Tuple[int, float]:
        infeasible, energy = 0, 0.0
        for k in range(len(segment.entries)):
            e, bad = self.window(segment.first + k, bounds[k], bounds[k + 1] - bounds[k])
            energy += e
            infeasible += int(bad)
        return infeasible, energy


def _split_segments(entries: Sequence[QueueEntry], now_t: int) -> List[_Segment]:
    segments: List[_Segment] = []
    first = 0
    for i in range(1, len(entries) + 1):
        if i == len(entries) or entries[i].ready > entries[i - 1].deadline:
            start = max(now_t, entries[first].ready)
            segments.append(_Segment(first, list(entries[first:i]), start))
            first = i
    return segments


def _check_feasible(segment: _Segment) -> None:
    """Жадная проверка: каждая задача получает хотя бы один слот."""
    boundary = segment.start
    for k in range(1, len(segment.entries)):
        boundary = max(segment.lower(k), boundary + 1)
        if boundary > segment.upper(k):
            raise InfeasibleQueueError(segment.entries[k - 1].task_id)
    if boundary >= segment.end:
        raise InfeasibleQueueError(segment.entries[-1].task_id)


def _initial_bounds(segment: _Segment) -> List[int]:
    """Самые поздние допустимые границы: b_k = min(дедлайн задачи k−1, b_{k+1} − 1)."""
    n = len(segment.entries)
    bounds = [0] * (n + 1)
    bounds[0], bounds[n] = segment.start, segment.end
    for k in range(n - 1, 0, -1):
        bounds[k] = min(segment.upper(k), bounds[k + 1] - 1)
    return bounds


def _count_bounds(segment: _Segment) -> int:
    ways = {segment.start: 1}
    for k in range(1, len(segment.entries)):
        ways = {
            v: sum(c for u, c in ways.items() if u < v)
            for v in range(segment.lower(k), segment.upper(k) + 1)
        }
    return sum(c for u, c in ways.items() if u < segment.end)


def _enumerate_bounds(segment: _Segment) -> Iterator[List[int]]:
    n = len(segment.entries)

    def extend(prefix: List[int]) -> Iterator[List[int]]:
        k = len(prefix)
        if k == n:
            if prefix[-1] < segment.end:
                yield prefix + [segment.end]
            return
        low = max(segment.lower(k), prefix[-1] + 1)
        for v in range(low, segment.upper(k) + 1):
            yield from extend(prefix + [v])

    yield from extend([segment.start])


def _log_fr(
    seg_entries: Sequence[QueueEntry],
    bounds: Sequence[int],
    m: int,
    n: int,
    log_prefix: np.ndarray,
    origin: int,
    scale: float,
) -> float:
    """ln f_R для пары (m, n); scale = τ·W̄, log_prefix - префиксные суммы ln(τ·W̄·h)."""

    def parts(k: int) -> Tuple[float, float, int]:
        length = bounds[k + 1] - bounds[k]
        log_sum = log_prefix[bounds[k + 1] - origin] - log_prefix[bounds[k] - origin]
        return seg_entries[k].payload / scale, float(log_sum), length

    d_m, s_m, l_m = parts(m)
    d_n, s_n, l_n = parts(n)
    return d_m / l_m + s_n / l_n - d_n / l_n - s_m / l_m


def _residual_gap(log_fr: float, l_m: int, l_n: int) -> float:
    return math.exp(min(log_fr, MAX_EXPONENT)) - l_n / l_m


def _shift(segment: _Segment, bounds: List[int], receiver: int, donor: int) -> Optional[List[int]]:
    """Переносит один слот от donor к receiver, сдвигая все границы между ними."""
    if bounds[donor + 1] - bounds[donor] < 2:
        return None
    moved = list(bounds)
    if receiver < donor:
        for k in range(receiver + 1, donor + 1):
            moved[k] += 1
    else:
        for k in range(donor + 1, receiver + 1):
            moved[k] -= 1
    return moved if segment.is_valid(moved) else None


def _residual_loop(
    segment: _Segment,
    bounds: List[int],
    cache: _EnergyCache,
    log_prefix: np.ndarray,
    origin: int,
    scale: float,
    loop_cap: int,
) -> List[int]:
    n = len(segment.entries)
    best, best_cost = bounds, cache.cost(segment, bounds)
    seen = {tuple(bounds)}

    for _ in range(loop_cap):
        lengths = [bounds[k + 1] - bounds[k] for k in range(n)]
        top_gap, top_pair = -math.inf, (0, 0)
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                # пара (n, m) = (i, j): f_L = L_i/L_j
                gap = _residual_gap(
                    _log_fr(segment.entries, bounds, j, i, log_prefix, origin, scale),
                    lengths[j],
                    lengths[i],
                )
                if gap > top_gap:
                    top_gap, top_pair = gap, (i, j)

        n_max, m_max = top_pair
        if top_gap > 0:
            moved = _shift(segment, bounds, receiver=n_max, donor=m_max)
        elif top_gap < 0:
            moved = _shift(segment, bounds, receiver=m_max, donor=n_max)
        else:
            break

        if moved is None or tuple(moved) in seen:
            break
        bounds = moved
        seen.add(tuple(bounds))
        cost = cache.cost(segment, bounds)
        if cost < best_cost:
            best, best_cost = bounds, cost

    return best


def _is_better(cost: Tuple[int, float], best: Tuple[int, float]) -> bool:
    if cost[0] != best[0]:
        return cost[0] < best[0]
    return cost[1] < best[1] * (1.0 - 1e-12)


def _polish(segment: _Segment, bounds: List[int], cache: _EnergyCache) -> List[int]:
    """
    Спуск по истинной энергии: сдвиг непрерывного блока границ на ±1.

    Если энергия окна выпукла по его длине (ровный канал, все окна
    достижимы), локальный минимум по таким сдвигам глобален.
    """
    best_cost = cache.cost(segment, bounds)
    inner = len(bounds) - 1
    while True:
        candidate, candidate_cost = None, best_cost
        for first, last in itertools.combinations_with_replacement(range(1, inner), 2):
            for delta in (-1, 1):
                moved = list(bounds)
                for k in range(first, last + 1):
                    moved[k] += delta
                if not segment.is_valid(moved):
                    continue
                cost = cache.cost(segment, moved)
                if _is_better(cost, candidate_cost):
                    candidate, candidate_cost = moved, cost
        if candidate is None:
            return bounds
        bounds, best_cost = candidate, candidate_cost


def _exact(segment: _Segment, cache: _EnergyCache) -> List[int]:
    best, best_cost = None, None
    for bounds in _enumerate_bounds(segment):
        cost = cache.cost(segment, bounds)
        if best_cost is None or _is_better(cost, best_cost):
            best, best_cost = bounds, cost
    return best if best is not None else _initial_bounds(segment)


def _windows(segment: _Segment, bounds: Sequence[int]) -> List[TaskWindow]:
    return [
        TaskWindow(entry.task_id, bounds[k], bounds[k + 1] - bounds[k])
        for k, entry in enumerate(segment.entries)
    ]


def _prepare(entries: Sequence[QueueEntry], now_t: int) -> List[_Segment]:
    if not entries:
        raise DomainError("очередь задач пуста")
    segments = _split_segments(entries, now_t)
    for segment in segments:
        _check_feasible(segment)
    return segments


def allocate_times(
    tasks: Sequence[QueueEntry],
    trace: ChannelTrace,
    now_t: int,
    params: SystemParams,
    loop_cap: Optional[int] = None,
    exact_limit: int = 64,
) -> TimeAllocation:
    """
    Распределяет время передачи между задачами очереди.

    Args:
        tasks: Задачи в порядке FIFO.
        trace: Трасса канала, покрывающая [now_t, последний дедлайн).
        now_t: Текущий слот.
        params: Параметры системы.
        loop_cap: Предел итераций по невязке; по умолчанию 10 × длина горизонта.
        exact_limit: Сегменты с не более чем таким числом допустимых
            распределений решаются перебором.

    Returns:
        TimeAllocation: Непрерывные окна, последняя задача сегмента доходит до дедлайна.

    Raises:
        DomainError: Пустая очередь или трасса не покрывает горизонт.
        InfeasibleQueueError: Какая-то задача не получает ни одного слота.
    """
    segments = _prepare(tasks, now_t)
    cache = _EnergyCache(tasks, trace, params)
    scale = params.slot_tau * params.bandwidth_w / LN2
    origin = trace.horizon_start
    log_prefix = np.concatenate([[0.0], np.cumsum(np.log(scale * trace.gains_h))])
    cap = loop_cap if loop_cap is not None else 10 * max(1, trace.horizon_end - now_t)

    windows: List[TaskWindow] = []
    for segment in segments:
        bounds = _initial_bounds(segment)
        if len(segment.entries) > 1:
            bounds = _residual_loop(segment, bounds, cache, log_prefix, origin, scale, cap)
            bounds = _polish(segment, bounds, cache)
            if _count_bounds(segment) <= exact_limit:
                bounds = _exact(segment, cache)
        windows.extend(_windows(segment, bounds))

    allocation = TimeAllocation(tuple(windows))
    logger.debug(
        "Распределение времени: сегментов %d, длины окон %s", len(segments), allocation.lengths
    )
    return allocation


def enumerate_allocations(tasks: Sequence[QueueEntry], now_t: int) -> Iterator[TimeAllocation]:
    """Все допустимые распределения времени очереди (оракул полного перебора)."""
    segments = _prepare(tasks, now_t)
    per_segment = [
        [_windows(segment, bounds) for bounds in _enumerate_bounds(segment)]
        for segment in segments
    ]
    for combo in itertools.product(*per_segment):
        yield TimeAllocation(tuple(w for part in combo for w in part))


def allocation_cost(
    tasks: Sequence[QueueEntry], alloc: TimeAllocation, trace: ChannelTrace, params: SystemParams
) -> Tuple[int, float]:
    """(число недостижимых окон, энергия передачи); недостижимое окно стоит τ·L·p_max."""
    infeasible, energy = 0, 0.0
    for entry, window in zip(tasks, alloc):
        result = water_filling(
            entry.payload,
            trace.window(window.start_slot, window.len_slots),
            params.p_max,
            params.slot_tau,
            params.bandwidth_w,
        )
        energy += params.slot_tau * float(np.sum(result.powers))
        infeasible += int(result.infeasible)
    return infeasible, energy


def allocation_energy(
    tasks: Sequence[QueueEntry], alloc: TimeAllocation, trace: ChannelTrace, params: SystemParams
) -> float:
    return allocation_cost(tasks, alloc, trace, params)[1]


def time_split_residual(
    m: QueueEntry,
    n: QueueEntry,
    alloc: TimeAllocation,
    trace: ChannelTrace,
    params: SystemParams,
) -> Tuple[float, float]:
    """
    Невязка условия оптимальности для пары задач.

    f_L = L_n/L_m; f_R - отношение экспонент из условия оптимальности
    (в натах, с множителем τ·W̄ под логарифмом).

    Raises:
        DomainError: Окно нулевой длины или задачи нет в распределении.
    """
    window_m, window_n = alloc.window_of(m.task_id), alloc.window_of(n.task_id)
    if window_m.len_slots < 1 or window_n.len_slots < 1:
        raise DomainError("окно нулевой длины")

    scale = params.slot_tau * params.bandwidth_w / LN2

    def log_sum(window: TaskWindow) -> float:
        return float(np.sum(np.log(scale * trace.window(window.start_slot, window.len_slots))))

    l_m, l_n = window_m.len_slots, window_n.len_slots
    log_fr = (
        m.payload / (scale * l_m)
        + log_sum(window_n) / l_n
        - n.payload / (scale * l_n)
        - log_sum(window_m) / l_m
    )
    return l_n / l_m, math.exp(min(log_fr, MAX_EXPONENT))
