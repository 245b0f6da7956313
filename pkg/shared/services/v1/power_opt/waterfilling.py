"""
Оптимальная мощность передачи одной задачи (водозаполнение с ограничениями).

Расчет ведется в натах: W̄ = W/ln 2, требуемое количество
D/(τ·W̄) = D·ln 2/(τ·W). На свободных слотах p_t + 1/h_t = ν.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from shared.core.exceptions import DomainError
from shared.services.v1.system_model import LN2


@dataclass(frozen=True, eq=False)
class ChannelTrace:
    """
    Эффективные усиления канала по слотам горизонта.

    Attributes:
        horizon_start: Слот, соответствующий gains_h[0].
        gains_h: Усиления h_t > 0, 1/Вт.
    """

    horizon_start: int
    gains_h: np.ndarray

    def __post_init__(self) -> None:
        gains = np.array(self.gains_h, dtype=float)
        if gains.ndim != 1 or gains.size == 0:
            raise DomainError("трасса канала должна быть непустым вектором")
        if not np.all(np.isfinite(gains)) or np.any(gains <= 0):
            raise DomainError("усиления канала должны быть конечны и положительны")
        gains.setflags(write=False)
        object.__setattr__(self, "gains_h", gains)

    def __len__(self) -> int:
        return int(self.gains_h.size)

    @property
    def horizon_end(self) -> int:
        return self.horizon_start + len(self)

    def window(self, start: int, length: int) -> np.ndarray:
        """Усиления слотов [start, start + length)."""
        offset = start - self.horizon_start
        if length < 1 or offset < 0 or offset + length > len(self):
            raise DomainError(
                "окно выходит за пределы трассы",
                extra={
                    "start": start,
                    "length": length,
                    "horizon_start": self.horizon_start,
                    "horizon_len": len(self),
                },
            )
        return self.gains_h[offset : offset + length]

    @classmethod
    def flat(cls, horizon_start: int, length: int, gain: float) -> "ChannelTrace":
        return cls(horizon_start, np.full(length, gain, dtype=float))


@dataclass(frozen=True, eq=False)
class PowerSchedule:
    """
    Мощности передачи по слотам начиная с `start`.

    Attributes:
        start: Первый слот расписания.
        powers: Мощности p_t ∈ [0, p_max], Вт.
        infeasible: Хотя бы одна задача не укладывается даже на p_max.
        chance_infeasible: Вероятностное ограничение не выполнено на выборках.
        expected_bits: Ожидаемые биты по слотам (среднее по выборкам SAA).
    """

    start: int
    powers: np.ndarray
    infeasible: bool = False
    chance_infeasible: bool = False
    expected_bits: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        powers = np.array(self.powers, dtype=float)
        if powers.ndim != 1:
            raise DomainError("расписание мощности должно быть вектором")
        if np.any(powers < 0) or not np.all(np.isfinite(powers)):
            raise DomainError("мощности должны быть конечны и неотрицательны")
        powers.setflags(write=False)
        object.__setattr__(self, "powers", powers)

    def __len__(self) -> int:
        return int(self.powers.size)

    @property
    def end(self) -> int:
        return self.start + len(self)

    def power_at(self, t: int) -> float:
        if self.start <= t < self.end:
            return float(self.powers[t - self.start])
        return 0.0

    def expected_at(self, t: int) -> float:
        if self.expected_bits is not None and self.start <= t < self.end:
            return float(self.expected_bits[t - self.start])
        return 0.0

    @classmethod
    def zeros(cls, start: int, length: int) -> "PowerSchedule":
        return cls(start, np.zeros(max(0, length)))


class WaterFillingResult(NamedTuple):
    powers: np.ndarray
    level: float
    infeasible: bool


def _free_water_level(target_nats: float, log_gains: np.ndarray) -> float:
    """ν = exp((D̃ − Σ ln h_t)/|F|) по свободным слотам F."""
    return math.exp((target_nats - float(np.sum(log_gains))) / log_gains.size)


def water_filling(
    payload: float, gains: np.ndarray, p_max: float, tau: float, bandwidth: float
) -> WaterFillingResult:
    """
    Водозаполнение с ограничениями 0 ≤ p_t ≤ p_max.

    Уровень ν ищется точно: доставляемые наты монотонны по ν и линейно
    зависят от ln ν между точками излома {1/h_t, 1/h_t + p_max}, поэтому
    достаточно найти интервал излома и решить замкнутую форму на нем.

    Args:
        payload: Данные D, бит.
        gains: Усиления окна.
        p_max: Предельная мощность, Вт.
        tau: Длительность слота, с.
        bandwidth: Полоса, Гц.

    Returns:
        WaterFillingResult: Мощности, уровень ν и флаг недостижимости.

    Raises:
        DomainError: Пустое окно или неположительный объем данных.
    """
    gains = np.asarray(gains, dtype=float)
    if gains.size < 1:
        raise DomainError("пустое окно передачи")
    if payload <= 0:
        raise DomainError("объем данных должен быть положительным", extra={"payload": payload})

    target = payload * LN2 / (tau * bandwidth)
    capped_nats = np.log1p(p_max * gains)
    if float(np.sum(capped_nats)) < target:
        return WaterFillingResult(np.full(gains.size, p_max), math.inf, True)

    inverse = 1.0 / gains
    breakpoints = np.unique(np.concatenate([inverse, inverse + p_max]))
    levels = np.clip(breakpoints[:, None] - inverse[None, :], 0.0, p_max)
    delivered = np.log1p(levels * gains[None, :]).sum(axis=1)

    j = int(np.clip(np.searchsorted(delivered, target), 1, breakpoints.size - 1))
    middle = 0.5 * (breakpoints[j - 1] + breakpoints[j])
    saturated = middle >= inverse + p_max
    free = (inverse < middle) & ~saturated

    if not np.any(free):
        level = float(breakpoints[j])
    else:
        residual = target - float(np.sum(capped_nats[saturated]))
        level = _free_water_level(residual, np.log(gains[free]))

    powers = np.clip(level - inverse, 0.0, p_max)
    return WaterFillingResult(powers, level, False)


def optimal_power_single_task(
    payload_d: float,
    window: int,
    trace: ChannelTrace,
    p_max: float,
    tau: float,
    bandwidth: float,
    start: Optional[int] = None,
) -> PowerSchedule:
    """
    Оптимальное расписание мощности одной задачи на окне из `window` слотов.

    Окно занимает слоты [start, start + window); по умолчанию начинается
    с начала трассы. Если даже p_max во всех слотах не доставляет D,
    возвращается расписание из p_max с флагом infeasible.

    Raises:
        DomainError: window < 1, D ≤ 0 или окно вне трассы.
    """
    if window < 1:
        raise DomainError("окно передачи должно содержать хотя бы один слот")
    begin = trace.horizon_start if start is None else start
    result = water_filling(payload_d, trace.window(begin, window), p_max, tau, bandwidth)
    return PowerSchedule(begin, result.powers, infeasible=result.infeasible)


def schedule_energy(sched: PowerSchedule, tau: float) -> float:
    """Энергия передачи τ·Σ p_t, Дж."""
    return tau * float(np.sum(sched.powers))
