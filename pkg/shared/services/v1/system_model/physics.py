"""
Физические модели: солнечная генерация, скорость канала, вычисления,
батарея и размер передаваемых данных.

Все функции чистые и принимают параметры явно.
"""

import math
from dataclasses import dataclass

import numpy as np

from shared.core.exceptions import BatteryDepletedError, DomainError
from shared.schemas.v1 import SystemParams, TransmissionMode

LN2 = math.log(2.0)
# Предел показателя для math.exp в double
MAX_EXPONENT = 700.0


@dataclass(frozen=True, slots=True)
class BatteryState:
    """Заряд батареи на границе слота, Дж."""

    energy: float


def cloud_attenuation(beta: float, d_cloud: float) -> float:
    """
    Ослабление солнечного света облаками: e^(−β·d_cloud).

    Raises:
        DomainError: Отрицательный коэффициент или толщина.
    """
    if beta < 0 or d_cloud < 0:
        raise DomainError(
            "коэффициент поглощения и толщина облаков должны быть неотрицательны",
            extra={"beta": beta, "d_cloud": d_cloud},
        )
    return math.exp(-beta * d_cloud)


def solar_power(params: SystemParams) -> float:
    """Выходная мощность панели, Вт (постоянна в течение запуска)."""
    return (
        params.solar_eff
        * params.panel_area
        * params.irradiance_g
        * cloud_attenuation(params.absorb_beta, params.cloud_thickness)
    )


def harvest_per_slot(params: SystemParams) -> float:
    return params.slot_tau * solar_power(params)


def achievable_rate(p: float, h: float, bandwidth: float) -> float:
    """
    Достижимая скорость W·log₂(1 + p·h), бит/с.

    Args:
        p: Мощность передачи, Вт.
        h: Эффективное усиление канала, 1/Вт.
        bandwidth: Полоса, Гц.

    Raises:
        DomainError: p < 0, h ≤ 0 или W ≤ 0.
    """
    if p < 0:
        raise DomainError("отрицательная мощность передачи", extra={"p": p})
    if h <= 0 or bandwidth <= 0:
        raise DomainError(
            "усиление канала и полоса должны быть положительны",
            extra={"h": h, "bandwidth": bandwidth},
        )
    return bandwidth * math.log1p(p * h) / LN2


def slot_bits(powers: np.ndarray, gains: np.ndarray, params: SystemParams) -> np.ndarray:
    """Биты, доставляемые в каждом слоте: τ·W·log₂(1 + p_t·h_t)."""
    return params.slot_tau * params.bandwidth_w * np.log1p(powers * gains) / LN2


def power_for_bits(bits: float, h: float, slots: float, params: SystemParams) -> float:
    """
    Мощность, равномерно доставляющая `bits` за `slots` слотов при усилении h.

    Обращение формулы скорости: (2^(D/(τ·W·n)) − 1)/h. При бесконечном
    числе слотов возвращает 0, при недостижимо большой мощности inf.
    """
    if bits <= 0 or math.isinf(slots):
        return 0.0
    if slots <= 0:
        raise DomainError("число слотов должно быть положительным", extra={"slots": slots})
    exponent = bits * LN2 / (params.slot_tau * params.bandwidth_w * slots)
    if exponent > MAX_EXPONENT:
        return math.inf
    return math.expm1(exponent) / h


def compute_time(f: float, params: SystemParams) -> float:
    """
    Время построения карты признаков n_t·n_s/(f·N_c·n_v), с.

    Raises:
        DomainError: f ≤ 0.
    """
    if f <= 0:
        raise DomainError("частота вычислений должна быть положительной", extra={"f": f})
    return params.flops_nt * params.os_bits_ns / (f * params.cores_nc * params.vec_bits_nv)


def compute_energy(f: float, params: SystemParams) -> float:
    """Энергия построения карты признаков k·f²·n_t·n_s/(N_c·n_v), Дж."""
    if f < 0:
        raise DomainError("отрицательная частота вычислений", extra={"f": f})
    return (
        params.chip_k
        * f**2
        * params.flops_nt
        * params.os_bits_ns
        / (params.cores_nc * params.vec_bits_nv)
    )


def compute_slots(f: float, params: SystemParams) -> int:
    """Число целых слотов вычислений ⌈t_f^C/τ⌉; 0 для DT (f = 0)."""
    if f == 0:
        return 0
    # допуск на ошибку округления при делении на τ
    return max(1, math.ceil(compute_time(f, params) / params.slot_tau - 1e-9))


def battery_step(
    state: BatteryState,
    harvest: float,
    e_trans: float,
    e_comp: float,
    capacity: float,
) -> BatteryState:
    """
    Шаг батареи: E' = min(E + harvest − e_trans − e_comp, E_max).

    Избыток энергии сверх емкости отбрасывается.

    Raises:
        DomainError: Отрицательные траты.
        BatteryDepletedError: Заряд ушел бы ниже нуля.
    """
    if e_trans < 0 or e_comp < 0:
        raise DomainError(
            "траты энергии должны быть неотрицательны",
            extra={"e_trans": e_trans, "e_comp": e_comp},
        )
    spend = e_trans + e_comp
    energy = state.energy + harvest - spend
    if energy < 0:
        raise BatteryDepletedError(state.energy, spend, harvest)
    return BatteryState(energy=min(energy, capacity))


def task_payload(mode: TransmissionMode, params: SystemParams) -> int:
    """Размер передаваемых данных: L_h·L_w·Q для CT, S для DT."""
    if mode == TransmissionMode.CT:
        return params.feature_bits
    return params.raw_bits_s
