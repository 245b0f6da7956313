"""
Модель канала: мелкомасштабное замирание и эффективное усиление.
"""

from dataclasses import dataclass
from typing import Protocol, Union

import numpy as np

from shared.core.exceptions import DomainError
from shared.schemas.v1 import ChannelModel, SystemParams

# Нижняя граница g: эффективное усиление обязано быть строго положительным
MIN_SMALL_SCALE_GAIN = 1e-12

ArrayOrFloat = Union[float, np.ndarray]


class ChannelSampler(Protocol):
    """Распределение мелкомасштабного усиления g."""

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray: ...


class RayleighSampler:
    """Релеевское замирание: g ~ Exp(1), независимо по слотам."""

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return np.maximum(rng.exponential(1.0, size), MIN_SMALL_SCALE_GAIN)

    def __repr__(self) -> str:
        return "RayleighSampler()"


class DeterministicSampler:
    """Канал без дисперсии: g = value в каждом слоте."""

    def __init__(self, value: float = 1.0):
        if value <= 0:
            raise DomainError("значение g должно быть положительным", extra={"value": value})
        self.value = value

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return np.full(size, self.value, dtype=float)

    def __repr__(self) -> str:
        return f"DeterministicSampler({self.value})"


def make_sampler(model: ChannelModel) -> ChannelSampler:
    if model == ChannelModel.DETERMINISTIC:
        return DeterministicSampler()
    return RayleighSampler()


def effective_gain(g: ArrayOrFloat, params: SystemParams) -> ArrayOrFloat:
    """Эффективное усиление h = ρ·g/(σ²·d²), 1/Вт."""
    return g * params.ref_gain_rho / (params.noise_var * params.distance_d**2)


def channel_mean_gain(params: SystemParams) -> float:
    return float(effective_gain(1.0, params))


@dataclass(frozen=True, slots=True)
class ChannelSample:
    """Состояние канала в слоте."""

    small_scale_g: float
    effective_h: float

    @classmethod
    def from_gain(cls, g: float, params: SystemParams) -> "ChannelSample":
        if g < 0:
            raise DomainError("отрицательное усиление g", extra={"g": g})
        return cls(small_scale_g=g, effective_h=float(effective_gain(g, params)))
