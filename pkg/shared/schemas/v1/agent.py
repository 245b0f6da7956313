"""
Конфигурация агента DDQN.
"""

from typing import Optional

from pydantic import Field, model_validator

from .base import BaseConfigSchema


class AgentConfig(BaseConfigSchema):
    """
    Гиперпараметры агента.

    Attributes:
        learn_rate: Шаг SGD.
        discount_gamma: Коэффициент дисконтирования γ ∈ [0, 1).
        eps_start, eps_end: Границы линейного расписания ε.
        eps_decay: Доля эпизодов обучения, за которую ε убывает до eps_end.
        minibatch: Размер мини-батча.
        buffer_capacity: Емкость памяти воспроизведения.
        target_sync_every: Период синхронизации целевой сети (в обновлениях).
        hidden: Нейронов в скрытом слое.
        max_tasks: Ширина векторов состояния.
        deadline_penalty: Штраф за пропуск дедлайна, Дж; None = 10·τ·C·p_max.
        success_bonus: Положительная награда за выполнение дедлайна.
        reward_scale: Множитель наград при обучении; None = 1/(τ·C·p_max).
    """

    learn_rate: float = Field(default=1e-3, gt=0)
    discount_gamma: float = Field(default=0.95, ge=0, lt=1)
    eps_start: float = Field(default=1.0, ge=0, le=1)
    eps_end: float = Field(default=0.05, ge=0, le=1)
    eps_decay: float = Field(default=0.5, gt=0, le=1)
    minibatch: int = Field(default=64, ge=1)
    buffer_capacity: int = Field(default=1000, ge=1)
    target_sync_every: int = Field(default=20, ge=1)
    hidden: int = Field(default=32, ge=1)
    max_tasks: int = Field(default=8, ge=1)
    deadline_penalty: Optional[float] = Field(default=None, ge=0)
    success_bonus: float = Field(default=0.0, ge=0)
    reward_scale: Optional[float] = Field(default=None, gt=0)

    @model_validator(mode="after")
    def _check_minibatch(self) -> "AgentConfig":
        if self.minibatch > self.buffer_capacity:
            raise ValueError(
                f"minibatch ({self.minibatch}) больше buffer_capacity ({self.buffer_capacity})"
            )
        return self

    @property
    def n_inputs(self) -> int:
        return 2 * self.max_tasks + 1
