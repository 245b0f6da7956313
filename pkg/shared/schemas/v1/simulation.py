"""
Схемы запуска симуляции, проверки и метрик.
"""

from enum import Enum
from typing import Optional

from pydantic import Field

from .base import BaseConfigSchema, CommonBaseSchema


class Policy(str, Enum):
    OPETRL = "opetrl"
    ONE_TASK = "one_task"
    GREEDY = "greedy"


class ModeRule(str, Enum):
    """Правило выбора режима для базовых политик: auto = встроенное правило политики."""

    AUTO = "auto"
    DT = "dt"
    CT = "ct"


class RunConfig(BaseConfigSchema):
    """
    Параметры запуска.

    Attributes:
        horizon_slots: Слотов в эпизоде.
        episodes: Эпизодов обучения.
        eval_episodes: Эпизодов оценки на точку.
        seed: Главное зерно; None = случайное, записывается в отчет.
        policy: Политика для eval.
        workers: Процессов для параллельных эпизодов и точек развертки.
        checkpoint: Путь к чекпоинту агента для eval/sweep.
        one_task_mode: Переопределение правила режима одно-задачной политики.
        greedy_mode: Переопределение правила режима жадной политики.
        write_traces: Писать ли CSV с пошаговыми трассами в eval.
    """

    horizon_slots: int = Field(default=2000, ge=1)
    episodes: int = Field(default=200, ge=1)
    eval_episodes: int = Field(default=50, ge=1)
    seed: Optional[int] = Field(default=None, ge=0)
    policy: Policy = Policy.OPETRL
    workers: int = Field(default=1, ge=1)
    checkpoint: Optional[str] = None
    one_task_mode: ModeRule = ModeRule.AUTO
    greedy_mode: ModeRule = ModeRule.AUTO
    write_traces: bool = True


class VerifyConfig(BaseConfigSchema):
    """
    Размеры и допуски набора проверок `verify`.

    Поля trend_* задают бюджет проверки трендов развертки: обучение
    агента, длину эпизодов, число зерен оценки, K выборок SAA, допуск
    по доле успеха и множитель стандартной ошибки для энергии.
    """

    seed: int = 2024
    oracle_instances: int = Field(default=1000, ge=1)
    oracle_rtol: float = Field(default=1e-9, gt=0)
    clipped_instances: int = Field(default=200, ge=1)
    clipped_rtol: float = Field(default=1e-6, gt=0)
    monotone_instances: int = Field(default=1000, ge=1)
    monotone_atol: float = Field(default=1e-12, ge=0)
    bruteforce_instances: int = Field(default=500, ge=1)
    gradient_rtol: float = Field(default=1e-4, gt=0)
    trend_train_episodes: int = Field(default=60, ge=1)
    trend_horizon_slots: int = Field(default=400, ge=10)
    trend_eval_episodes: int = Field(default=20, ge=2)
    trend_k_samples: int = Field(default=8, ge=1)
    trend_slack: float = Field(default=0.05, ge=0)
    trend_noise_z: float = Field(default=3.0, ge=0)


class MetricsSchema(CommonBaseSchema):
    """
    Метрики одного эпизода.

    Attributes:
        success_prob: Доля разрешенных задач, выполненных до дедлайна (1.0 без задач).
        total_energy: Энергия передачи и вычислений, Дж.
    """

    success_prob: float = Field(ge=0, le=1)
    total_energy: float = Field(ge=0)
    transmit_energy: float = Field(ge=0)
    compute_energy: float = Field(ge=0)
    tasks_total: int = 0
    tasks_met: int = 0
    tasks_missed: int = 0
    tasks_censored: int = 0
    stalled_slots: int = 0


class SummaryRowSchema(CommonBaseSchema):
    """
    Строка сводного CSV на пару (политика, точка развертки).
    """

    policy: str
    sweep_var: str
    sweep_value: float
    success_prob_mean: float
    success_prob_se: float
    energy_J_mean: float
    energy_J_se: float
    episodes: int
    seed: int
