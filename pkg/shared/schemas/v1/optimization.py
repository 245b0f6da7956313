"""
Конфигурация встроенной оптимизации мощности (SAA).
"""

from pydantic import Field

from .base import BaseConfigSchema


class SaaConfig(BaseConfigSchema):
    """
    Параметры аппроксимации выборочным средним.

    Attributes:
        epsilon: Допустимая вероятность нарушения дедлайна ε.
        theta: Доверительный параметр θ.
        n_vars: Размерность N в формуле K*; 0 означает длину горизонта планирования.
        k_samples: Число выборок K; 0 означает автоматический выбор K*.
        corrected_bound: Использовать форму K* с "+" между log(1/θ) и корнем.
        workers: Потоков для параллельного решения подзадач.
        exact_limit: Порог числа допустимых распределений для точного перебора.
        loop_cap_factor: Предел итераций распределения времени, кратно длине горизонта.
        lift_iterations: Итераций бисекции при подъеме мощности под выборочные ограничения.
    """

    epsilon: float = Field(default=0.1, gt=0, lt=1)
    theta: float = Field(default=0.05, gt=0, lt=1)
    n_vars: int = Field(default=0, ge=0)
    k_samples: int = Field(default=32, ge=0)
    corrected_bound: bool = False
    workers: int = Field(default=1, ge=1)
    exact_limit: int = Field(default=64, ge=0)
    loop_cap_factor: int = Field(default=10, ge=1)
    lift_iterations: int = Field(default=20, ge=1)
