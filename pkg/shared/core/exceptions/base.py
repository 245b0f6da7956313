"""
Базовый класс для обработки исключений симулятора.

Включает в себя:
- Логирование ошибок с контекстом.
- Генерация уникального идентификатора для ошибки.
- Преобразование даты и времени в формат ISO 8601 с учетом часового пояса.
"""

import logging
import uuid
from datetime import datetime
from typing import Any, Dict, Optional

import pytz

logger = logging.getLogger(__name__)
utc_tz = pytz.utc


class BaseSimulationError(Exception):
    """
    Базовый класс для всех ошибок симулятора.

    Attributes:
        detail: Сообщение об ошибке.
        error_type: Тип ошибки.
        extra: Дополнительные данные для контекста.
        timestamp: Время возникновения (UTC, ISO 8601).
        error_id: Уникальный идентификатор ошибки.
        log_level: Уровень, с которым ошибка попадает в лог.
    """

    log_level: int = logging.ERROR

    def __init__(
        self,
        detail: str,
        error_type: str,
        extra: Optional[Dict[str, Any]] = None,
    ) -> None:
        self.detail = detail
        self.error_type = error_type
        self.extra = extra or {}
        self.timestamp = datetime.now(utc_tz).isoformat()
        self.error_id = str(uuid.uuid4())

        context = {
            "timestamp": self.timestamp,
            "error_id": self.error_id,
            "error_type": error_type,
            **self.extra,
        }

        logger.log(self.log_level, detail, extra=context)
        super().__init__(detail)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "detail": self.detail,
            "error_type": self.error_type,
            "timestamp": self.timestamp,
            "error_id": self.error_id,
            "extra": self.extra,
        }


class DomainError(BaseSimulationError, ValueError):
    """
    Аргумент вне области определения (отрицательная мощность, пустое окно и т.п.).
    """

    def __init__(self, message: str, extra: Optional[Dict[str, Any]] = None):
        super().__init__(
            detail=f"Недопустимый аргумент: {message}",
            error_type="domain_error",
            extra=extra,
        )


class PreconditionError(BaseSimulationError):
    """
    Нарушено предусловие операции (порядок задач, размер мини-батча).
    """

    def __init__(self, message: str, extra: Optional[Dict[str, Any]] = None):
        super().__init__(
            detail=f"Нарушено предусловие: {message}",
            error_type="precondition_error",
            extra=extra,
        )


class InfeasibleQueueError(BaseSimulationError):
    """
    Очередь недопустима: задача не может получить ни одного слота до дедлайна.

    Attributes:
        task_id: Идентификатор первой задачи, для которой нет слота.
    """

    log_level = logging.WARNING

    def __init__(self, task_id: int, extra: Optional[Dict[str, Any]] = None):
        self.task_id = task_id
        super().__init__(
            detail=f"Задача {task_id} не получает ни одного слота до дедлайна",
            error_type="infeasible_queue",
            extra={"task_id": task_id, **(extra or {})},
        )


class BatteryDepletedError(BaseSimulationError):
    """
    Шаг батареи уводит заряд ниже нуля.

    Симулятор обрабатывает это как сигнал, поэтому уровень логирования DEBUG.
    """

    log_level = logging.DEBUG

    def __init__(self, energy: float, spend: float, harvest: float):
        self.energy = energy
        self.spend = spend
        self.harvest = harvest
        super().__init__(
            detail="Недостаточно энергии в батарее",
            error_type="battery_depleted",
            extra={"energy": energy, "spend": spend, "harvest": harvest},
        )


class ConfigError(BaseSimulationError):
    """
    Ошибка загрузки или валидации конфигурации.
    """

    def __init__(self, message: str, extra: Optional[Dict[str, Any]] = None):
        super().__init__(
            detail=f"Ошибка конфигурации: {message}",
            error_type="config_error",
            extra=extra,
        )


class CheckpointError(BaseSimulationError):
    """
    Файл чекпоинта поврежден или не совпадает по размерностям.
    """

    def __init__(self, message: str, path: str):
        super().__init__(
            detail=f"Ошибка чекпоинта: {message}",
            error_type="checkpoint_error",
            extra={"path": path},
        )


class OutputError(BaseSimulationError):
    """
    Не удалось записать результат.

    Attributes:
        path: Путь, по которому не удалась запись.
    """

    def __init__(self, path: str, reason: str):
        self.path = path
        super().__init__(
            detail=f"Не удалось записать {path}: {reason}",
            error_type="output_error",
            extra={"path": path},
        )
