"""
Форматтеры логов симулятора.

PrettyFormatter: консоль, цвет по уровню, extra-атрибуты как key=value.
CustomJsonFormatter: JSON-строка на запись (файл --log-file), extra в поле "extra".
"""
import json
import logging
from datetime import datetime
from typing import Any

import numpy as np

from shared.core.settings import get_logging_settings

# Атрибуты LogRecord, которые не относятся к extra
RECORD_ATTRS = frozenset(vars(logging.LogRecord("", 0, "", 0, "", None, None))) | {
    "message",
    "asctime",
    "taskName",
}


def extra_attributes(record: logging.LogRecord) -> dict:
    return {k: v for k, v in vars(record).items() if k not in RECORD_ATTRS}


def _short(value: Any) -> str:
    if isinstance(value, (float, np.floating)):
        return f"{value:.4g}"
    if isinstance(value, np.ndarray):
        return np.array2string(value, precision=4, threshold=8)
    return str(value)


def _json_default(value: Any) -> Any:
    """Приводит numpy-значения и перечисления к типам JSON."""
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if hasattr(value, "value"):
        return value.value
    return str(value)


class PrettyFormatter(logging.Formatter):
    """
    Цветной вывод в консоль с эмодзи уровня.

    Метрики из extra печатаются после сообщения в виде key=value
    с четырьмя значащими цифрами.

    Usage:
        handler = logging.StreamHandler()
        handler.setFormatter(PrettyFormatter())
    """

    COLORS = {
        "DEBUG": "\033[36m",
        "INFO": "\033[32m",
        "WARNING": "\033[33m",
        "ERROR": "\033[31m",
        "CRITICAL": "\033[41m",
    }
    EMOJIS = {
        "DEBUG": "🔍",
        "INFO": "✨",
        "WARNING": "⚠️",
        "ERROR": "❌",
        "CRITICAL": "💥",
    }
    RESET = "\033[0m"

    def format(self, record):
        level = record.levelname
        line = get_logging_settings().PRETTY_FORMAT % {
            "asctime": self.formatTime(record),
            "name": record.name,
            "levelname": f"{self.COLORS.get(level, '')}{level}{self.RESET}",
            "message": f"{self.EMOJIS.get(level, '')} {record.getMessage()}",
        }

        extra = extra_attributes(record)
        if extra:
            pairs = " ".join(f"{k}={_short(v)}" for k, v in extra.items())
            line = f"{line} \033[33m[{pairs}]{self.RESET}"

        if record.exc_info:
            line = f"{line}\n{self.formatException(record.exc_info)}"
        return line


class CustomJsonFormatter(logging.Formatter):
    """Одна JSON-запись на строку по шаблону OPETRL_LOG_JSON_FORMAT."""

    def format(self, record):
        values = {
            "asctime": self.formatTime(record),
            "levelname": record.levelname,
            "module": record.module,
            "funcName": record.funcName,
            "message": record.getMessage(),
        }
        log_data = {}
        for key, template in get_logging_settings().JSON_FORMAT.items():
            if key == "timestamp":
                log_data[key] = datetime.fromtimestamp(record.created).strftime(
                    "%Y-%m-%d %H:%M:%S.%f"
                )[:-3]
            else:
                log_data[key] = template % values

        extra = extra_attributes(record)
        if extra:
            log_data["extra"] = extra
        if record.exc_info:
            log_data["exception"] = self.formatException(record.exc_info)

        return json.dumps(log_data, ensure_ascii=False, default=_json_default)
