"""
Модуль настройки логирования.
"""
import logging
from pathlib import Path
from typing import Optional

from shared.core.settings import get_logging_settings

from .formatters import CustomJsonFormatter, PrettyFormatter


def setup_logging(level: Optional[str] = None, log_file: Optional[str] = None) -> None:
    """
    Настраивает систему логирования.

    Args:
        level: Уровень из флага --log-level (перекрывает OPETRL_LOG_LEVEL).
        log_file: Файл JSON-логов из флага --log-file (перекрывает OPETRL_LOG_FILE).
    """
    settings = get_logging_settings()
    root = logging.getLogger()

    for handler in list(root.handlers):
        root.removeHandler(handler)

    log_config = settings.to_dict()

    console_formatter = (
        CustomJsonFormatter() if settings.FORMAT == "json" else PrettyFormatter()
    )
    console_handler = logging.StreamHandler()
    console_handler.setFormatter(console_formatter)
    root.addHandler(console_handler)

    file_path = log_file or log_config.get("filename")
    if file_path:
        try:
            path = Path(file_path)
            path.parent.mkdir(parents=True, exist_ok=True)
            file_handler = logging.FileHandler(
                filename=path,
                mode=log_config.get("filemode", "a"),
                encoding=log_config.get("encoding", "utf-8"),
            )
            file_handler.setFormatter(CustomJsonFormatter())
            root.addHandler(file_handler)
        except (PermissionError, OSError) as e:
            print(f"⚠️ Не удалось использовать файл логов {file_path}: {e}")

    root.setLevel((level or log_config.get("level", "INFO")).upper())
