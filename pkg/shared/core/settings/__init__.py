from functools import lru_cache
from typing import Any, Dict, Optional, Sequence

from pydantic import ValidationError

from shared.core.exceptions import ConfigError

from .logging import LoggingSettings
from .paths import PathSettings
from .settings import SimSettings, dump_config


def parse_overrides(overrides: Sequence[str]) -> Dict[str, Dict[str, Any]]:
    """
    Разбирает переопределения вида section.field=value или section__field=value.

    Returns:
        Dict: Вложенный словарь для конструктора SimSettings.

    Raises:
        ConfigError: Строка без "=" или ключ не из двух частей.
    """
    nested: Dict[str, Dict[str, Any]] = {}
    for item in overrides:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"переопределение без '=': {item!r}")
        parts = key.strip().lower().replace("__", ".").split(".")
        if len(parts) != 2 or not all(parts):
            raise ConfigError(
                f"ключ должен иметь вид section.field: {key!r}",
                extra={"override": item},
            )
        section, field = parts
        nested.setdefault(section, {})[field] = value.strip()
    return nested


def get_config(
    config_path: Optional[str] = None, overrides: Sequence[str] = ()
) -> SimSettings:
    """
    Загружает настройки симулятора.

    Args:
        config_path: Путь из флага --config.
        overrides: Строки --set.

    Returns:
        SimSettings: Проверенные настройки.

    Raises:
        ConfigError: Файл не найден или значения не прошли валидацию.
    """
    path, source = PathSettings.get_config_file_and_source(config_path)
    if path is not None and not path.is_file():
        raise ConfigError(f"файл конфигурации не найден: {path}", extra={"source": source})

    try:
        return SimSettings(_env_file=path, **parse_overrides(overrides))
    except ValidationError as e:
        raise ConfigError(str(e), extra={"path": str(path) if path else None}) from e


@lru_cache
def get_logging_settings() -> LoggingSettings:
    """
    Получение настроек логирования из кэша.
    """
    return LoggingSettings()


__all__ = [
    "LoggingSettings",
    "PathSettings",
    "SimSettings",
    "dump_config",
    "get_config",
    "get_logging_settings",
    "parse_overrides",
]
