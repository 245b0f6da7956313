import logging
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Tuple, Type

from pydantic import model_validator
from pydantic_settings import (BaseSettings, PydanticBaseSettingsSource,
                               SettingsConfigDict)

from shared.core.exceptions import OutputError
from shared.schemas.v1 import (AgentConfig, RunConfig, SaaConfig,
                               SystemParams, VerifyConfig)

logger = logging.getLogger(__name__)

CONFIG_HEADER = (
    "# Конфигурация симулятора OPETRL.\n"
    "# Формат: section__field = value; строки с # игнорируются.\n"
    "# system__noise_var_dbm задается в дБм, system__ref_gain_db в дБ.\n"
)


class SimSettings(BaseSettings):
    """
    Настройки симулятора.

    Единственный корень конфигурации. Источники: аргументы конструктора
    (переопределения --set) поверх файла key = value. Переменные окружения
    источником не являются, эксперимент воспроизводится по одному файлу.

    Usage:
        settings = SimSettings(_env_file="opetrl.conf", system={"p_max": 1e-5})
    """

    model_config = SettingsConfigDict(
        env_nested_delimiter="__",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="forbid",
    )

    system: SystemParams = SystemParams()
    saa: SaaConfig = SaaConfig()
    agent: AgentConfig = AgentConfig()
    run: RunConfig = RunConfig()
    verify: VerifyConfig = VerifyConfig()

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: Type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> Tuple[PydanticBaseSettingsSource, ...]:
        return (init_settings, dotenv_settings)

    @model_validator(mode="after")
    def _check_horizon(self) -> "SimSettings":
        if self.run.horizon_slots < self.system.deadline_c:
            raise ValueError(
                f"run.horizon_slots ({self.run.horizon_slots}) меньше system.deadline_c ({self.system.deadline_c})"
            )
        return self

    @property
    def sections(self) -> Dict[str, Any]:
        return {
            "system": self.system,
            "saa": self.saa,
            "agent": self.agent,
            "run": self.run,
            "verify": self.verify,
        }


def _format_value(value: Any) -> str:
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def dump_config(settings: SimSettings, path: Path) -> None:
    """
    Записывает все поля настроек в формате key = value.

    Поля со значением None записываются закомментированными,
    поэтому загрузка дампа воспроизводит те же настройки.

    Raises:
        OutputError: Файл не удалось записать.
    """
    lines = [CONFIG_HEADER]
    for section_name, section in settings.sections.items():
        lines.append(f"\n# [{section_name}]\n")
        for field_name in type(section).model_fields:
            value = getattr(section, field_name)
            key = f"{section_name}__{field_name}"
            if value is None:
                lines.append(f"# {key} =\n")
            else:
                lines.append(f"{key} = {_format_value(value)}\n")

    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text("".join(lines), encoding="utf-8")
    except OSError as e:
        raise OutputError(str(path), str(e)) from e

    logger.debug("Конфигурация сохранена: %s", path)
