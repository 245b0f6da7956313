import logging
import os
from pathlib import Path
from typing import Optional

logger = logging.getLogger(__name__)


class PathSettings:
    """Конфигурация путей к файлам настроек."""

    CONFIG_ENV_VAR = "OPETRL_CONFIG"
    DEFAULT_CONFIG_FILE = Path("opetrl.conf")

    @classmethod
    def get_config_file_and_source(
        cls, explicit: Optional[str] = None
    ) -> tuple[Optional[Path], str]:
        """
        Определяет файл конфигурации и его источник.

        Порядок: явный путь (--config) → переменная OPETRL_CONFIG →
        ./opetrl.conf, если существует → встроенные значения по умолчанию.

        Args:
            explicit: Путь, переданный флагом --config.

        Returns:
            tuple[Optional[Path], str]: Путь к файлу (None для значений по умолчанию)
            и тип источника (cli/env/local/defaults).
        """
        if explicit:
            config_path, source = Path(explicit), "cli"
        elif os.getenv(cls.CONFIG_ENV_VAR):
            config_path, source = Path(os.environ[cls.CONFIG_ENV_VAR]), "env"
        elif cls.DEFAULT_CONFIG_FILE.exists():
            config_path, source = cls.DEFAULT_CONFIG_FILE, "local"
        else:
            config_path, source = None, "defaults"

        logger.info("Источник конфигурации: %s", source.upper())
        if config_path is not None:
            logger.info("Конфигурация: %s", config_path)

        return config_path, source
