from typing import Optional

from pydantic_settings import BaseSettings, SettingsConfigDict


class LoggingSettings(BaseSettings):
    """Конфигурация логирования (переменные окружения OPETRL_LOG_*)"""

    model_config = SettingsConfigDict(env_prefix="OPETRL_LOG_", extra="ignore")

    FORMAT: str = "pretty"
    FILE: Optional[str] = None
    LEVEL: str = "INFO"
    ENCODING: str = "utf-8"
    FILE_MODE: str = "a"
    PRETTY_FORMAT: str = (
        "\033[1;36m%(asctime)s\033[0m - \033[1;32m%(name)s\033[0m - %(levelname)s - %(message)s"
    )

    JSON_FORMAT: dict = {
        "timestamp": "%(asctime)s",
        "level": "%(levelname)s",
        "module": "%(module)s",
        "function": "%(funcName)s",
        "message": "%(message)s",
    }

    def to_dict(self) -> dict:
        return {
            "level": self.LEVEL.upper(),
            "filename": self.FILE,
            "encoding": self.ENCODING,
            "filemode": self.FILE_MODE,
            "format": self.PRETTY_FORMAT if self.FORMAT == "pretty" else None,
            "json_format": self.JSON_FORMAT if self.FORMAT == "json" else None,
        }
