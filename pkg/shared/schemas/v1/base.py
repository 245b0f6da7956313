"""
Модуль для определения базовых схем данных.

`CommonBaseSchema` задает общую конфигурацию для валидации и сериализации,
`BaseConfigSchema` используется для неизменяемых секций конфигурации
(параметры системы, SAA, агента, запуска).
"""

from pydantic import BaseModel, ConfigDict


class CommonBaseSchema(BaseModel):
    """
    Общая базовая схема для всех моделей.
    Содержит только общую конфигурацию и метод to_dict().

    Attributes:
        model_config (ConfigDict): Конфигурация модели, позволяющая
        использовать атрибуты в качестве полей.

    Methods:
        to_dict(): Преобразует объект в словарь.
    """

    model_config = ConfigDict(from_attributes=True)

    def to_dict(self) -> dict:
        return self.model_dump()


class BaseConfigSchema(CommonBaseSchema):
    """
    Базовая схема секции конфигурации.

    Секции неизменяемы (frozen) и не принимают неизвестные ключи,
    чтобы опечатка в файле конфигурации не проходила молча.
    """

    model_config = ConfigDict(from_attributes=True, frozen=True, extra="forbid")
