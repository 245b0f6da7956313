"""
Модуль содержит контейнер зависимостей.
"""

from dishka import Container, make_container

from shared.core.settings import SimSettings

from .providers import SimulationProvider


def build_container(settings: SimSettings) -> Container:
    """
    Контейнер на один запуск команды; закрывается вызывающей стороной.

    Usage:
        container = build_container(settings)
        try:
            service = container.get(ExperimentService)
        finally:
            container.close()
    """
    return make_container(SimulationProvider(), context={SimSettings: settings})
