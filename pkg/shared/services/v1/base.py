import logging

from shared.schemas.v1 import SystemParams


class BaseService:
    """
    Базовый класс для сервисов симулятора.

    Attributes:
        params: Параметры физической модели.
        logger: Логгер с именем класса сервиса.
    """

    def __init__(self, params: SystemParams):
        self.params = params
        self.logger = logging.getLogger(self.__class__.__name__)
