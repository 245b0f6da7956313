# Импортируем проверки для их регистрации
from . import checks, trends
from .registry import CheckResult, checks as registered_checks, register_check, run_checks

__all__ = ["CheckResult", "register_check", "registered_checks", "run_checks"]
