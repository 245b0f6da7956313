"""
Команды разработки, объявленные в [project.scripts].
"""

import subprocess
import sys
from typing import List

SOURCES = ["app", "shared", "scripts", "tests"]


def _run(commands: List[List[str]]) -> None:
    for command in commands:
        code = subprocess.call(command)
        if code != 0:
            sys.exit(code)


def format() -> None:
    """Форматирование кода: isort и black."""
    _run([["isort", *SOURCES], ["black", *SOURCES]])


def lint() -> None:
    """Статический анализ: flake8 и mypy."""
    _run([["flake8", *SOURCES], ["mypy", "app", "shared"]])


def test() -> None:
    """Быстрые тесты без интеграционных."""
    _run([["pytest", "-m", "not integration", *sys.argv[1:]]])


def check() -> None:
    """Полная проверка перед коммитом."""
    lint()
    _run([["pytest"]])
