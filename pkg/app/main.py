"""
Главный модуль приложения.

Командная строка симулятора:
- train: обучение агента OPETRL
- eval: оценка политик
- sweep: развертка по объему данных или предельной мощности
- verify: проверки корректности
"""

import argparse
import sys
from datetime import datetime
from typing import Optional, Sequence

import pytz

from app.commands.v1 import COMMANDS
from shared.core.dependencies import build_container
from shared.core.exceptions import BaseSimulationError
from shared.core.logging import setup_logging
from shared.core.settings import get_config
from shared.services.v1.simulator import resolve_seed


def create_application() -> argparse.ArgumentParser:
    """
    Создает парсер командной строки со всеми подкомандами.
    """
    parser = argparse.ArgumentParser(
        prog="opetrl",
        description="Симулятор OPETRL: разделенный вывод на БПЛА с энергосбором",
    )
    subparsers = parser.add_subparsers(dest="subcommand", required=True)
    for command in COMMANDS:
        command(subparsers)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = create_application().parse_args(argv)
    setup_logging(args.log_level, args.log_file)
    command = args.command

    try:
        settings = get_config(args.config, command.overrides(args))
        seed = resolve_seed(settings.run.seed)
        settings = settings.model_copy(
            update={"run": settings.run.model_copy(update={"seed": seed})}
        )
        print(f"# opetrl {args.subcommand}")
        print(f"# seed: {seed}")
        print(f"# utc: {datetime.now(pytz.utc).isoformat()}")

        container = build_container(settings)
        try:
            return command.run(args, settings, container)
        finally:
            container.close()
    except BaseSimulationError as e:
        print(f"ошибка: {e.detail}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
