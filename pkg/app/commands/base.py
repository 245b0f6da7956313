import argparse
from typing import List

import pandas as pd
from dishka import Container

from shared.core.exceptions import ConfigError
from shared.core.settings import SimSettings
from shared.schemas.v1 import Policy


class BaseCommand:
    """
    Базовый класс для всех подкоманд.

    Создает подпарсер с общими флагами и регистрирует себя обработчиком.

    Attributes:
        name (str): Имя подкоманды.
        help (str): Краткое описание для --help.
        parser (argparse.ArgumentParser): Парсер подкоманды.
    """

    name: str = ""
    help: str = ""

    def __init__(self, subparsers: "argparse._SubParsersAction"):
        self.parser = subparsers.add_parser(self.name, help=self.help)
        self.add_common_arguments()
        self.configure()
        self.parser.set_defaults(command=self)

    def add_common_arguments(self) -> None:
        self.parser.add_argument("--config", help="файл конфигурации key = value")
        self.parser.add_argument("--out", default="out", help="каталог результатов")
        self.parser.add_argument("--seed", type=int, help="главное зерно")
        self.parser.add_argument(
            "--set",
            dest="overrides",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="переопределение настройки, например system.p_max=1e-5",
        )
        self.parser.add_argument("--log-level", help="уровень логирования")
        self.parser.add_argument("--log-file", help="файл JSON-логов")

    def configure(self) -> None:
        """Переопределяется в дочерних классах для добавления флагов"""
        pass

    def overrides(self, args: argparse.Namespace) -> List[str]:
        """Переопределения настроек из флагов; флаги сильнее --set."""
        result = list(args.overrides)
        if args.seed is not None:
            result.append(f"run.seed={args.seed}")
        return result

    def run(self, args: argparse.Namespace, settings: SimSettings, container: Container) -> int:
        raise NotImplementedError


def parse_policies(value: str) -> List[Policy]:
    """Список политик из строки: имя, имена через запятую или all."""
    if value.strip().lower() == "all":
        return list(Policy)
    try:
        return [Policy(item.strip().lower()) for item in value.split(",") if item.strip()]
    except ValueError as e:
        raise ConfigError(f"неизвестная политика: {value!r}") from e


def add_policy_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--policy", help="opetrl, one_task, greedy, список через запятую или all"
    )
    parser.add_argument("--episodes", type=int, help="эпизодов оценки на точку")
    parser.add_argument("--checkpoint", help="чекпоинт агента для OPETRL")
    parser.add_argument("--workers", type=int, help="процессов для эпизодов")


def policy_overrides(args: argparse.Namespace) -> List[str]:
    result = []
    if args.episodes is not None:
        result.append(f"run.eval_episodes={args.episodes}")
    if args.checkpoint is not None:
        result.append(f"run.checkpoint={args.checkpoint}")
    if args.workers is not None:
        result.append(f"run.workers={args.workers}")
    return result


def selected_policies(args: argparse.Namespace, settings: SimSettings) -> List[Policy]:
    return parse_policies(args.policy) if args.policy else [settings.run.policy]


def print_summary(summary: pd.DataFrame) -> None:
    if summary.empty:
        print("нет строк сводки")
        return
    print(summary.to_string(index=False, float_format=lambda v: f"{v:.4g}"))
