import argparse
from pathlib import Path
from typing import List

from dishka import Container

from app.commands.base import (BaseCommand, add_policy_arguments,
                               policy_overrides, print_summary,
                               selected_policies)
from shared.core.exceptions import ConfigError
from shared.core.settings import SimSettings
from shared.services.v1.simulator import SWEEP_VARIABLES, ExperimentService


def parse_values(raw: str) -> List[float]:
    try:
        return [float(item) for item in raw.split(",") if item.strip()]
    except ValueError as e:
        raise ConfigError(f"значения развертки должны быть числами: {raw!r}") from e


class SweepCommand(BaseCommand):
    """Развертка по объему данных или предельной мощности."""

    name = "sweep"
    help = "развертка по raw_bits_s или p_max"

    def configure(self) -> None:
        add_policy_arguments(self.parser)
        self.parser.add_argument(
            "--sweep", dest="variable", required=True, help=f"переменная: {', '.join(SWEEP_VARIABLES)}"
        )
        self.parser.add_argument("--values", required=True, help="значения через запятую")

    def overrides(self, args: argparse.Namespace) -> List[str]:
        return super().overrides(args) + policy_overrides(args)

    def run(self, args: argparse.Namespace, settings: SimSettings, container: Container) -> int:
        values = parse_values(args.values)
        if not values:
            raise ConfigError("пустой список значений развертки")
        service = container.get(ExperimentService)
        summary = service.sweep(
            args.variable,
            values,
            Path(args.out),
            selected_policies(args, settings),
            settings.run.checkpoint,
        )
        print_summary(summary)
        return 0
