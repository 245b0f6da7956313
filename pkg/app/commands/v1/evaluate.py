import argparse
from pathlib import Path
from typing import List

from dishka import Container

from app.commands.base import (BaseCommand, add_policy_arguments,
                               policy_overrides, print_summary,
                               selected_policies)
from shared.core.settings import SimSettings
from shared.services.v1.simulator import ExperimentService


class EvaluateCommand(BaseCommand):
    """Оценка политик на общих зернах."""

    name = "eval"
    help = "оценить политики и записать сводку и трассы"

    def configure(self) -> None:
        add_policy_arguments(self.parser)

    def overrides(self, args: argparse.Namespace) -> List[str]:
        return super().overrides(args) + policy_overrides(args)

    def run(self, args: argparse.Namespace, settings: SimSettings, container: Container) -> int:
        service = container.get(ExperimentService)
        summary = service.evaluate(
            Path(args.out), selected_policies(args, settings), settings.run.checkpoint
        )
        print_summary(summary)
        return 0
