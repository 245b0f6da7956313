import argparse
from pathlib import Path
from typing import List

from dishka import Container

from app.commands.base import BaseCommand
from shared.core.settings import SimSettings
from shared.services.v1.simulator import ExperimentService


class TrainCommand(BaseCommand):
    """Обучение агента OPETRL."""

    name = "train"
    help = "обучить агента и записать чекпоинт и кривую обучения"

    def configure(self) -> None:
        self.parser.add_argument("--episodes", type=int, help="эпизодов обучения")

    def overrides(self, args: argparse.Namespace) -> List[str]:
        result = super().overrides(args)
        if args.episodes is not None:
            result.append(f"run.episodes={args.episodes}")
        return result

    def run(self, args: argparse.Namespace, settings: SimSettings, container: Container) -> int:
        service = container.get(ExperimentService)
        result = service.train(Path(args.out))
        print(f"чекпоинт: {result.checkpoint}")
        print(f"эпизодов: {len(result.learning_curve)}, шагов обучения: {len(result.losses)}")
        if len(result.learning_curve):
            last = result.learning_curve.iloc[-1]
            print(f"последний эпизод: успех {last['success_prob']:.3f}, энергия {last['total_energy']:.4g} Дж")
        return 0
