import argparse

from dishka import Container

from app.commands.base import BaseCommand
from shared.core.settings import SimSettings
from shared.services.v1.verification import run_checks


class VerifyCommand(BaseCommand):
    """Проверки оптимизатора, агента и среды."""

    name = "verify"
    help = "запустить проверки корректности; код 1 при провале"

    def configure(self) -> None:
        self.parser.add_argument(
            "--only", action="append", default=[], help="имя проверки (можно повторять)"
        )

    def run(self, args: argparse.Namespace, settings: SimSettings, container: Container) -> int:
        results = run_checks(settings, args.only or None)
        for result in results:
            mark = "OK  " if result.passed else "FAIL"
            print(f"{mark} {result.name} ({result.seconds:.1f} с): {result.detail}")
        failed = [r.name for r in results if not r.passed]
        print(f"пройдено {len(results) - len(failed)} из {len(results)}")
        return 1 if failed else 0
