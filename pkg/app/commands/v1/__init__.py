from .evaluate import EvaluateCommand
from .sweep import SweepCommand
from .train import TrainCommand
from .verify import VerifyCommand

COMMANDS = [TrainCommand, EvaluateCommand, SweepCommand, VerifyCommand]

__all__ = ["COMMANDS", "EvaluateCommand", "SweepCommand", "TrainCommand", "VerifyCommand"]
