from .base import (BaseSimulationError, BatteryDepletedError, CheckpointError,
                   ConfigError, DomainError, InfeasibleQueueError, OutputError,
                   PreconditionError)

__all__ = [
    "BaseSimulationError",
    "BatteryDepletedError",
    "CheckpointError",
    "ConfigError",
    "DomainError",
    "InfeasibleQueueError",
    "OutputError",
    "PreconditionError",
]
