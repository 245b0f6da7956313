from .simulation import SimulationProvider

__all__ = ["SimulationProvider"]
