from .container import build_container

__all__ = ["build_container"]
