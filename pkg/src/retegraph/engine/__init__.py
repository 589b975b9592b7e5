from .kernels import BACKEND
from .network import EngineOptions, Network

__all__ = ["Network", "EngineOptions", "BACKEND"]
