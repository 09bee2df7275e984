# This file makes the routers directory a Python package

from .config_router import router as config_router
from .gate_router import router as gate_router

__all__ = [
    "config_router",
    "gate_router",
]
