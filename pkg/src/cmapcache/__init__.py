"""Coded caching for multi-access systems with private caches, intersection class."""

from .bounds import rate_report, theorem2_rate, theorem2_transmission_count
from .delivery import DemandVector, Transmission, run_delivery
from .model import OutOfClassError, ParamError, SystemParams, derive_params, intersection_class_check
from .placement import build_layout

__all__ = [
    "DemandVector", "OutOfClassError", "ParamError", "SystemParams", "Transmission",
    "build_layout", "derive_params", "intersection_class_check", "rate_report",
    "run_delivery", "theorem2_rate", "theorem2_transmission_count",
]
__version__ = "0.1.0"
