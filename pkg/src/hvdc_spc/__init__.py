"""Co-optimisation of energy and frequency reserves across HVDC-coupled areas."""

from .system import SystemSpec, load_system, save_system, validate
from .metrics import AreaAggregates, FrequencyMetrics, aggregate_area

__version__ = "0.1.0"

__all__ = [
    "SystemSpec",
    "load_system",
    "save_system",
    "validate",
    "AreaAggregates",
    "FrequencyMetrics",
    "aggregate_area",
]
