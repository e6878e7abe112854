from . import library
from .library import ACTIONS, PREREQS
from .spec import DeviceSpec, TimingConstraint, evaluate_latency, expand_timing, refreshed_rows
from .tree import NodeTree

__all__ = [
    "ACTIONS",
    "PREREQS",
    "DeviceSpec",
    "NodeTree",
    "TimingConstraint",
    "evaluate_latency",
    "expand_timing",
    "library",
    "refreshed_rows",
]
