"""RowHammer mitigations and the command trace recorder, as controller plugins."""

from __future__ import annotations

from .base import RowHammerPlugin
from .graphene import Graphene, MisraGriesTable
from .ideal import Ideal
from .para import PARA
from .recorder import CommandTraceRecorder, TraceSink
from .reserved import RESERVED, RESERVED_PLUGINS

MITIGATIONS = {"PARA": PARA, "Graphene": Graphene, "Ideal": Ideal}

__all__ = [
    "CommandTraceRecorder",
    "Graphene",
    "Ideal",
    "MITIGATIONS",
    "MisraGriesTable",
    "PARA",
    "RESERVED",
    "RowHammerPlugin",
    "TraceSink",
    "register",
]


def register(catalog) -> None:
    for name, cls in MITIGATIONS.items():
        catalog.register_implementation("ControllerPlugin", name, cls)
    catalog.register_implementation("ControllerPlugin", "CommandTraceRecorder", CommandTraceRecorder)
    for name, cls in RESERVED_PLUGINS.items():
        catalog.register_implementation("ControllerPlugin", name, cls)
