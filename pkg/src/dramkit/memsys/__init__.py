from .frontend import TraceFrontend
from .mapper import MAPPERS, BitSliceMapper, ChRaBaRoCo, RoBaRaCoCh, make_mapper
from .system import GenericMemorySystem, StatsSheet, run
from .trace import TraceEntry, format_entry, iter_lines, parse_line, read_trace

__all__ = [
    "BitSliceMapper",
    "ChRaBaRoCo",
    "GenericMemorySystem",
    "MAPPERS",
    "RoBaRaCoCh",
    "StatsSheet",
    "TraceEntry",
    "TraceFrontend",
    "format_entry",
    "iter_lines",
    "make_mapper",
    "parse_line",
    "read_trace",
    "register",
    "run",
]


def register(catalog) -> None:
    for name, cls in (
        ("GenericMemorySystem", GenericMemorySystem),
        ("TraceFrontend", TraceFrontend),
        ("RoBaRaCoCh", RoBaRaCoCh),
        ("ChRaBaRoCo", ChRaBaRoCo),
    ):
        catalog.register_implementation(cls.interface, name, cls)
