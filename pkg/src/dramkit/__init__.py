"""Cycle-accurate DRAM memory-system simulator."""

from __future__ import annotations

from .memsys import StatsSheet, run
from .registry import build_simulation, default_catalog, load_config

__version__ = "0.1.0"

__all__ = ["StatsSheet", "build_simulation", "default_catalog", "load_config", "run"]
