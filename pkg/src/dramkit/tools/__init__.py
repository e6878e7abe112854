"""Trace generation, command trace verification, sweeps and the CLI."""

from __future__ import annotations

from .configs import default_config, with_plugins, with_trace
from .sweep import Cell, sweep
from .tracegen import gen_trace, write_trace
from .verifier import Verifier, Violation, read_command_trace, verify_file, verify_trace

__all__ = [
    "Cell",
    "Verifier",
    "Violation",
    "default_config",
    "gen_trace",
    "read_command_trace",
    "sweep",
    "verify_file",
    "verify_trace",
    "with_plugins",
    "with_trace",
    "write_trace",
]
