"""Shared test plumbing: small configs and in-memory command recording."""

from __future__ import annotations

from dramkit.memsys import run
from dramkit.registry import build_simulation
from dramkit.tools.configs import default_config, with_plugins

RECORDER = {"impl": "CommandTraceRecorder"}


def config(standard="DDR4", plugins=(), seed=0, **ctrl):
    cfg = default_config(standard, plugins=plugins, seed=seed)
    cfg["MemorySystem"]["Controller"].update(ctrl)
    return cfg


def simulate(cfg, trace, record=True, **kw):
    """Run ``trace`` under ``cfg``; returns (stats, command records, graph)."""
    if record:
        cfg = with_plugins(cfg, [RECORDER])
    graph = build_simulation(cfg)
    stats = run(graph, trace, **kw)
    records = []
    if record:
        rec = graph.memory_system.controllers[0].plugins[-1]
        records = list(rec.records)
    return stats, records, graph


def commands(records, name=None):
    return [r for r in records if name is None or r[1] == name]
