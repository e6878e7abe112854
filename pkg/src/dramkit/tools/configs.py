"""Ready-made simulation configs."""

from __future__ import annotations

import copy
from typing import Iterable, Mapping


def default_config(standard: str = "DDR4", trace: str = "", plugins: Iterable[Mapping] = (), seed: int = 0) -> dict:
    """One channel of ``standard`` behind an FR-FCFS open-row controller with all-bank refresh."""
    return {
        "seed": seed,
        "Frontend": {"impl": "TraceFrontend", "path": str(trace)},
        "MemorySystem": {
            "impl": "GenericMemorySystem",
            "DRAM": {"impl": standard},
            "AddrMapper": {"impl": "RoBaRaCoCh"},
            "Controller": {
                "impl": "GenericController",
                "Scheduler": {"impl": "FRFCFS"},
                "RefreshManager": {"impl": "AllBankRefresh"},
                "RowPolicy": {"impl": "OpenRowPolicy"},
                "plugins": [dict(p) for p in plugins],
            },
        },
    }


def with_plugins(config: Mapping, plugins: Iterable[Mapping]) -> dict:
    """A copy of ``config`` with ``plugins`` appended to the controller's plugin list."""
    out = copy.deepcopy(dict(config))
    ctrl = out.setdefault("MemorySystem", {}).setdefault("Controller", {})
    ctrl["plugins"] = list(ctrl.get("plugins") or []) + [dict(p) for p in plugins]
    return out


def with_trace(config: Mapping, trace) -> dict:
    out = copy.deepcopy(dict(config))
    out.setdefault("Frontend", {"impl": "TraceFrontend"})["path"] = str(trace)
    return out
