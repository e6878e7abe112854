"""Mitigation names held for techniques that do not ship.

Each would fit the plugin contract without controller changes:

- TWiCe: ``on_command_issued`` counts ACTs per row in a pruned table and
  ``on_tick`` prunes it every refresh interval; crossing the threshold
  injects victim refreshes.
- Hydra: ``on_command_issued`` updates group counters, then per-row counters
  once a group saturates; per-row counter spills would be modelled as extra
  injected reads of a reserved row.
- RRS: ``on_command_issued`` tracks hot rows; a swap is injected as
  maintenance requests that activate and precharge both rows involved.
"""

from __future__ import annotations

from ..controller.plugin import ControllerPlugin
from ..errors import BadParameter

RESERVED = ("TWiCe", "Hydra", "RRS")


def _reserved(name: str) -> type:
    def validate(cls, params: dict, path: str) -> None:
        raise BadParameter(
            f"{path}.impl",
            f"{name} is a reserved mitigation name; it has no implementation in this package "
            f"(available: PARA, Graphene, Ideal)",
        )

    return type(name, (ControllerPlugin,), {"params": {}, "validate": classmethod(validate), "__doc__": f"Reserved: {name}."})


RESERVED_PLUGINS = {name: _reserved(name) for name in RESERVED}
