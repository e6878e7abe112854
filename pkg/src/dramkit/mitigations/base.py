"""Shared plumbing for RowHammer mitigations.

A preventive refresh of a victim row is an injected maintenance request that
activates then precharges that row; activating a row restores its charge, so
the device needs no new command.  Every activation the plugin sees, its own
included, counts as a real activation.
"""

from __future__ import annotations

import math

from ..controller.plugin import ControllerPlugin
from ..errors import BadParameter


class RowHammerPlugin(ControllerPlugin):
    params = {"t_rh": 1000, "blast_radius": 1}

    @classmethod
    def validate(cls, params: dict, path: str) -> None:
        if params["t_rh"] < 1:
            raise BadParameter(f"{path}.t_rh", "must be >= 1")
        if params["blast_radius"] < 1:
            raise BadParameter(f"{path}.blast_radius", "must be >= 1")

    @classmethod
    def for_threshold(cls, t_rh: int) -> dict:
        """Parameters that configure this mitigation for threshold ``t_rh``."""
        return {"t_rh": t_rh}

    def bind(self, host) -> None:
        super().bind(host)
        spec = host.spec
        self.name = type(self).__name__
        self.activates = frozenset(spec.command_index[c] for c in spec.commands_of("opens_row"))
        self.refreshes = frozenset(spec.command_index[c] for c in spec.commands_of("refresh"))
        self.refresh_cmds = (spec.commands_of("opens_row")[0], spec.commands_of("closes_row")[0])
        self.row_index = spec.row_index
        self.rows = spec.rows
        self.tail = (-1,) * (len(spec.levels) - spec.row_index - 1)
        self.blast = self.p.get("blast_radius", 1)
        self._own: dict[tuple, int] = {}
        self.injected = 0
        self.triggers = 0
        self.dropped = 0

    def victims(self, row: int) -> list[int]:
        """Rows within the blast radius of ``row``, clamped to the bank."""
        b = self.blast
        return [v for v in range(max(0, row - b), min(self.rows, row + b + 1)) if v != row]

    def refresh_row(self, bank: tuple, row: int) -> bool:
        req = self.host.maintenance(self.refresh_cmds, bank + (row,) + self.tail, origin=self.name)
        if not self.host.inject(req):
            self.dropped += 1
            return False
        key = (bank, row)
        self._own[key] = self._own.get(key, 0) + 1
        self.injected += 1
        return True

    def refresh_victims(self, bank: tuple, row: int) -> None:
        self.triggers += 1
        for v in self.victims(row):
            self.refresh_row(bank, v)

    def on_command_issued(self, cmd: int, addr_vec: tuple, clk: int) -> None:
        if cmd in self.activates:
            ri = self.row_index
            bank = addr_vec[:ri]
            row = addr_vec[ri]
            own = self._own
            key = (bank, row)
            n = own.get(key)
            if n:
                if n == 1:
                    del own[key]
                else:
                    own[key] = n - 1
            self.on_activate(bank, row, clk, bool(n))
        elif cmd in self.refreshes:
            self.on_refresh(addr_vec, clk)

    def on_activate(self, bank: tuple, row: int, clk: int, own: bool) -> None:
        pass

    def on_refresh(self, addr_vec: tuple, clk: int) -> None:
        pass

    def next_wakeup(self, clk: int):
        return None

    def stats(self) -> dict:
        return {"triggers": self.triggers, "injected": self.injected, "dropped": self.dropped}


def half(t_rh: int) -> int:
    return math.ceil(t_rh / 2)
