"""Row-buffer management policies."""

from __future__ import annotations

from ..registry import Component


class OpenRowPolicy(Component):
    """Leave the row open after a column access."""

    interface = "RowPolicy"
    params = {}
    uses_demand = False

    def bind(self, spec):
        self.spec = spec

    def adjust(self, cmd: int, req, demand: int) -> int:
        return cmd


class ClosedRowPolicy(OpenRowPolicy):
    """Auto-precharge a column access when no other queued request wants the row.

    ``demand`` is the number of queued requests (including ``req``) that
    target the same bank and row.
    """

    uses_demand = True

    def bind(self, spec):
        super().bind(spec)
        self._auto = [-1] * len(spec.commands)
        for plain, auto in spec.autoprecharge.items():
            self._auto[spec.command_index[plain]] = spec.command_index[auto]

    def adjust(self, cmd: int, req, demand: int) -> int:
        auto = self._auto[cmd]
        if auto >= 0 and demand <= 1:
            return auto
        return cmd
