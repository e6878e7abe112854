"""Periodic refresh managers."""

from __future__ import annotations

from itertools import product

from ..errors import BadParameter
from ..registry import Component


class AllBankRefresh(Component):
    """Inject one refresh per scope node (per rank for REFab) every interval.

    Refreshes are never postponed or coalesced: one still pending when the
    next falls due simply queues behind it.
    """

    interface = "RefreshManager"
    params = {"command": "REFab", "interval": "nREFI"}

    def bind(self, host):
        self.host = host
        spec = host.spec
        cmd = self.p["command"]
        spec.resolve_command(cmd)
        if self.p["interval"] not in spec.timing:
            raise BadParameter(f"{self.ctx.path}.interval", f"no timing value {self.p['interval']!r}")
        self.interval = spec.timing[self.p["interval"]]
        scope = min(spec.level_index[spec.scopes[cmd]], spec.bank_index)
        n_levels = len(spec.levels)
        self.targets = []
        for idx in product(*(range(spec.fanouts[lv]) for lv in spec.levels[1 : scope + 1])):
            addr = [host.channel, *idx] + [-1] * (n_levels - 1 - len(idx))
            self.targets.append(tuple(addr))
        self.next_refresh = self.interval
        self.injected = 0

    def tick(self, clk: int) -> None:
        while clk >= self.next_refresh:
            for addr in self.targets:
                self.host.inject(self.host.maintenance((self.p["command"],), addr, origin="refresh"))
                self.injected += 1
            self.next_refresh += self.interval

    def next_wakeup(self, clk: int) -> int:
        return self.next_refresh


class NoRefresh(Component):
    """Disable refresh entirely (isolated timing experiments)."""

    interface = "RefreshManager"
    params = {}
    injected = 0

    def bind(self, host):
        self.host = host

    def tick(self, clk: int) -> None:
        pass

    def next_wakeup(self, clk: int):
        return None
