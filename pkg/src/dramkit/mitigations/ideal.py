"""Exact per-row exposure tracking with an unbounded table."""

from __future__ import annotations

from ..dramspec import refreshed_rows
from .base import RowHammerPlugin


class Ideal(RowHammerPlugin):
    """Refresh a victim once its exposure reaches ``t_rh - 1 - 2 * blast_radius``.

    A row's exposure counts activations of rows within the blast radius since
    the row was last restored, by its own activation or by a periodic refresh.
    The margin below ``t_rh`` covers the activations that can still land while
    the refresh waits: at most one queued refresh of each other row within
    the radius, since regular traffic to the bank is held back meanwhile.
    """

    def bind(self, host) -> None:
        super().bind(host)
        self.trigger = max(1, self.p["t_rh"] - 1 - 2 * self.blast)
        self.exposure: dict[tuple, dict[int, int]] = {}
        self.pending: set = set()
        self.ref_counts: dict[tuple, int] = {}
        self.max_exposure = 0

    def on_activate(self, bank: tuple, row: int, clk: int, own: bool) -> None:
        ex = self.exposure.get(bank)
        if ex is None:
            ex = self.exposure[bank] = {}
        ex.pop(row, None)
        self.pending.discard((bank, row))
        for v in self.victims(row):
            e = ex.get(v, 0) + 1
            ex[v] = e
            if e > self.max_exposure:
                self.max_exposure = e
            if e >= self.trigger and (bank, v) not in self.pending:
                self.triggers += 1
                if self.refresh_row(bank, v):
                    self.pending.add((bank, v))

    def on_refresh(self, addr_vec: tuple, clk: int) -> None:
        depth = next((i for i, a in enumerate(addr_vec) if a < 0), len(addr_vec))
        prefix = addr_vec[:depth]
        n = self.ref_counts.get(prefix, 0)
        self.ref_counts[prefix] = n + 1
        rows = refreshed_rows(n, self.rows)
        for bank, ex in self.exposure.items():
            if bank[:depth] == prefix and ex:
                for r in rows:
                    ex.pop(r, None)

    def stats(self) -> dict:
        return {"max_exposure": self.max_exposure, **super().stats()}
