"""Frequent-row tracking with a Misra-Gries summary per bank."""

from __future__ import annotations

from ..errors import BadParameter
from .base import RowHammerPlugin, half


class MisraGriesTable:
    """At most ``capacity`` (row, estimate) pairs plus a spillover counter.

    A tracked row's estimate never falls below its true count, and every row
    whose true count exceeds ``N / (capacity + 1)`` after N updates is tracked.
    Counts are bucketed so the replacement step is constant time.
    """

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self.spill = 0
        self.counts: dict[int, int] = {}
        self._buckets: dict[int, dict[int, None]] = {}

    def __len__(self):
        return len(self.counts)

    def __contains__(self, row: int):
        return row in self.counts

    def get(self, row: int) -> int:
        return self.counts.get(row, 0)

    def _move(self, row: int, old: int | None, new: int) -> None:
        if old is not None:
            b = self._buckets[old]
            del b[row]
            if not b:
                del self._buckets[old]
        self._buckets.setdefault(new, {})[row] = None
        self.counts[row] = new

    def update(self, row: int) -> int:
        """Count one activation of ``row``; its estimate afterwards (0 if untracked)."""
        counts = self.counts
        c = counts.get(row)
        if c is not None:
            self._move(row, c, c + 1)
            return c + 1
        if len(counts) < self.capacity:
            self._move(row, None, self.spill + 1)
            return self.spill + 1
        spill = self.spill
        low = self._buckets.get(spill)
        if low:
            evicted = next(iter(low))
            del low[evicted]
            if not low:
                del self._buckets[spill]
            del counts[evicted]
            self._move(row, None, spill + 1)
            return spill + 1
        self.spill += 1
        return 0

    def reset_row(self, row: int) -> None:
        """Drop a row's estimate to the spillover level (never below it)."""
        c = self.counts.get(row)
        if c is not None:
            self._move(row, c, self.spill)

    def clear(self) -> None:
        self.spill = 0
        self.counts.clear()
        self._buckets.clear()


class Graphene(RowHammerPlugin):
    """Refresh an aggressor's neighbours each time its estimate reaches ceil(t_rh / 2).

    ``table_entries = 0`` sizes each bank's table so that no row can reach
    the trigger untracked within one reset window: the window admits at most
    ``reset_window / nRC`` activations per bank.  ``reset_window = 0`` means
    ``nREFI * 8192``.
    """

    params = {"t_rh": 1000, "blast_radius": 1, "table_entries": 0, "reset_window": 0}

    @classmethod
    def validate(cls, params: dict, path: str) -> None:
        super().validate(params, path)
        if params["table_entries"] < 0:
            raise BadParameter(f"{path}.table_entries", "must be >= 0 (0 = derived)")
        if params["reset_window"] < 0:
            raise BadParameter(f"{path}.reset_window", "must be >= 0 (0 = nREFI * 8192)")

    def bind(self, host) -> None:
        super().bind(host)
        t = host.spec.timing
        self.trigger = half(self.p["t_rh"])
        self.window = self.p["reset_window"] or t["nREFI"] * 8192
        entries = self.p["table_entries"]
        if not entries:
            max_acts = self.window // t["nRC"] + 1
            entries = max(1, -(-max_acts // self.trigger))
        self.entries = entries
        self.tables: dict[tuple, MisraGriesTable] = {}
        self.next_reset = self.window
        self.resets = 0

    def _roll(self, clk: int) -> None:
        if clk >= self.next_reset:
            for table in self.tables.values():
                table.clear()
            self.resets += (clk - self.next_reset) // self.window + 1
            self.next_reset += ((clk - self.next_reset) // self.window + 1) * self.window

    def on_tick(self, clk: int) -> None:
        self._roll(clk)

    def next_wakeup(self, clk: int):
        return self.next_reset

    def on_activate(self, bank: tuple, row: int, clk: int, own: bool) -> None:
        self._roll(clk)
        table = self.tables.get(bank)
        if table is None:
            table = self.tables[bank] = MisraGriesTable(self.entries)
        if table.update(row) >= self.trigger:
            table.reset_row(row)
            self.refresh_victims(bank, row)

    def stats(self) -> dict:
        return {"table_entries": self.entries, "window_resets": self.resets, **super().stats()}
