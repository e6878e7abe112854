"""Trace-driven request frontend."""

from __future__ import annotations

from typing import Iterable

from ..controller.request import READ, WRITE, Request
from ..registry import Component
from .trace import TraceEntry, parse_line, read_trace


class TraceFrontend(Component):
    """Offer one trace entry per cycle, spaced by the entries' bubble counts.

    The first entry is offered at its own bubble count; every later one
    ``max(bubbles, 1)`` cycles after the previous acceptance.  The frontend
    ticks after the memory system each cycle.  A rejected entry is retried
    on every cycle the simulation executes, which is exact because queue
    space only frees up on cycles that issue a command, and the frontend
    sees that space on the same cycle.
    """

    interface = "Frontend"
    params = {"path": ""}

    def __init__(self, params, ctx):
        super().__init__(params, ctx)
        self._source = None
        self.memsys = None
        self._reset()
        if params["path"]:
            self.set_trace(params["path"])

    def _reset(self):
        self.pending: TraceEntry | None = None
        self.next_offer = 0
        self.blocked = False
        self.exhausted = self._source is None
        self.accepted = 0
        self.completed = 0
        self.stalled = 0
        self._first = True
        self._req = None

    def attach(self, memsys) -> None:
        self.memsys = memsys

    def set_trace(self, trace) -> None:
        """Use a trace file path, or an iterable of entries or text lines."""
        if isinstance(trace, (str, bytes)) or hasattr(trace, "__fspath__"):
            self._source = iter(read_trace(trace))
        else:
            self._source = iter(_entries(trace))
        self._reset()
        self._load()

    def _load(self) -> None:
        entry = next(self._source, None)
        if entry is None:
            self.pending = None
            self.exhausted = True
            return
        self.pending = entry
        self.exhausted = False

    def tick(self, clk: int) -> None:
        entry = self.pending
        if entry is None:
            return
        if self._first:
            self._first = False
            self.next_offer = entry.bubbles
        if clk < self.next_offer:
            return
        req = self._req
        if req is None:
            req = self._req = Request(WRITE if entry.is_write else READ, raw_addr=entry.addr, callback=self._on_complete)
        if self.memsys.send(req, clk):
            self._req = None
            self.accepted += 1
            self.blocked = False
            self._load()
            if self.pending is not None:
                self.next_offer = clk + max(self.pending.bubbles, 1)
        elif not self.blocked:
            self.blocked = True
            self.stalled += 1

    def _on_complete(self, req: Request) -> None:
        self.completed += 1

    def next_wakeup(self, clk: int) -> int | None:
        if self.pending is None:
            return None
        if self.blocked:
            # retried on every executed cycle; room only appears on cycles
            # that issue a command, and those are always executed
            return None
        if self._first:
            return max(self.pending.bubbles, clk + 1)
        return max(self.next_offer, clk + 1)

    @property
    def done(self) -> bool:
        return self.exhausted and self.completed == self.accepted


def _entries(items: Iterable):
    for lineno, item in enumerate(items, 1):
        if isinstance(item, TraceEntry):
            yield item
        elif isinstance(item, str):
            entry = parse_line(item, lineno)
            if entry is not None:
                yield entry
        else:
            yield TraceEntry(*item)
