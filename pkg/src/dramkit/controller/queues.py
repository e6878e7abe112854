"""Bounded request buffers indexed by bank.

Within one bank, every request whose next command is the same command
becomes issuable at the same cycle (readiness is tracked at bank level or
above), and FR-FCFS would always prefer the oldest of them.  So each bank
keeps one candidate per distinct next command, and a heap orders banks by a
lower bound on when their earliest candidate could issue.

Readiness only moves later as commands issue, so a bank whose bound lies in
the future cannot have a ready candidate and is never looked at.  A bank's
candidates are recomputed from scratch only when it is touched: its state
changed, a request joined or left it, or its eligibility changed.
"""

from __future__ import annotations

from heapq import heappop, heappush
from typing import Callable, Iterable

from .request import Request


class ReqQueue:
    def __init__(self, capacity: int, name: str = "", indexed: bool = True):
        self.capacity = capacity
        self.name = name
        self.indexed = indexed
        self.items: list[Request] = []
        self._by_bank: dict[int, list[Request]] = {}
        self._cands: dict[int, list] = {}
        self._stamp: dict[int, int] = {}
        self._heap: list = []
        self._popped: list = []
        # bound by the owning controller
        self.next_ready = None
        self.target_level = None
        self.decode_bank: Callable | None = None

    def __len__(self):
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    def __bool__(self):
        return bool(self.items)

    @property
    def full(self) -> bool:
        return len(self.items) >= self.capacity

    def push(self, req: Request) -> None:
        self.items.append(req)
        peers = self._by_bank.get(req.bank)
        if peers is None:
            self._by_bank[req.bank] = [req]
        else:
            peers.append(req)
        if self.indexed:
            self._touch_one(req.bank)

    def remove(self, req: Request) -> None:
        self.items.remove(req)
        b = req.bank
        peers = self._by_bank[b]
        peers.remove(req)
        if not peers:
            del self._by_bank[b]
            self._cands.pop(b, None)
            self._stamp[b] = self._stamp.get(b, 0) + 1
        elif self.indexed:
            self._touch_one(b)

    def _touch_one(self, b: int) -> None:
        s = self._stamp.get(b, 0) + 1
        self._stamp[b] = s
        heappush(self._heap, (-1, b, s))

    def touch(self, banks: Iterable[int]) -> None:
        by_bank = self._by_bank
        stamps = self._stamp
        heap = self._heap
        for b in banks:
            if b in by_bank:
                s = stamps[b] + 1
                stamps[b] = s
                heappush(heap, (-1, b, s))

    def banks(self):
        return self._by_bank.keys()

    def in_bank(self, bank: int) -> list[Request]:
        return self._by_bank.get(bank, [])

    def candidates(self, bank: int) -> list:
        return self._cands.get(bank, [])

    def next_bound(self) -> int | None:
        """Smallest pending bound (exact after :meth:`settle`)."""
        heap = self._heap
        stamps = self._stamp
        while heap and heap[0][2] != stamps.get(heap[0][1]):
            heappop(heap)
        return heap[0][0] if heap else None

    def _bound(self, b: int) -> int | None:
        """Earliest readiness over bank ``b``'s candidates (None if none)."""
        nr = self.next_ready
        tl = self.target_level
        best = None
        for cmd, req in self._cands.get(b, ()):
            r = req.ready = nr[cmd][req.loc[tl[cmd]]]
            if best is None or r < best:
                best = r
        return best

    def _refresh(self, b: int, clk: int) -> int | None:
        cands = self.decode_bank(self, b, clk)
        if cands:
            self._cands[b] = cands
            return self._bound(b)
        self._cands.pop(b, None)
        return None

    def settle(self, clk: int) -> None:
        """Make the smallest bound exact after a cycle's issue.

        Touched banks are decoded, stale ready banks re-looked-up, and the
        heap top is refreshed until its bound is the true cycle at which one
        of its candidates becomes issuable.
        """
        heap = self._heap
        stamps = self._stamp
        still_ready = []
        while heap:
            bound, b, s = heap[0]
            if s != stamps.get(b):
                heappop(heap)
                continue
            if bound < 0:
                heappop(heap)
                r = self._refresh(b, clk)
                if r is None:
                    continue
            else:
                r = self._bound(b)
                if r == bound and r > clk:
                    break
                heappop(heap)
            if r <= clk:
                still_ready.append((r, b, s))
            else:
                heappush(heap, (r, b, s))
        for entry in still_ready:
            heappush(heap, entry)

    def collect_ready(self, clk: int) -> list[Request]:
        """Every candidate whose command is issuable at ``clk``.

        The banks examined leave the index; :meth:`restore` puts them back
        once the scheduler has chosen.
        """
        heap = self._heap
        stamps = self._stamp
        nr = self.next_ready
        tl = self.target_level
        ready = []
        popped = self._popped
        while heap and heap[0][0] <= clk:
            bound, b, s = heappop(heap)
            if s != stamps.get(b):
                continue
            if bound < 0:
                cands = self.decode_bank(self, b, clk)
                if not cands:
                    self._cands.pop(b, None)
                    continue
                self._cands[b] = cands
            else:
                cands = self._cands[b]
            best = None
            for cmd, req in cands:
                r = req.ready = nr[cmd][req.loc[tl[cmd]]]
                if r <= clk:
                    ready.append(req)
                if best is None or r < best:
                    best = r
            if best <= clk:
                popped.append((best, b, s))
            else:
                heappush(heap, (best, b, s))
        return ready

    def restore(self) -> None:
        """Return the banks taken by :meth:`collect_ready` to the index."""
        heap = self._heap
        for entry in self._popped:
            heappush(heap, entry)
        self._popped.clear()
