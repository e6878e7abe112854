"""Lookup-table state machine over the channel/rank/bankgroup/bank hierarchy.

Nodes are stored flat, level by level, in mixed-radix order so that the
descendants of any node at any deeper level form one contiguous index range.
Per-command readiness lives at the command's readiness-target level only:
issuing a command raises ``next_ready[following][...]`` for every target node
below (or beside, for sibling constraints) the constrained node, so a
readiness query is a single list lookup.
"""

from __future__ import annotations

from collections import deque
from typing import Sequence

from ..errors import NoPathToCommand, ProtocolViolation
from .spec import DeviceSpec


class NodeTree:
    def __init__(self, spec: DeviceSpec):
        self.spec = spec
        self.ids = spec.ids
        n_levels = len(spec.node_levels)
        self.n_node_levels = n_levels
        self.bank_level = spec.bank_index
        self.row_level = spec.row_index
        self.fan = [spec.fanouts[lv] for lv in spec.node_levels]
        self.count = []
        total = 1
        for f in self.fan:
            total *= f
            self.count.append(total)
        n_banks = self.count[-1]
        self.n_banks = n_banks

        cmds = spec.commands
        self.scope_level = [min(spec.level_index[spec.scopes[c]], self.bank_level) for c in cmds]
        self.target_level = [spec.level_index[spec.targets[c]] for c in cmds]

        self.open_row = [-1] * n_banks
        self.row_accesses = [0] * n_banks
        self._alias = self._aliases()
        rows = {}
        for c, t in enumerate(self.target_level):
            rep = self._alias[c]
            if rep not in rows:
                rows[rep] = [0] * self.count[t]
        # commands constrained identically share one readiness row
        self.next_ready = [rows[self._alias[c]] for c in range(len(cmds))]
        self._history: dict[tuple[int, int], deque] = {}

        self._preq = [None] * len(cmds)
        for (lv, c), fn in spec.prereqs.items():
            self._preq[spec.command_index[c]] = fn
        self._action = [None] * len(cmds)
        for (lv, c), fn in spec.actions.items():
            self._action[spec.command_index[c]] = fn
        self._max_chain = len(spec.states) + 1
        self._plan = self._compile_plan()

    # -- layout helpers ----------------------------------------------------------

    def span(self, upper: int, lower: int) -> int:
        """Number of level-``lower`` nodes under one level-``upper`` node."""
        n = 1
        for lv in range(upper + 1, lower + 1):
            n *= self.fan[lv]
        return n

    def locate(self, addr: Sequence[int]) -> tuple[int, ...]:
        """Flat node id at every node level for an address vector.

        A -1 (a level below the command's scope) stands for the first child;
        commands never consult levels below their scope.
        """
        loc = []
        flat = 0
        for lv, f in enumerate(self.fan):
            a = addr[lv]
            if a == -1:
                a = 0
            elif not 0 <= a < f:
                raise IndexError(f"address index {a} out of range at level {self.spec.levels[lv]}")
            flat = flat * f + a
            loc.append(flat)
        return tuple(loc)

    def banks_under(self, level: int, loc: Sequence[int]) -> tuple[int, int]:
        n = self.span(level, self.bank_level)
        lo = loc[level] * n
        return lo, lo + n

    def _aliases(self) -> list[int]:
        """Map each command to the first command with identical incoming constraints."""
        spec = self.spec
        li, ci = spec.level_index, spec.command_index
        incoming: list[list] = [[] for _ in spec.commands]
        for cid, (c, lat) in enumerate(zip(spec.constraints, spec.latencies)):
            for prev in c.preceding:
                for nxt in c.following:
                    key = cid if c.window > 1 else None
                    incoming[ci[nxt]].append((ci[prev], li[c.level], c.sibling, c.window, key, lat))
        first: dict = {}
        alias = []
        for c, entries in enumerate(incoming):
            sig = (self.target_level[c], tuple(sorted(entries, key=repr)))
            alias.append(first.setdefault(sig, c))
        return alias

    def _compile_plan(self):
        """Per issued command: a list of propagation steps.

        Each step is ``(level, sibling, window, history_key, updates)`` where
        ``updates`` is a list of ``(following, latency, target_level, span)``.
        Consecutive-pair entries sharing (level, sibling) are merged keeping
        the maximum latency per following command.
        """
        spec = self.spec
        li, ci = spec.level_index, spec.command_index
        plan = [[] for _ in spec.commands]
        for cid, (c, lat) in enumerate(zip(spec.constraints, spec.latencies)):
            lv = li[c.level]
            for prev in c.preceding:
                steps = plan[ci[prev]]
                if c.window > 1:
                    key = cid
                    step = None
                else:
                    key = None
                    step = next((s for s in steps if s[0] == lv and s[1] == c.sibling and s[2] == 1), None)
                if step is None:
                    step = (lv, c.sibling, c.window, key, {})
                    steps.append(step)
                merged = step[4]
                for nxt in c.following:
                    f = ci[nxt]
                    merged[f] = max(merged.get(f, 0), lat)
        compiled = []
        for steps in plan:
            self._prune(steps)
            out = []
            for lv, sib, window, key, merged in steps:
                if not merged or (sib and self.fan[lv] == 1):
                    continue
                updates = []
                for f, lat in sorted(merged.items()):
                    if self._alias[f] != f:
                        continue
                    t = self.target_level[f]
                    updates.append((f, lat, t, self.span(lv, t)))
                out.append((lv, sib, window, key, tuple(updates)))
            compiled.append(tuple(out))
        return compiled

    def _prune(self, steps):
        """Drop consecutive-pair updates that another step always dominates.

        A step at an ancestor level covers a superset of the target nodes, so
        a descendant update with a latency no larger is redundant; when the
        two ranges coincide (all fanouts in between are 1) the smaller of the
        two is redundant either way.
        """
        plain = sorted((s for s in steps if not s[1] and s[2] == 1), key=lambda s: s[0])
        for i, (lv_hi, _, _, _, upper) in enumerate(plain):
            for lv_lo, _, _, _, lower in plain[i + 1 :]:
                same_range = self.span(lv_hi, lv_lo) == 1
                for f in list(lower):
                    if f not in upper:
                        continue
                    if upper[f] >= lower[f]:
                        del lower[f]
                    elif same_range:
                        del upper[f]

    # -- queries (pure) ----------------------------------------------------------

    def ready_at(self, cmd: int, loc: Sequence[int]) -> int:
        return self.next_ready[cmd][loc[self.target_level[cmd]]]

    def check_ready(self, cmd: int, addr: Sequence[int], clk: int) -> bool:
        loc = self.locate(addr)
        return self.next_ready[cmd][loc[self.target_level[cmd]]] <= clk

    def preq(self, cmd: int, loc: Sequence[int], addr: Sequence[int]) -> int:
        """Immediately issuable command on the way to ``cmd`` (state only)."""
        preq = self._preq
        fn = preq[cmd]
        if fn is None:
            return cmd
        nxt = fn(self, cmd, loc, addr)
        if nxt == cmd:
            return cmd
        for _ in range(self._max_chain):
            fn = preq[nxt]
            if fn is None:
                return nxt
            again = fn(self, nxt, loc, addr)
            if again == nxt:
                return nxt
            nxt = again
        raise NoPathToCommand(
            f"no issuable command leads to {self.spec.commands[cmd]} within {self._max_chain} steps"
        )

    def prerequisite(self, cmd: int, addr: Sequence[int], clk: int = 0) -> int:
        return self.preq(cmd, self.locate(addr), addr)

    def state_of(self, level: int, addr: Sequence[int]) -> tuple[str, int | None]:
        """Named state of a node: ``("Opened", row)``, ``("Closed", None)`` or ``("PoweredUp", None)``."""
        if level < self.bank_level:
            return "PoweredUp", None
        row = self.open_row[self.locate(addr)[self.bank_level]]
        return ("Closed", None) if row < 0 else ("Opened", row)

    # -- updates -----------------------------------------------------------------

    def issue(self, cmd: int, addr: Sequence[int], clk: int) -> None:
        """Issue ``cmd`` after checking that it is both state-legal and timing-ready."""
        loc = self.locate(addr)
        if self.preq(cmd, loc, addr) != cmd:
            raise ProtocolViolation(f"{self.spec.commands[cmd]} at {tuple(addr)} is not state-legal at {clk}")
        ready = self.ready_at(cmd, loc)
        if ready > clk:
            raise ProtocolViolation(f"{self.spec.commands[cmd]} at {tuple(addr)} issued at {clk}, ready at {ready}")
        self.apply(cmd, loc, addr, clk)

    def apply(self, cmd: int, loc: Sequence[int], addr: Sequence[int], clk: int) -> None:
        """Unchecked issue: run the action and propagate timing."""
        action = self._action[cmd]
        if action is not None:
            action(self, cmd, loc, addr, clk)
        nr = self.next_ready
        for lv, sibling, window, key, updates in self._plan[cmd]:
            node = loc[lv]
            base = clk
            if window > 1:
                hkey = (key, node)
                hist = self._history.get(hkey)
                if hist is None:
                    hist = self._history[hkey] = deque(maxlen=window)
                hist.append(clk)
                if len(hist) < window:
                    continue
                base = hist[0]
            if sibling:
                fan = self.fan[lv]
                first = (node // fan) * fan
                for f, lat, _t, span in updates:
                    v = base + lat
                    row = nr[f]
                    _raise(row, first * span, node * span, v)
                    _raise(row, (node + 1) * span, (first + fan) * span, v)
                continue
            for f, lat, _t, span in updates:
                v = base + lat
                row = nr[f]
                if span == 1:
                    if row[node] < v:
                        row[node] = v
                else:
                    lo = node * span
                    hi = lo + span
                    seg = row[lo:hi]
                    if max(seg) <= v:
                        row[lo:hi] = [v] * span
                    else:
                        row[lo:hi] = [x if x > v else v for x in seg]

    def snapshot(self):
        """Hashable copy of all mutable state (used by purity checks)."""
        return (
            tuple(self.open_row),
            tuple(self.row_accesses),
            tuple(tuple(r) for r in self.next_ready),
            tuple(sorted((k, tuple(v)) for k, v in self._history.items())),
        )


def _raise(row: list, lo: int, hi: int, v: int) -> None:
    if hi - lo == 1:
        if row[lo] < v:
            row[lo] = v
    elif hi > lo:
        row[lo:hi] = [x if x > v else v for x in row[lo:hi]]
