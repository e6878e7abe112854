"""Independent command trace checker.

Shares only the device data (levels, fanouts, command scopes and kinds, the
constraint records and timing values) with the simulator.  Timing is checked
pairwise: each command is compared against every earlier command that a
constraint names as its predecessor on the same node (or a sibling node) and
that is still within the constraint's latency.  State is checked by replaying
each bank as Closed or Opened(row).
"""

from __future__ import annotations

import csv
import re
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

from ..errors import ParseError

TIMING = "timing"
STATE = "state"
BUS = "bus"


@dataclass(frozen=True)
class Violation:
    line: int
    clk: int
    command: str
    addr_vec: tuple
    kind: str
    prev_command: str = ""
    prev_clk: int = -1
    prev_line: int = -1
    required_gap: int = 0
    actual_gap: int = 0
    expected_state: str = ""
    actual_state: str = ""
    rule: str = ""

    def __str__(self) -> str:
        where = f"line {self.line}: {self.command}@{self.clk} {list(self.addr_vec)}"
        cite = f"{self.prev_command}@{self.prev_clk} (line {self.prev_line})" if self.prev_line >= 0 else "initial state"
        if self.kind == STATE:
            return f"{where}: state violation, expected {self.expected_state}, found {self.actual_state} after {cite}"
        return (
            f"{where}: {self.kind} violation after {cite}, "
            f"gap {self.actual_gap} < {self.required_gap} [{self.rule}]"
        )


_TERM = re.compile(r"\s*([+-]?)\s*([A-Za-z_][A-Za-z0-9_]*|\d+)\s*")


def _latency(expr, timing) -> int:
    if isinstance(expr, int):
        return expr
    total, pos, text = 0, 0, str(expr).strip()
    first = True
    while pos < len(text):
        m = _TERM.match(text, pos)
        if not m or (not first and not m.group(1)):
            raise ValueError(f"cannot evaluate latency {expr!r}")
        name = m.group(2)
        value = int(name) if name.isdigit() else int(timing[name])
        total += -value if m.group(1) == "-" else value
        pos = m.end()
        first = False
    return total


class _Rule:
    __slots__ = ("plen", "sibling", "prev", "latency", "window", "label")

    def __init__(self, plen, sibling, prev, latency, window, label):
        self.plen = plen
        self.sibling = sibling
        self.prev = prev
        self.latency = latency
        self.window = window
        self.label = label


class Verifier:
    def __init__(self, spec):
        self.spec = spec
        self.levels = tuple(spec.levels)
        self.fanouts = [spec.fanouts[lv] for lv in self.levels]
        index = {lv: i for i, lv in enumerate(self.levels)}
        self.depth = {c: index[spec.scopes[c]] for c in spec.commands}
        self.kinds = {c: frozenset(spec.kinds[c]) for c in spec.commands}
        self.row_index = index[spec.row_level]
        self.rules: dict[str, list[_Rule]] = {c: [] for c in spec.commands}
        # (command, prefix length, sibling) -> longest latency that command must be remembered for
        self.keep: dict[tuple, int] = {}
        for con in spec.constraints:
            lv = index[con.level]
            lat = _latency(con.latency, spec.timing)
            label = f"{con.level}: {'/'.join(con.preceding)} -> {'/'.join(con.following)} >= {con.latency}"
            if con.window > 1:
                label += f" over {con.window}"
            if con.sibling:
                label = "sibling " + label
            plen = lv if con.sibling else lv + 1
            for p in con.preceding:
                for n in con.following:
                    if min(self.depth[p], self.depth[n]) < lv:
                        raise ValueError(f"constraint {label} names a command addressed above {con.level}")
                    self.rules[n].append(_Rule(plen, con.sibling, p, lat, con.window, label))
                key = (p, plen, con.sibling)
                self.keep[key] = max(self.keep.get(key, 0), lat)
        self.store = {c: [(plen, sib, depth) for (p, plen, sib), depth in self.keep.items() if p == c] for c in spec.commands}

    def check(self, records: Iterable[tuple]) -> list[Violation]:
        """``records`` yields ``(line, clk, cmd, addr_vec)`` sorted by clk."""
        out: list[Violation] = []
        hist: dict[tuple, deque] = {}
        open_rows: dict[tuple, tuple] = {}  # bank prefix -> (row, line, clk, cmd)
        last_close: dict[tuple, tuple] = {}  # bank prefix -> (line, clk, cmd) of the closing command
        bus: dict[int, tuple] = {}
        ri = self.row_index
        rules = self.rules
        store = self.store
        kinds = self.kinds
        depth = self.depth
        prev_clk = None
        for line, clk, cmd, addr in records:
            if prev_clk is not None and clk < prev_clk:
                raise ParseError(line, f"records out of order ({clk} after {prev_clk})")
            prev_clk = clk
            ch = addr[0]
            last = bus.get(ch)
            if last is not None and last[1] == clk:
                out.append(Violation(line, clk, cmd, addr, BUS, last[2], last[1], last[0], 1, 0, rule="one command per channel per cycle"))
            bus[ch] = (line, clk, cmd)

            for rule in rules[cmd]:
                plen = rule.plen
                dq = hist.get((rule.prev, plen, rule.sibling, addr[:plen]))
                if not dq:
                    continue
                cut = clk - rule.latency
                if rule.sibling:
                    node = addr[plen]
                    hits = [e for e in dq if e[0] > cut and e[2] != node]
                else:
                    hits = [e for e in dq if e[0] > cut]
                if len(hits) >= rule.window:
                    first = hits[0]
                    out.append(
                        Violation(line, clk, cmd, addr, TIMING, rule.prev, first[0], first[1],
                                  rule.latency, clk - first[0], rule=rule.label)
                    )

            self._state(line, clk, cmd, addr, kinds[cmd], depth[cmd], ri, open_rows, last_close, out)

            for plen, sib, keep in store[cmd]:
                key = (cmd, plen, sib, addr[:plen])
                dq = hist.get(key)
                if dq is None:
                    dq = hist[key] = deque()
                old = clk - keep
                while dq and dq[0][0] <= old:
                    dq.popleft()
                dq.append((clk, line, addr[plen] if sib else 0))
        return out

    def _state(self, line, clk, cmd, addr, kinds, depth, ri, open_rows, last_close, out) -> None:
        if depth >= ri - 1:
            bank = addr[:ri]
            cur = open_rows.get(bank)
            if "opens_row" in kinds:
                if cur is not None:
                    out.append(self._state_violation(line, clk, cmd, addr, "Closed", f"Opened({cur[0]})", cur[1:]))
                open_rows[bank] = (addr[ri], line, clk, cmd)
                return
            if "read" in kinds or "write" in kinds:
                row = addr[ri]
                if cur is None:
                    closer = last_close.get(bank, (-1, -1, ""))
                    out.append(self._state_violation(line, clk, cmd, addr, f"Opened({row})", "Closed", closer))
                elif cur[0] != row:
                    out.append(self._state_violation(line, clk, cmd, addr, f"Opened({row})", f"Opened({cur[0]})", cur[1:]))
            if "closes_row" in kinds:
                open_rows.pop(bank, None)
                last_close[bank] = (line, clk, cmd)
            return
        # commands addressed above a bank act on every bank beneath them
        prefix = addr[: depth + 1]
        n = depth + 1
        under = [b for b in open_rows if b[:n] == prefix]
        if "refresh" in kinds:
            for b in sorted(under, key=lambda b: open_rows[b][1]):
                cur = open_rows[b]
                out.append(self._state_violation(line, clk, cmd, addr, "Closed", f"Opened({cur[0]}) in bank {list(b)}", cur[1:]))
                break
        if "closes_all" in kinds or "refresh" in kinds:
            for b in under:
                del open_rows[b]
                last_close[b] = (line, clk, cmd)

    @staticmethod
    def _state_violation(line, clk, cmd, addr, expected, actual, cite) -> Violation:
        pl, pc, pcmd = cite
        return Violation(line, clk, cmd, addr, STATE, pcmd, pc, pl, expected_state=expected, actual_state=actual)


def read_command_trace(path, spec) -> Iterator[tuple]:
    """Yield ``(line, clk, cmd, addr_vec)`` from a recorder CSV, validating every field."""
    levels = tuple(spec.levels)
    fanouts = [spec.fanouts[lv] for lv in levels]
    index = {lv: i for i, lv in enumerate(levels)}
    depth = {c: index[spec.scopes[c]] for c in spec.commands}
    n = len(levels)
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        expected = ["clk", "cmd", *levels]
        if header != expected:
            raise ParseError(1, f"header must be {','.join(expected)}", str(path))
        for row in reader:
            line = reader.line_num
            if not row:
                continue
            if len(row) != n + 2:
                raise ParseError(line, f"expected {n + 2} fields, got {len(row)}", str(path))
            cmd = row[1]
            d = depth.get(cmd)
            if d is None:
                raise ParseError(line, f"unknown command {cmd!r}", str(path))
            try:
                clk = int(row[0])
                addr = tuple(int(x) for x in row[2:])
            except ValueError:
                raise ParseError(line, "non-integer field", str(path)) from None
            if clk < 0:
                raise ParseError(line, "negative clk", str(path))
            for i, a in enumerate(addr):
                if i <= d:
                    if not 0 <= a < fanouts[i]:
                        raise ParseError(line, f"{levels[i]} {a} out of range", str(path))
                elif a != -1:
                    raise ParseError(line, f"{levels[i]} must be -1 below the {cmd} scope", str(path))
            yield line, clk, cmd, addr


def verify_trace(spec, records: Iterable) -> list[Violation]:
    """Check ``records`` of ``(clk, cmd, addr_vec)`` or ``(line, clk, cmd, addr_vec)``."""
    def numbered():
        for i, r in enumerate(records, start=2):
            yield r if len(r) == 4 else (i, *r)

    return Verifier(spec).check(numbered())


def verify_file(spec, path) -> list[Violation]:
    return Verifier(spec).check(read_command_trace(Path(path), spec))
