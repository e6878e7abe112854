"""Declarative DRAM device specifications.

A :class:`DeviceSpec` names levels, commands, states and timing constraints
by string.  Construction validates every name once and resolves it to an
integer index; everything downstream (the node tree, the controller) works on
those integers only.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from types import SimpleNamespace
from typing import Callable, Iterable, Mapping

import yaml

from ..errors import BadParameter, SpecError, UnknownName
from . import library

KINDS = frozenset({"opens_row", "closes_row", "closes_all", "refresh", "read", "write"})
_EXCLUSIVE_KINDS = ("opens_row", "closes_row", "closes_all")


@dataclass(frozen=True)
class TimingConstraint:
    """Minimum gap between any ``preceding`` and any ``following`` command.

    ``latency`` is an int or an expression over timing symbols such as
    ``"nCL + nBL + 2 - nCWL"``.  With ``window > 1`` the gap is measured from
    the ``window``-th most recent preceding command (four-activation window).
    ``sibling`` applies the gap between distinct nodes sharing a parent.
    """

    level: str
    preceding: tuple[str, ...]
    following: tuple[str, ...]
    latency: int | str
    window: int = 1
    sibling: bool = False

    def __post_init__(self):
        object.__setattr__(self, "preceding", tuple(self.preceding))
        object.__setattr__(self, "following", tuple(self.following))

    def to_dict(self) -> dict:
        d = {
            "level": self.level,
            "preceding": list(self.preceding),
            "following": list(self.following),
            "latency": self.latency,
        }
        if self.window != 1:
            d["window"] = self.window
        if self.sibling:
            d["sibling"] = True
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "TimingConstraint":
        return cls(
            level=d["level"],
            preceding=tuple(d["preceding"]),
            following=tuple(d["following"]),
            latency=d["latency"],
            window=d.get("window", 1),
            sibling=d.get("sibling", False),
        )


_TOKEN = re.compile(r"\s*([+-])\s*")


def evaluate_latency(expr: int | str, values: Mapping[str, int]) -> int:
    """Evaluate a ``+``/``-`` expression over integer literals and timing symbols."""
    if isinstance(expr, int):
        return expr
    parts = _TOKEN.split(expr.strip())
    total = 0
    sign = 1
    for i, tok in enumerate(parts):
        if i % 2:
            sign = 1 if tok == "+" else -1
            continue
        tok = tok.strip()
        if not tok:
            raise SpecError(f"malformed latency expression {expr!r}")
        if tok.lstrip("-").isdigit():
            total += sign * int(tok)
        elif tok in values:
            total += sign * int(values[tok])
        else:
            raise UnknownName("timing symbol", tok, sorted(values))
    return total


def expand_timing(
    constraints: Iterable[TimingConstraint],
    *,
    levels: Iterable[str],
    commands: Iterable[str],
    timing: Mapping[str, int],
) -> dict[tuple[str, str, str], list[tuple[int, int, bool]]]:
    """Expand permutation records into ``(level, prev, next) -> [(latency, window, sibling)]``.

    Every record contributes one entry per (preceding, following) pair; when
    several records name the same pair, all of them are kept.
    """
    levels = set(levels)
    commands = set(commands)
    table: dict[tuple[str, str, str], list[tuple[int, int, bool]]] = {}
    for c in constraints:
        if c.level not in levels:
            raise UnknownName("level", c.level, sorted(levels))
        latency = evaluate_latency(c.latency, timing)
        if latency < 1 or c.window < 1:
            raise BadParameter(
                f"timing[{c.level}:{','.join(c.preceding)}->{','.join(c.following)}]",
                f"latency and window must be >= 1 (got {latency}, {c.window})",
            )
        for prev in c.preceding:
            if prev not in commands:
                raise UnknownName("command", prev, sorted(commands))
            for nxt in c.following:
                if nxt not in commands:
                    raise UnknownName("command", nxt, sorted(commands))
                table.setdefault((c.level, prev, nxt), []).append((latency, c.window, c.sibling))
    return table


@dataclass
class DeviceSpec:
    """The name-based model of one DRAM standard plus its org and timing values."""

    name: str
    levels: tuple[str, ...]
    fanouts: Mapping[str, int]
    commands: tuple[str, ...]
    scopes: Mapping[str, str]
    kinds: Mapping[str, Iterable[str]]
    timing: Mapping[str, int]
    constraints: tuple[TimingConstraint, ...]
    prereqs: Mapping[tuple[str, str], Callable] = field(default_factory=dict)
    actions: Mapping[tuple[str, str], Callable] = field(default_factory=dict)
    states: tuple[str, ...] = ("Closed", "Opened", "PoweredUp")
    row_level: str = "row"
    targets: Mapping[str, str] = field(default_factory=dict)
    autoprecharge: Mapping[str, str] = field(default_factory=dict)
    org_info: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        self.levels = tuple(self.levels)
        self.commands = tuple(self.commands)
        self.states = tuple(self.states)
        self.constraints = tuple(self.constraints)
        self.fanouts = dict(self.fanouts)
        self.scopes = dict(self.scopes)
        self.kinds = {c: frozenset(self.kinds.get(c, ())) for c in self.commands}
        self.timing = {k: int(v) for k, v in self.timing.items()}
        self.prereqs = dict(self.prereqs)
        self.actions = dict(self.actions)
        self.targets = dict(self.targets)
        self.autoprecharge = dict(self.autoprecharge)
        self.org_info = dict(self.org_info)
        self._finalize()

    # -- validation and name resolution ----------------------------------------

    def _finalize(self):
        if len(set(self.levels)) != len(self.levels):
            raise SpecError(f"{self.name}: duplicate level names")
        if len(set(self.commands)) != len(self.commands):
            raise SpecError(f"{self.name}: duplicate command names")
        self.level_index = {n: i for i, n in enumerate(self.levels)}
        self.command_index = {n: i for i, n in enumerate(self.commands)}
        self.state_index = {n: i for i, n in enumerate(self.states)}
        self.ids = SimpleNamespace(**self.command_index)

        for lv in self.levels:
            n = self.fanouts.get(lv)
            if not isinstance(n, int) or n < 1:
                raise BadParameter(f"org.{lv}", f"fanout must be an integer >= 1, got {n!r}")
        self.row_index = self.resolve_level(self.row_level)
        if self.row_index == 0:
            raise SpecError(f"{self.name}: row level cannot be the root")
        # levels above the row are materialized nodes; the deepest is the bank
        self.node_levels = self.levels[: self.row_index]
        self.bank_index = self.row_index - 1

        for cmd in self.commands:
            if cmd not in self.scopes:
                raise SpecError(f"{self.name}: command {cmd} has no scope level")
            self.resolve_level(self.scopes[cmd])
            unknown = self.kinds[cmd] - KINDS
            if unknown:
                raise SpecError(f"{self.name}: command {cmd} has unknown kinds {sorted(unknown)}")
            if sum(k in self.kinds[cmd] for k in _EXCLUSIVE_KINDS) > 1:
                raise SpecError(f"{self.name}: command {cmd} has conflicting row kinds")
            target = self.targets.get(cmd)
            if target is None:
                scope = self.level_index[self.scopes[cmd]]
                target = self.levels[min(scope, self.bank_index)]
                self.targets[cmd] = target
            elif self.resolve_level(target) > self.bank_index:
                raise SpecError(f"{self.name}: readiness target of {cmd} must be a node level")
        for plain, auto in self.autoprecharge.items():
            self.resolve_command(plain)
            self.resolve_command(auto)

        for table, what in ((self.prereqs, "prerequisite"), (self.actions, "action")):
            for (lv, cmd), fn in table.items():
                if self.resolve_level(lv) > self.bank_index:
                    raise SpecError(f"{self.name}: {what} for {cmd} wired below the bank level")
                self.resolve_command(cmd)
                for needed in getattr(fn, "requires", ()):
                    if needed not in self.command_index:
                        raise UnknownName("command", needed, self.commands)
        for cmd in self.commands:
            wired = [lv for (lv, c) in self.prereqs if c == cmd]
            if len(wired) > 1:
                raise SpecError(f"{self.name}: {cmd} has prerequisites at several levels {wired}")

        self.latencies = [evaluate_latency(c.latency, self.timing) for c in self.constraints]
        self.expanded = expand_timing(
            self.constraints, levels=self.levels, commands=self.commands, timing=self.timing
        )
        for (lv, _prev, nxt) in self.expanded:
            if self.level_index[lv] > self.level_index[self.targets[nxt]]:
                raise SpecError(
                    f"{self.name}: constraint at {lv} on {nxt} is below its readiness "
                    f"target {self.targets[nxt]} and could never be checked"
                )
        self._sanity_checks()

    def _sanity_checks(self):
        for k, v in self.timing.items():
            if v < 1:
                raise BadParameter(f"timing.{k}", f"must be >= 1, got {v}")
        t = self.timing
        if {"nRAS", "nRP", "nRC"} <= t.keys() and t["nRAS"] + t["nRP"] > t["nRC"]:
            raise BadParameter("timing.nRC", f"nRAS + nRP ({t['nRAS']} + {t['nRP']}) exceeds nRC ({t['nRC']})")
        for lv in (self.levels[self.row_index], *self.levels[self.row_index + 1 :]):
            if self.fanouts[lv] & (self.fanouts[lv] - 1):
                raise BadParameter(f"org.{lv}", "row/column capacities must be powers of two")

    def resolve_level(self, name: str) -> int:
        try:
            return self.level_index[name]
        except KeyError:
            raise UnknownName("level", name, self.levels) from None

    def resolve_command(self, name: str) -> int:
        try:
            return self.command_index[name]
        except KeyError:
            raise UnknownName("command", name, self.commands) from None

    def resolve_state(self, name: str) -> int:
        try:
            return self.state_index[name]
        except KeyError:
            raise UnknownName("state", name, self.states) from None

    def has(self, kind: str, cmd: str) -> bool:
        return kind in self.kinds[cmd]

    def commands_of(self, kind: str) -> list[str]:
        return [c for c in self.commands if kind in self.kinds[c]]

    # -- derived views -----------------------------------------------------------

    @property
    def rows(self) -> int:
        return self.fanouts[self.row_level]

    def pairwise_count(self) -> int:
        return sum(len(v) for v in self.expanded.values())

    def replace(self, **changes) -> "DeviceSpec":
        """Return a rebuilt copy with some fields swapped out."""
        fields = dict(
            name=self.name,
            levels=self.levels,
            fanouts=self.fanouts,
            commands=self.commands,
            scopes=self.scopes,
            kinds={c: set(k) for c, k in self.kinds.items()},
            timing=self.timing,
            constraints=self.constraints,
            prereqs=self.prereqs,
            actions=self.actions,
            states=self.states,
            row_level=self.row_level,
            targets=self.targets,
            autoprecharge=self.autoprecharge,
            org_info=self.org_info,
        )
        fields.update(changes)
        return DeviceSpec(**fields)

    # -- declarative text form ---------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "levels": list(self.levels),
            "fanouts": {lv: self.fanouts[lv] for lv in self.levels},
            "row_level": self.row_level,
            "states": list(self.states),
            "commands": {
                c: {
                    "scope": self.scopes[c],
                    "target": self.targets[c],
                    "kinds": sorted(self.kinds[c]),
                }
                for c in self.commands
            },
            "autoprecharge": dict(self.autoprecharge),
            "timing": dict(self.timing),
            "constraints": [c.to_dict() for c in self.constraints],
            "prereqs": [
                {"level": lv, "command": c, "fn": library.behavior_name(fn)}
                for (lv, c), fn in self.prereqs.items()
            ],
            "actions": [
                {"level": lv, "command": c, "fn": library.behavior_name(fn)}
                for (lv, c), fn in self.actions.items()
            ],
            "org": dict(self.org_info),
        }

    def to_text(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)

    @classmethod
    def from_dict(cls, d: Mapping) -> "DeviceSpec":
        def behaviors(entries, table):
            out = {}
            for e in entries:
                if e["fn"] not in table:
                    raise UnknownName("behavior", e["fn"], sorted(table))
                out[(e["level"], e["command"])] = table[e["fn"]]
            return out

        cmds = d["commands"]
        return cls(
            name=d["name"],
            levels=tuple(d["levels"]),
            fanouts=d["fanouts"],
            commands=tuple(cmds),
            scopes={c: v["scope"] for c, v in cmds.items()},
            kinds={c: v.get("kinds", ()) for c, v in cmds.items()},
            targets={c: v["target"] for c, v in cmds.items() if "target" in v},
            timing=d["timing"],
            constraints=tuple(TimingConstraint.from_dict(c) for c in d["constraints"]),
            prereqs=behaviors(d.get("prereqs", ()), library.PREREQS),
            actions=behaviors(d.get("actions", ()), library.ACTIONS),
            states=tuple(d.get("states", ("Closed", "Opened", "PoweredUp"))),
            row_level=d.get("row_level", "row"),
            autoprecharge=d.get("autoprecharge", {}),
            org_info=d.get("org", {}),
        )

    @classmethod
    def from_text(cls, text: str) -> "DeviceSpec":
        return cls.from_dict(yaml.safe_load(text))


def refreshed_rows(ref_count: int, rows: int, groups: int = 8192) -> range:
    """Rows restored in every bank by the ``ref_count``-th all-bank refresh of a rank.

    Refreshes sweep the row space in ``groups`` equal slices, one slice per
    refresh command, wrapping around after a full sweep.
    """
    per_ref = max(1, -(-rows // groups))
    start = (ref_count * per_ref) % rows
    return range(start, min(start + per_ref, rows))
