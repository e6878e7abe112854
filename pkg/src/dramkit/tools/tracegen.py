"""Synthetic request traces."""

from __future__ import annotations

import random
from pathlib import Path
from typing import Iterable

from ..errors import BadParameter
from ..memsys.mapper import make_mapper
from ..memsys.trace import TraceEntry, format_entry
from ..standards import build_standard, resolve_org

PATTERNS = ("random", "stream", "hammer")
LINE = 64


def device_layout(standard: str = "DDR4", org=None, scheme: str = "RoBaRaCoCh"):
    """Spec and mapper for the default device, used to size and aim traces."""
    o = resolve_org(standard, org)
    spec = build_standard(standard, org)
    return spec, make_mapper(scheme, spec, o.transaction_bytes, o.prefetch)


def gen_trace(
    pattern: str,
    count: int,
    rw_ratio: int = 4,
    seed: int = 0,
    *,
    bubbles: int = 0,
    max_bubbles: int | None = None,
    standard: str = "DDR4",
    org=None,
    scheme: str = "RoBaRaCoCh",
    aggressor_pairs: int = 4,
    hammer_fraction: float = 1.0,
    sides: int = 2,
) -> list[TraceEntry]:
    """``rw_ratio`` reads then one write, repeating; bubbles are ``bubbles`` or
    uniform in ``[bubbles, max_bubbles]``.

    ``hammer`` cycles over the two aggressors around each of
    ``aggressor_pairs`` victim rows (each pair in its own bank), mixing in
    uniform random traffic for ``1 - hammer_fraction`` of the entries.
    ``sides > 2`` hammers that many rows per bank, every other row, so the
    queue rarely holds two requests to one row.
    """
    if pattern not in PATTERNS:
        raise BadParameter("pattern", f"unknown pattern {pattern!r} (known: {', '.join(PATTERNS)})")
    if count < 0 or rw_ratio < 0 or bubbles < 0:
        raise BadParameter("count", "count, rw_ratio and bubbles must be >= 0")
    if max_bubbles is not None and max_bubbles < bubbles:
        raise BadParameter("max_bubbles", "must be >= bubbles")
    spec, mapper = device_layout(standard, org, scheme)
    lines = mapper.capacity // LINE
    rng = random.Random(seed)
    period = rw_ratio + 1

    aggressors = []
    if pattern == "hammer":
        aggressors = _aggressors(spec, mapper, aggressor_pairs, rng, sides)

    out = []
    for i in range(count):
        if pattern == "stream":
            addr = (i % lines) * LINE
        elif pattern == "random" or rng.random() >= hammer_fraction:
            addr = rng.randrange(lines) * LINE
        else:
            addr = aggressors[i % len(aggressors)]
        b = bubbles if max_bubbles is None else rng.randint(bubbles, max_bubbles)
        out.append(TraceEntry(b, i % period == rw_ratio, addr))
    return out


def _aggressors(spec, mapper, pairs: int, rng: random.Random, sides: int = 2) -> list[int]:
    """Aggressor addresses: every row hammered in the first bank, then the next bank, and so on."""
    levels = spec.levels
    n_banks = 1
    for lv in spec.node_levels:
        n_banks *= spec.fanouts[lv]
    rows = spec.rows
    if pairs < 1 or pairs > n_banks:
        raise BadParameter("aggressor_pairs", f"must be within 1..{n_banks}")
    if sides < 2 or 2 * sides - 1 > rows:
        raise BadParameter("sides", f"must be within 2..{(rows + 1) // 2}")
    banks = rng.sample(range(n_banks), pairs)
    out = []
    for flat in banks:
        vec = [0] * len(levels)
        for lv in reversed(range(len(spec.node_levels))):
            f = spec.fanouts[levels[lv]]
            vec[lv] = flat % f
            flat //= f
        victim = rng.randrange(1, rows - 1)
        first = min(victim - 1, rows - 1 - 2 * (sides - 1))
        for j in range(sides):
            vec[spec.row_index] = first + 2 * j
            out.append(mapper.unmap(vec))
    return out


def write_trace(entries: Iterable[TraceEntry], path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        for e in entries:
            f.write(format_entry(e))
            f.write("\n")
    return path
