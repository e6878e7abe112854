"""Brute-force reference models, written independently of the simulator."""

from __future__ import annotations

from collections import Counter


def rows_refreshed(ref_index: int, rows: int, groups: int = 8192) -> range:
    """Rows restored by the ``ref_index``-th all-bank refresh of a rank."""
    per = max(1, (rows + groups - 1) // groups)
    start = (ref_index * per) % rows
    return range(start, min(start + per, rows))


def max_exposure(records, rows: int, blast: int = 1, bank_depth: int = 4, row_index: int = 4) -> int:
    """Largest number of aggressor activations any row saw between two restorations.

    A row is restored when it is itself activated or when a periodic refresh
    sweeps over it.  ``records`` are ``(clk, cmd, addr_vec)``.
    """
    exposure: dict[tuple, int] = {}
    refs: Counter = Counter()
    worst = 0
    for _clk, cmd, addr in records:
        if cmd == "ACT":
            bank = tuple(addr[:bank_depth])
            row = addr[row_index]
            exposure[bank + (row,)] = 0
            for d in range(1, blast + 1):
                for v in (row - d, row + d):
                    if 0 <= v < rows:
                        key = bank + (v,)
                        exposure[key] = exposure.get(key, 0) + 1
                        worst = max(worst, exposure[key])
        elif cmd == "REFab":
            rank = tuple(addr[:2])
            restored = set(rows_refreshed(refs[rank], rows))
            refs[rank] += 1
            for key in list(exposure):
                if key[:2] == rank and key[-1] in restored:
                    exposure[key] = 0
    return worst


def exact_counts(stream) -> Counter:
    return Counter(stream)


def reference_ready(spec, history, cmd: str, addr) -> int:
    """Earliest cycle ``cmd`` may issue at ``addr`` given every command issued so far.

    Scans the whole history against every expanded constraint pair.
    ``history`` holds ``(clk, cmd, addr_vec)`` in issue order.
    """
    index = {lv: i for i, lv in enumerate(spec.levels)}
    ready = 0
    for (lv, prev, nxt), entries in spec.expanded.items():
        if nxt != cmd:
            continue
        depth = index[lv]
        for latency, window, sibling in entries:
            if sibling:
                hits = [c for c, p, a in history
                        if p == prev and tuple(a[:depth]) == tuple(addr[:depth]) and a[depth] != addr[depth]]
            else:
                hits = [c for c, p, a in history if p == prev and tuple(a[: depth + 1]) == tuple(addr[: depth + 1])]
            if len(hits) >= window:
                ready = max(ready, hits[-window] + latency)
    return ready
