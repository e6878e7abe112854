"""The request trace format: ``<bubbles> <R|W> <hex-addr>`` per line, ``#`` comments."""

from __future__ import annotations

from typing import Iterable, Iterator, NamedTuple

from ..errors import ParseError


class TraceEntry(NamedTuple):
    bubbles: int
    is_write: bool
    addr: int


def parse_line(line: str, lineno: int = 0, source: str = "") -> TraceEntry | None:
    body = line.split("#", 1)[0].strip()
    if not body:
        return None
    parts = body.split()
    if len(parts) != 3:
        raise ParseError(lineno, f"expected '<bubbles> <R|W> <hex-addr>', got {body!r}", source)
    b, op, a = parts
    try:
        bubbles = int(b)
    except ValueError:
        raise ParseError(lineno, f"bad bubble count {b!r}", source) from None
    if bubbles < 0:
        raise ParseError(lineno, "bubble count must be >= 0", source)
    if op not in ("R", "W"):
        raise ParseError(lineno, f"bad op {op!r}; expected R or W", source)
    try:
        addr = int(a, 16)
    except ValueError:
        raise ParseError(lineno, f"bad hex address {a!r}", source) from None
    if addr < 0:
        raise ParseError(lineno, "address must be non-negative", source)
    return TraceEntry(bubbles, op == "W", addr)


def iter_lines(lines: Iterable[str], source: str = "") -> Iterator[TraceEntry]:
    for i, line in enumerate(lines, 1):
        entry = parse_line(line, i, source)
        if entry is not None:
            yield entry


def read_trace(path) -> Iterator[TraceEntry]:
    with open(path) as f:
        yield from iter_lines(f, str(path))


def format_entry(entry: TraceEntry) -> str:
    return f"{entry.bubbles} {'W' if entry.is_write else 'R'} {entry.addr:#x}"
