"""Bit-slicing physical address mappers."""

from __future__ import annotations

from ..errors import BadParameter, OutOfRange
from ..registry import Component


class BitSliceMapper(Component):
    """Slice an address into level indices, least significant level first.

    The transaction offset is dropped first.  Column indices count bursts, so
    the column field holds ``log2(columns / prefetch)`` bits and the mapped
    column is the first column of the burst.
    """

    interface = "AddrMapper"
    params = {}
    order: tuple[str, ...] = ()

    def bind(self, spec, transaction_bytes: int, prefetch: int) -> None:
        where = self.ctx.path if self.ctx is not None else type(self).__name__
        self.spec = spec
        self.prefetch = prefetch
        self.offset_bits = _log2(transaction_bytes, f"{where}: transaction size")
        self.fields = []
        for name in self.order:
            n = spec.fanouts[name]
            if name == "column":
                n //= prefetch
            bits = _log2(n, f"{where}: {name} fanout {n}")
            self.fields.append((spec.level_index[name], bits, (1 << bits) - 1))
        self.n_levels = len(spec.levels)
        self.column_level = spec.level_index["column"]
        self.capacity = 1 << (self.offset_bits + sum(b for _, b, _ in self.fields))

    def map(self, raw: int) -> tuple[int, ...]:
        if not 0 <= raw < self.capacity:
            raise OutOfRange(f"address {raw:#x} outside capacity {self.capacity:#x}")
        x = raw >> self.offset_bits
        vec = [0] * self.n_levels
        for lv, bits, mask in self.fields:
            vec[lv] = x & mask
            x >>= bits
        vec[self.column_level] *= self.prefetch
        return tuple(vec)

    def unmap(self, vec) -> int:
        x = 0
        shift = 0
        for lv, bits, mask in self.fields:
            v = vec[lv]
            if lv == self.column_level:
                v //= self.prefetch
            if not 0 <= v <= mask:
                raise OutOfRange(f"index {vec[lv]} out of range at {self.spec.levels[lv]}")
            x |= v << shift
            shift += bits
        return x << self.offset_bits


class RoBaRaCoCh(BitSliceMapper):
    """Row, bank, rank, column, channel (most to least significant)."""

    order = ("channel", "column", "rank", "bankgroup", "bank", "row")


class ChRaBaRoCo(BitSliceMapper):
    """Channel, rank, bank, row, column (most to least significant)."""

    order = ("column", "row", "bank", "bankgroup", "rank", "channel")


def _log2(n: int, what: str) -> int:
    if n < 1 or n & (n - 1):
        raise BadParameter("", f"{what} must be a power of two")
    return n.bit_length() - 1


MAPPERS = {"RoBaRaCoCh": RoBaRaCoCh, "ChRaBaRoCo": ChRaBaRoCo}


def make_mapper(scheme: str, spec, transaction_bytes: int, prefetch: int) -> BitSliceMapper:
    """A standalone mapper outside any simulation graph."""
    try:
        cls = MAPPERS[scheme]
    except KeyError:
        raise BadParameter("scheme", f"unknown mapping {scheme!r} (known: {', '.join(MAPPERS)})") from None
    mapper = cls({}, None)
    mapper.bind(spec, transaction_bytes, prefetch)
    return mapper
