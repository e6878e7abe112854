from __future__ import annotations

from itertools import count
from typing import Callable, Sequence

READ = "read"
WRITE = "write"
MAINTENANCE = "maintenance"

_ids = count()


class Request:
    """A memory request travelling from the frontend through one controller.

    ``stages`` holds the command indices the request must issue in order;
    reads and writes have a single column command, maintenance requests may
    have several (a preventive refresh is ACT then PRE).  The remaining
    slots are scheduler bookkeeping owned by the controller.
    """

    __slots__ = (
        "id",
        "type",
        "raw_addr",
        "addr_vec",
        "arrive_clk",
        "depart_clk",
        "source",
        "callback",
        "maintenance",
        "stages",
        "stage",
        "loc",
        "bank",
        "row",
        "cmd",
        "ready",
        "stamp",
        "classified",
        "origin",
        "span",
    )

    def __init__(
        self,
        type: str,
        raw_addr: int = -1,
        addr_vec: Sequence[int] | None = None,
        callback: Callable | None = None,
        source=None,
        maintenance: tuple[str, ...] = (),
        origin: str = "",
        id: int | None = None,
    ):
        self.id = next(_ids) if id is None else id
        self.type = type
        self.raw_addr = raw_addr
        self.addr_vec = tuple(addr_vec) if addr_vec is not None else None
        self.arrive_clk = -1
        self.depart_clk = -1
        self.source = source
        self.callback = callback
        self.maintenance = tuple(maintenance)
        self.origin = origin
        self.stages = ()
        self.stage = 0
        self.loc = None
        self.bank = -1
        self.row = -1
        self.cmd = -1
        self.ready = 0
        self.stamp = 0
        self.classified = False
        self.span = None

    @property
    def is_read(self) -> bool:
        return self.type == READ

    @property
    def is_write(self) -> bool:
        return self.type == WRITE

    @property
    def completed(self) -> bool:
        return self.depart_clk >= 0

    @property
    def target_cmd(self) -> int:
        return self.stages[self.stage]

    def __repr__(self):
        kind = self.type if not self.maintenance else f"{self.type}({'+'.join(self.maintenance)})"
        return f"Request(id={self.id}, {kind}, addr={self.addr_vec}, arrive={self.arrive_clk})"
