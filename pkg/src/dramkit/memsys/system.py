"""Memory-system glue: address mapping, per-channel controllers, the run loop."""

from __future__ import annotations

import time
from pathlib import Path

import yaml

from ..errors import WatchdogTimeout
from ..registry import Component


class GenericMemorySystem(Component):
    """One device model shared by one controller per channel."""

    interface = "MemorySystem"
    params = {"clock_skipping": True}
    slots = {"DRAM": "DRAM", "AddrMapper": "AddrMapper", "Controller": "Controller"}

    def __init__(self, params, ctx):
        super().__init__(params, ctx)
        self.dram = ctx.build_child("DRAM")
        self.spec = self.dram.spec
        self.tree = self.dram.tree
        self.mapper = ctx.build_child("AddrMapper")
        self.mapper.bind(self.spec, self.dram.transaction_bytes, self.dram.org.prefetch)
        self.shared: dict = {}
        n_channels = self.spec.fanouts[self.spec.levels[0]]
        self.controllers = [
            ctx.build_child("Controller", tree=self.tree, channel=ch, shared=self.shared)
            for ch in range(n_channels)
        ]
        self.clk = 0

    def send(self, req, clk: int) -> bool:
        if req.addr_vec is None:
            req.addr_vec = self.mapper.map(req.raw_addr)
        return self.controllers[req.addr_vec[0]].enqueue(req, clk)

    def can_accept(self, req) -> bool:
        if req.addr_vec is None:
            req.addr_vec = self.mapper.map(req.raw_addr)
        return self.controllers[req.addr_vec[0]].can_accept(req)

    def tick(self, clk: int) -> None:
        self.clk = clk
        for ctrl in self.controllers:
            ctrl.tick(clk)

    def next_wakeup(self, clk: int) -> int | None:
        best = None
        for ctrl in self.controllers:
            t = ctrl.next_wakeup(clk)
            if t is not None and (best is None or t < best):
                best = t
        return best

    @property
    def idle(self) -> bool:
        return all(ctrl.idle for ctrl in self.controllers)

    def check_watchdog(self, clk: int) -> None:
        for ctrl in self.controllers:
            ctrl.check_watchdog(clk)

    def finish(self, clk: int) -> None:
        for ctrl in self.controllers:
            ctrl.finish(clk)

    def stats(self) -> dict:
        total: dict = {}
        for ctrl in self.controllers:
            for k, v in ctrl.stats().items():
                total[k] = total.get(k, 0) + v
        return total


class StatsSheet(dict):
    """Flat key/value statistics; wall-clock values live under ``wall.``."""

    def simulated(self) -> dict:
        return {k: v for k, v in self.items() if not k.startswith("wall.")}

    def to_text(self) -> str:
        return yaml.safe_dump(dict(self), sort_keys=False, default_flow_style=False)

    def write(self, outdir) -> Path:
        out = Path(outdir)
        out.mkdir(parents=True, exist_ok=True)
        path = out / "stats.yaml"
        path.write_text(self.to_text())
        return path


_WATCHDOG_EVERY = 4096


def run(graph, trace=None, *, clock_skipping: bool | None = None, max_cycles: int | None = None) -> StatsSheet:
    """Tick the frontend and memory system until the trace is fully served."""
    frontend, memsys = graph.frontend, graph.memory_system
    frontend.attach(memsys)
    if trace is not None:
        frontend.set_trace(trace)
    skip = memsys.p["clock_skipping"] if clock_skipping is None else clock_skipping
    start = time.perf_counter()
    clk = 0
    ticks = 0
    while True:
        # the frontend offers after the controllers have ticked, so an entry
        # accepted at clk is first schedulable at clk + 1
        memsys.tick(clk)
        frontend.tick(clk)
        ticks += 1
        if frontend.exhausted and memsys.idle:
            break
        if ticks % _WATCHDOG_EVERY == 0:
            memsys.check_watchdog(clk)
        if max_cycles is not None and clk >= max_cycles:
            raise WatchdogTimeout(f"simulation exceeded {max_cycles} cycles")
        if skip:
            a = frontend.next_wakeup(clk)
            b = memsys.next_wakeup(clk)
            if a is None:
                nxt = b
            elif b is None:
                nxt = a
            else:
                nxt = a if a < b else b
            if nxt is None:
                raise WatchdogTimeout(f"simulation stalled at cycle {clk} with work pending")
            clk = nxt
        else:
            clk += 1
    memsys.check_watchdog(clk)
    memsys.finish(clk)
    wall = time.perf_counter() - start
    return _collect(frontend, memsys, clk, ticks, wall)


def _collect(frontend, memsys, clk, ticks, wall) -> StatsSheet:
    s = memsys.stats()
    reads, writes = s.pop("reads"), s.pop("writes")
    lat = s.pop("read_latency_sum")
    sheet = StatsSheet()
    sheet["cycles"] = clk
    sheet["requests.total"] = frontend.accepted
    sheet["requests.read"] = reads
    sheet["requests.write"] = writes
    sheet["requests.completed"] = frontend.completed
    sheet["requests.stalled_entries"] = frontend.stalled
    sheet["avg_read_latency"] = round(lat / reads, 4) if reads else 0.0
    for k in sorted(s):
        sheet[k] = s[k]
    sheet["wall.seconds"] = round(wall, 4)
    sheet["wall.ticks"] = ticks
    sheet["wall.requests_per_sec"] = round(frontend.accepted / wall, 1) if wall > 0 else 0.0
    return sheet
