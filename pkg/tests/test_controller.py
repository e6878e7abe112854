from __future__ import annotations

import pytest

from dramkit.controller import READ, WRITE, Request
from dramkit.errors import WatchdogTimeout
from dramkit.registry import build_simulation
from dramkit.tools.configs import with_plugins
from dramkit.tools.tracegen import gen_trace
from helpers import RECORDER, commands, config, simulate


class Rig:
    """One controller driven cycle by cycle, recording every command."""

    def __init__(self, standard="DDR4", org=None, timing=None, **ctrl):
        cfg = with_plugins(config(standard, **ctrl), [RECORDER])
        dram = cfg["MemorySystem"]["DRAM"]
        if org:
            dram["org"] = org
        if timing:
            dram["timing"] = timing
        graph = build_simulation(cfg)
        self.ms = graph.memory_system
        self.ctrl = self.ms.controllers[0]
        self.t = self.ms.spec.timing
        self.clk = 0
        self.done: list = []

    @property
    def records(self):
        return self.ctrl.plugins[-1].records

    def req(self, kind=READ, rank=0, bg=0, bank=0, row=0, col=0):
        return Request(kind, addr_vec=(0, rank, bg, bank, row, col))

    def send(self, *reqs):
        return [self.ctrl.enqueue(r, self.clk) for r in reqs]

    def run(self, cycles):
        for _ in range(cycles):
            self.done += self.ctrl.tick(self.clk)
            self.clk += 1
        return self

    def until_idle(self, limit=100_000):
        while not self.ctrl.idle and limit:
            self.run(1)
            limit -= 1
        return self

    def names(self):
        return [r[1] for r in self.records]


def test_single_read_latency():
    rig = Rig()
    (r,) = [rig.req(row=7, col=3)]
    rig.send(r)
    rig.until_idle()
    (act, rd) = rig.records
    t = rig.t
    assert act[1] == "ACT" and rd[1] == "RD"
    assert rd[0] - act[0] == t["nRCD"]
    assert r.depart_clk == act[0] + t["nRCD"] + t["nCL"] + t["nBL"]
    assert r.depart_clk >= r.arrive_clk


def test_idle_tick_issues_nothing():
    rig = Rig()
    assert rig.ctrl.tick(0) == []
    rig.run(100)
    assert rig.records == []


def test_queue_capacity():
    rig = Rig()
    reqs = [rig.req(row=i, col=0, bank=i % 4) for i in range(33)]
    accepted = rig.send(*reqs)
    assert accepted == [True] * 32 + [False]
    assert len(rig.ctrl.queues.read) == 32


def test_read_after_write_forwarded():
    rig = Rig()
    w = rig.req(WRITE, row=4, col=2)
    r = rig.req(READ, row=4, col=2)
    rig.send(w)
    rig.run(1)
    rig.send(r)
    rig.until_idle()
    assert rig.ctrl.counters["forwarded"] == 1
    assert "RD" not in rig.names()
    assert r.depart_clk == r.arrive_clk + rig.ctrl.p["forward_latency"]


def test_row_hit_beats_older_miss():
    rig = Rig()
    rig.send(rig.req(row=1, col=0))
    rig.until_idle()
    older = rig.req(row=2, col=0)
    newer = rig.req(row=1, col=8)
    rig.send(older, newer)
    rig.until_idle()
    names = rig.names()[2:]
    assert names[:2] == ["RD", "PRE"]
    assert newer.depart_clk < older.depart_clk


def test_equal_candidates_served_oldest_first():
    rig = Rig()
    a, b = rig.req(row=1, col=0), rig.req(row=1, col=8)
    rig.send(a, b)
    rig.until_idle()
    rds = [r for r in rig.records if r[1] == "RD"]
    assert rds[0][2][5] == 0 and rds[1][2][5] == 8
    assert a.depart_clk < b.depart_clk


def test_write_drain_hysteresis():
    rig = Rig(write_queue=8)  # high mark 6, low mark 2
    writes = [rig.req(WRITE, bg=i % 4, bank=i // 4, row=1, col=0) for i in range(6)]
    reads = [rig.req(READ, bg=i % 4, bank=2, row=3, col=0) for i in range(3)]
    rig.send(*writes, *reads)
    rig.until_idle()
    cols = [n for n in rig.names() if n in ("RD", "WR")]
    assert cols == ["WR"] * 4 + ["RD"] * 3 + ["WR"] * 2


def test_reads_first_below_high_mark():
    rig = Rig(write_queue=8)
    writes = [rig.req(WRITE, bg=i, bank=0, row=1, col=0) for i in range(4)]
    reads = [rig.req(READ, bg=i, bank=2, row=3, col=0) for i in range(2)]
    rig.send(*writes, *reads)
    rig.until_idle()
    cols = [n for n in rig.names() if n in ("RD", "WR")]
    assert cols == ["RD"] * 2 + ["WR"] * 4


def test_refresh_at_interval_one_per_rank():
    rig = Rig(org={"rank": 2})
    t = rig.t
    rig.run(t["nREFI"] + 10)
    refs = commands(rig.records, "REFab")
    assert [r[0] for r in refs] == [t["nREFI"], t["nREFI"] + 1]
    assert {r[2][1] for r in refs} == {0, 1}
    assert rig.ctrl.refresh.injected == 2


def test_refresh_precharges_open_banks_first():
    rig = Rig()
    t = rig.t
    rig.run(t["nREFI"] - 30)
    rig.send(rig.req(row=9, col=0), rig.req(bg=1, row=9, col=0))
    rig.run(200)
    names = rig.names()
    i = names.index("REFab")
    assert names[i - 1] == "PREab"
    assert "PRE" not in names


def test_refresh_blackout_stalls_traffic():
    rig = Rig()
    t = rig.t
    rig.run(t["nREFI"] + 1)
    r = rig.req(row=3, col=0)
    rig.send(r)
    rig.until_idle()
    ref = commands(rig.records, "REFab")[0]
    act = commands(rig.records, "ACT")[0]
    assert act[0] == ref[0] + t["nRFC"]


def test_refreshes_queue_without_coalescing():
    rig = Rig(timing={"nREFI": 100})
    rig.run(2001)
    issued = len(commands(rig.records, "REFab"))
    assert rig.ctrl.refresh.injected == 20
    assert len(rig.ctrl.queues.priority) == 20 - issued
    clks = [r[0] for r in commands(rig.records, "REFab")]
    assert all(b - a >= rig.t["nRFC"] for a, b in zip(clks, clks[1:]))


def test_closed_row_policy_uses_auto_precharge():
    cfg = config()
    cfg["MemorySystem"]["Controller"]["RowPolicy"] = {"impl": "ClosedRowPolicy"}
    _, records, _ = simulate(cfg, gen_trace("random", 300, seed=4))
    assert {"RDA", "WRA"} <= {r[1] for r in records}
    # with one direction only, every row is closed by its last access
    _, records, _ = simulate(cfg, gen_trace("random", 300, rw_ratio=10**6, seed=4))
    names = [r[1] for r in records]
    assert "PRE" not in names and "RD" not in names
    assert names.count("ACT") == names.count("RDA") == 300


def test_fcfs_serves_in_arrival_order():
    cfg = config()
    cfg["MemorySystem"]["Controller"]["Scheduler"] = {"impl": "FCFS"}
    rig_cfg = with_plugins(cfg, [RECORDER])
    graph = build_simulation(rig_cfg)
    ctrl = graph.memory_system.controllers[0]
    reqs = [Request(READ, addr_vec=(0, 0, 0, 0, row, 0)) for row in (1, 2, 1)]
    for r in reqs:
        ctrl.enqueue(r, 0)
    clk = 0
    while not ctrl.idle:
        ctrl.tick(clk)
        clk += 1
    departs = [r.depart_clk for r in reqs]
    assert departs == sorted(departs)


@pytest.mark.parametrize("pattern", ["random", "stream", "hammer"])
def test_clock_skipping_is_exact(pattern):
    trace = gen_trace(pattern, 1500, seed=2, max_bubbles=6)
    cfg = config(plugins=[{"impl": "PARA", "p": 0.05}])
    s1, r1, _ = simulate(cfg, trace, clock_skipping=True)
    s2, r2, _ = simulate(cfg, trace, clock_skipping=False)
    assert r1 == r2
    assert s1.simulated() == s2.simulated()
    assert s1["wall.ticks"] < s2["wall.ticks"]


def test_work_conservation_audit():
    trace = gen_trace("random", 800, seed=5, max_bubbles=4)
    stats, _, _ = simulate(config(audit=True), trace, clock_skipping=False)
    assert stats["requests.completed"] == 800


def test_one_command_per_cycle():
    trace = gen_trace("random", 2000, seed=6)
    _, records, _ = simulate(config(), trace)
    clks = [r[0] for r in records]
    assert all(a < b for a, b in zip(clks, clks[1:]))


def test_noop_plugin_is_transparent():
    trace = gen_trace("random", 1500, seed=7, max_bubbles=3)
    _, bare, _ = simulate(config(), trace)
    _, noop, _ = simulate(config(plugins=[{"impl": "NoOpPlugin"}]), trace)
    assert bare == noop


def test_watchdog_fires_on_starvation():
    trace = gen_trace("random", 500, seed=8)
    with pytest.raises(WatchdogTimeout):
        simulate(config(watchdog=20), trace)


def test_row_outcomes_account_for_every_request():
    trace = gen_trace("random", 1000, seed=9)
    stats, _, _ = simulate(config(), trace)
    total = stats["row_hits"] + stats["row_misses"] + stats["row_conflicts"]
    assert total == stats["requests.completed"] - stats["forwarded"]


@pytest.mark.parametrize("rw_ratio", [10**6, 1])
def test_activation_survives_injected_refreshes(rw_ratio):
    # every demand ACT triggers refreshes that close the row; each request
    # must still get its access before the bank is taken
    cfg = config(plugins=[{"impl": "PARA", "p": 1.0}], audit=True)
    trace = gen_trace("random", 1500, rw_ratio=rw_ratio, seed=12, max_bubbles=2)
    stats, records, _ = simulate(cfg, trace, max_cycles=3_000_000)
    assert stats["requests.completed"] == 1500
    assert stats["plugin.PARA.triggers"] == stats["plugin.PARA.draws"]
