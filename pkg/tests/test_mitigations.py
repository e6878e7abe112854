from __future__ import annotations

import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dramkit.errors import BadParameter
from dramkit.mitigations import PARA, CommandTraceRecorder, Graphene, Ideal, MisraGriesTable
from dramkit.registry import build_simulation
from dramkit.standards import build_standard
from dramkit.tools.configs import with_plugins
from dramkit.tools.tracegen import gen_trace
from dramkit.tools.verifier import verify_trace
from helpers import config, simulate
from oracles import exact_counts, max_exposure

SPEC = build_standard("DDR4")
ACT = SPEC.command_index["ACT"]
REFAB = SPEC.command_index["REFab"]
BANK = (0, 0, 0, 0)


class FakeHost:
    """Enough of the plugin host to drive a plugin by hand."""

    def __init__(self, seed=0, room=10**9):
        self.spec = SPEC
        self.channel = 0
        self.shared = {}
        self.seed = seed
        self.room = room
        self.injected = []

    def rng(self, name):
        return random.Random(f"{self.seed}/{self.channel}/{name}")

    def maintenance(self, commands, addr_vec, origin=""):
        return (tuple(commands), tuple(addr_vec))

    def inject(self, req):
        if len(self.injected) >= self.room:
            return False
        self.injected.append(req)
        return True

    def rows(self):
        return [addr[4] for _, addr in self.injected]


def make(cls, host=None, **params):
    p = {**cls.params, **params}
    cls.validate(p, cls.__name__)
    plugin = cls(p, None)
    plugin.bind(host or FakeHost())
    return plugin, plugin.host


def act(plugin, row, bank=BANK, clk=0):
    plugin.on_command_issued(ACT, bank + (row, -1), clk)


def test_para_p1_refreshes_both_neighbours():
    para, host = make(PARA, p=1.0)
    act(para, 100)
    assert sorted(host.rows()) == [99, 101]
    assert all(cmds == ("ACT", "PRE") for cmds, _ in host.injected)


def test_para_p1_every_demand_activation_and_not_its_own():
    para, host = make(PARA, p=1.0)
    for i in range(50):
        act(para, 10 + 3 * i)
    assert para.triggers == 50 and para.draws == 50
    # the injected refreshes activate their victims; those do not draw again
    for row in list(host.rows()):
        act(para, row)
    assert para.draws == 50 and len(host.injected) == 100


def test_para_p0_never_injects():
    para, host = make(PARA, p=0.0)
    for i in range(10_000):
        act(para, i % 500)
    assert host.injected == [] and para.draws == 10_000


def test_para_edge_rows_clamped():
    para, host = make(PARA, p=1.0)
    act(para, 0)
    act(para, SPEC.rows - 1)
    assert host.rows() == [1, SPEC.rows - 2]


def test_para_rejects_bad_p():
    with pytest.raises(BadParameter):
        PARA.validate({"p": 1.5, "blast_radius": 1}, "x")


def test_para_for_threshold_sizing():
    for t in (10, 1000):
        p = PARA.for_threshold(t)["p"]
        assert math.isclose((1 - p) ** t, 1e-15, rel_tol=1e-6)


def test_graphene_triggers_at_half_threshold():
    g, host = make(Graphene, t_rh=64)
    for i in range(31):
        act(g, 500, clk=i)
    assert host.injected == []
    act(g, 500, clk=31)
    assert sorted(host.rows()) == [499, 501]
    # the estimate restarts, so the next trigger is another 32 ACTs away
    for i in range(31):
        act(g, 500, clk=40 + i)
    assert len(host.injected) == 2
    act(g, 500, clk=80)
    assert len(host.injected) == 4


def test_graphene_round_robin_below_trigger():
    g, host = make(Graphene, t_rh=64, table_entries=8)
    # nine rows sharing eight entries: the spillover counter rises but no estimate
    # reaches 32 before the window ends
    for i in range(9 * 20):
        act(g, 1000 + 4 * (i % 9), clk=i)
    assert host.injected == []


def test_graphene_window_reset_clears_counts():
    g, host = make(Graphene, t_rh=64, reset_window=1000)
    for i in range(31):
        act(g, 7, clk=i)
    g.on_tick(1000)
    assert g.resets == 1
    assert all(len(t) == 0 for t in g.tables.values())
    act(g, 7, clk=1001)
    assert host.injected == []
    assert g.next_wakeup(1001) == 2000


def test_graphene_auto_table_size():
    g, _ = make(Graphene, t_rh=1000)
    t = SPEC.timing
    acts = t["nREFI"] * 8192 // t["nRC"] + 1
    assert g.entries == math.ceil(acts / 500)


@settings(max_examples=100, deadline=None)
@given(
    st.integers(1, 12),
    st.lists(st.integers(0, 20), min_size=0, max_size=300),
)
def test_misra_gries_guarantee(capacity, stream):
    table = MisraGriesTable(capacity)
    for row in stream:
        table.update(row)
    true = exact_counts(stream)
    n = len(stream)
    assert len(table) <= capacity
    for row, c in true.items():
        if row in table:
            assert table.get(row) >= c
            assert table.get(row) <= c + table.spill
        if c > n / (capacity + 1):
            assert row in table
    assert table.spill <= n / (capacity + 1)


def test_misra_gries_reset_row_floor():
    table = MisraGriesTable(1)
    table.update(1)
    table.update(2)  # no free entry, count 1 > spill 0: spill rises
    assert table.spill == 1 and table.get(1) == 1
    table.update(2)  # evicts row 1, whose count equals the spill level
    assert 1 not in table and table.get(2) == 2
    table.reset_row(2)
    assert table.get(2) == table.spill == 1


def test_ideal_single_activation_low_threshold():
    ideal, host = make(Ideal, t_rh=4)  # trigger max(1, 4 - 1 - 2) = 1
    act(ideal, 300)
    assert sorted(host.rows()) == [299, 301]


def test_ideal_no_repeat_trace_is_quiet():
    ideal, host = make(Ideal, t_rh=10)
    for i in range(2000):
        act(ideal, (i * 7) % SPEC.rows, bank=(0, 0, i % 4, 0))
    assert host.injected == []


def test_ideal_self_activation_restores():
    ideal, host = make(Ideal, t_rh=10)  # trigger 7
    for _ in range(6):
        act(ideal, 50)
    assert ideal.exposure[BANK] == {49: 6, 51: 6}
    act(ideal, 51)  # restores 51; 50 and 52 are exposed once
    assert ideal.exposure[BANK] == {49: 6, 50: 1, 52: 1}
    assert host.injected == []
    act(ideal, 50)
    assert sorted(host.rows()) == [49]
    assert 50 not in ideal.exposure[BANK]
    # the pending refresh is not requested twice
    act(ideal, 48)
    assert host.rows() == [49]
    act(ideal, 49)
    assert 49 not in ideal.pending and 49 not in ideal.exposure[BANK]


def test_ideal_refresh_sweeps_rows():
    ideal, _ = make(Ideal, t_rh=1000)
    act(ideal, 1)
    assert ideal.exposure[BANK] == {0: 1, 2: 1}
    ideal.on_command_issued(REFAB, (0, 0, -1, -1, -1, -1), 10)
    per = -(-SPEC.rows // 8192)
    assert all(r >= per for r in ideal.exposure[BANK])


@pytest.mark.parametrize("t_rh", [10, 50, 100, 500])
def test_ideal_oracle_in_simulation(t_rh):
    trace = gen_trace("hammer", 4000, rw_ratio=10**6, seed=3, bubbles=20, aggressor_pairs=2)
    stats, records, _ = simulate(config(plugins=[{"impl": "Ideal", "t_rh": t_rh}]), trace)
    assert max_exposure(records, SPEC.rows) < t_rh
    assert stats["plugin.Ideal.injected"] > 0


def test_recorder_records_in_order_and_verifies():
    trace = gen_trace("random", 500, seed=2)
    stats, records, _ = simulate(config(), trace)
    assert stats["plugin.CommandTraceRecorder.records"] == len(records) > 500
    clks = [r[0] for r in records]
    assert clks == sorted(clks) and len(set(clks)) == len(clks)
    assert verify_trace(SPEC, records) == []


def test_recorder_file_and_memory_agree(tmp_path):
    trace = gen_trace("random", 200, seed=5)
    path = tmp_path / "deep" / "cmds.csv"
    cfg = with_plugins(config(), [{"impl": "CommandTraceRecorder", "path": str(path)}])
    _, records, _ = simulate(cfg, trace)
    lines = path.read_text().splitlines()
    assert lines[0] == "clk,cmd,channel,rank,bankgroup,bank,row,column"
    assert len(lines) - 1 == len(records)
    first = records[0]
    assert lines[1] == f"{first[0]},{first[1]},{','.join(map(str, first[2]))}"


def test_recorder_unwritable_path(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    cfg = with_plugins(config(), [{"impl": "CommandTraceRecorder", "path": str(blocker / "x.csv")}])
    with pytest.raises(BadParameter):
        build_simulation(cfg)


@pytest.mark.parametrize("name", ["TWiCe", "Hydra", "RRS"])
def test_reserved_names_are_errors(name):
    with pytest.raises(BadParameter, match="reserved"):
        build_simulation(config(plugins=[{"impl": name}]))


@pytest.mark.parametrize("plugin", [{"impl": "PARA", "p": 0.2}, {"impl": "Graphene", "t_rh": 40}, {"impl": "Ideal", "t_rh": 40}])
def test_mitigated_runs_verify_and_repeat(plugin):
    trace = gen_trace("hammer", 1500, seed=8, bubbles=1, hammer_fraction=0.7)
    a, rec_a, _ = simulate(config(plugins=[plugin], seed=3), trace)
    b, rec_b, _ = simulate(config(plugins=[plugin], seed=3), trace)
    assert rec_a == rec_b
    assert a.simulated() == b.simulated()
    assert verify_trace(SPEC, rec_a) == []
    assert a[f"plugin.{plugin['impl']}.injected"] > 0


def test_injection_dropped_when_queue_full():
    para, host = make(PARA, host=FakeHost(room=1), p=1.0)
    act(para, 100)
    assert para.injected == 1 and para.dropped == 1
