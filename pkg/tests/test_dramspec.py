from __future__ import annotations

import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dramkit.dramspec import DeviceSpec, NodeTree, TimingConstraint, expand_timing, library
from dramkit.errors import NoPathToCommand, ProtocolViolation, UnknownName
from dramkit.standards import build_standard
from oracles import reference_ready

SMALL = {"rank": 2, "bankgroup": 2, "bank": 2, "row": 8, "column": 16}


def ddr4(**timing):
    return build_standard("DDR4", SMALL, timing or None)


def addr(rank=0, bg=0, bank=0, row=-1, col=-1, ch=0):
    return (ch, rank, bg, bank, row, col)


def toy(constraints, timing=None):
    return DeviceSpec(
        name="toy",
        levels=("channel", "bank", "row", "column"),
        fanouts={"channel": 1, "bank": 2, "row": 8, "column": 4},
        commands=("ACT", "PRE", "RD"),
        scopes={"ACT": "row", "PRE": "bank", "RD": "column"},
        kinds={"ACT": {"opens_row"}, "PRE": {"closes_row"}, "RD": {"read"}},
        timing=timing or {"nA": 3, "nB": 5},
        constraints=constraints,
        prereqs={("bank", "ACT"): library.require_bank_closed, ("bank", "RD"): library.require_row_open},
        actions={("bank", "ACT"): library.open_row, ("bank", "PRE"): library.close_row},
    )


# -- name resolution ---------------------------------------------------------------


def test_resolve_level_indices():
    spec = build_standard("DDR5")
    assert spec.resolve_level("bank") == 3
    assert spec.resolve_level("channel") == 0
    with pytest.raises(UnknownName):
        build_standard("DDR4").resolve_level("subarray")


def test_resolution_is_injective():
    spec = build_standard("DDR5")
    assert len({spec.resolve_level(n) for n in spec.levels}) == len(spec.levels)
    assert len({spec.resolve_command(n) for n in spec.commands}) == len(spec.commands)


# -- expansion ---------------------------------------------------------------------


def test_expand_single_preceding_two_following():
    c = TimingConstraint("bank", ("ACT",), ("RD", "WR"), "nRCD")
    table = expand_timing([c], levels=["bank"], commands=["ACT", "RD", "WR"], timing={"nRCD": 11})
    assert table == {("bank", "ACT", "RD"): [(11, 1, False)], ("bank", "ACT", "WR"): [(11, 1, False)]}


def test_expand_cross_product():
    c = TimingConstraint("rank", ("RD", "WR"), ("RD", "WR"), 4)
    table = expand_timing([c], levels=["rank"], commands=["RD", "WR"], timing={})
    assert len(table) == 4


def test_expand_keeps_overlapping_records():
    cs = [TimingConstraint("rank", ("ACT",), ("ACT",), 4), TimingConstraint("rank", ("ACT",), ("ACT",), 16, window=4)]
    table = expand_timing(cs, levels=["rank"], commands=["ACT"], timing={})
    assert table[("rank", "ACT", "ACT")] == [(4, 1, False), (16, 4, False)]


def test_expand_rejects_unknown_names():
    with pytest.raises(UnknownName):
        expand_timing([TimingConstraint("bank", ("ACT",), ("XX",), 1)], levels=["bank"], commands=["ACT"], timing={})
    with pytest.raises(UnknownName):
        expand_timing([TimingConstraint("bank", ("ACT",), ("ACT",), "nZZ")], levels=["bank"], commands=["ACT"], timing={})


_cmds = st.lists(st.sampled_from(["ACT", "PRE", "RD"]), min_size=1, max_size=3, unique=True)
_constraint = st.builds(
    TimingConstraint,
    level=st.sampled_from(["channel", "bank"]),
    preceding=_cmds,
    following=_cmds,
    latency=st.one_of(st.integers(1, 20), st.sampled_from(["nA", "nB", "nA + nB", "nB - 1"])),
    window=st.integers(1, 3),
    sibling=st.booleans(),
)


@given(st.lists(_constraint, max_size=6))
def test_expansion_matches_brute_force(constraints):
    timing = {"nA": 3, "nB": 5}
    got = expand_timing(constraints, levels=["channel", "bank"], commands=["ACT", "PRE", "RD"], timing=timing)
    want: dict = {}
    for c in constraints:
        lat = {"nA": 3, "nB": 5, "nA + nB": 8, "nB - 1": 4}.get(c.latency, c.latency)
        for p, n in itertools.product(c.preceding, c.following):
            want.setdefault((c.level, p, n), []).append((lat, c.window, c.sibling))
    assert got == want
    assert sum(map(len, got.values())) == sum(len(c.preceding) * len(c.following) for c in constraints)


def test_toy_spec_expansion_by_hand():
    spec = toy([TimingConstraint("bank", ("ACT",), ("RD",), "nA"), TimingConstraint("bank", ("ACT", "PRE"), ("ACT",), "nB")])
    assert spec.expanded == {
        ("bank", "ACT", "RD"): [(3, 1, False)],
        ("bank", "ACT", "ACT"): [(5, 1, False)],
        ("bank", "PRE", "ACT"): [(5, 1, False)],
    }


# -- readiness -----------------------------------------------------------------------


def test_act_to_rd_boundary():
    spec = ddr4(nRCD=11)
    tree = NodeTree(spec)
    ids = spec.command_index
    tree.issue(ids["ACT"], addr(row=3), 0)
    assert not tree.check_ready(ids["RD"], addr(row=3, col=0), 10)
    assert tree.check_ready(ids["RD"], addr(row=3, col=0), 11)


def test_four_activation_window():
    spec = build_standard("DDR4", {**SMALL, "bank": 4}, {"nFAW": 16, "nRRD_S": 2, "nRRD_L": 2})
    tree = NodeTree(spec)
    act = spec.command_index["ACT"]
    for clk, bank in zip((0, 2, 4, 6), range(4)):
        tree.issue(act, addr(bg=bank % 2, bank=bank // 2, row=1), clk)
    fifth = tree.locate(addr(bg=1, bank=3, row=2))
    assert tree.ready_at(act, fifth) == 16
    assert not tree.check_ready(act, addr(bg=1, bank=3, row=2), 15)
    # the window is per rank
    assert tree.ready_at(act, tree.locate(addr(rank=1, bg=1, bank=3))) == 0


def test_fresh_tree_is_ready_at_zero():
    spec = ddr4()
    tree = NodeTree(spec)
    for name in spec.commands:
        assert tree.ready_at(spec.command_index[name], tree.locate(addr(row=0, col=0))) == 0


def test_pre_closes_and_gates_act():
    spec = ddr4()
    t = spec.timing
    tree = NodeTree(spec)
    ids = spec.command_index
    tree.issue(ids["ACT"], addr(row=5), 0)
    assert tree.state_of(spec.bank_index, addr(row=5)) == ("Opened", 5)
    tree.issue(ids["PRE"], addr(), t["nRAS"])
    assert tree.state_of(spec.bank_index, addr()) == ("Closed", None)
    assert tree.ready_at(ids["ACT"], tree.locate(addr())) == max(t["nRAS"] + t["nRP"], t["nRC"])


def test_refab_blocks_every_bank_of_the_rank():
    spec = ddr4()
    t = spec.timing
    tree = NodeTree(spec)
    ids = spec.command_index
    tree.issue(ids["REFab"], addr(bg=-1, bank=-1), 100)
    for bg, b in itertools.product(range(2), range(2)):
        assert tree.state_of(spec.bank_index, addr(bg=bg, bank=b)) == ("Closed", None)
        assert tree.ready_at(ids["ACT"], tree.locate(addr(bg=bg, bank=b))) == 100 + t["nRFC"]
    assert tree.ready_at(ids["ACT"], tree.locate(addr(rank=1))) < 100


def test_ccd_short_vs_long():
    spec = ddr4()
    t = spec.timing
    tree = NodeTree(spec)
    ids = spec.command_index
    for bg, b in ((0, 0), (0, 1), (1, 0)):
        tree.issue(ids["ACT"], addr(bg=bg, bank=b, row=1), 100 * (2 * bg + b))
    clk = 1000
    tree.issue(ids["RD"], addr(bg=0, bank=0, row=1, col=0), clk)
    rd = ids["RD"]
    other_group = tree.locate(addr(bg=1, bank=0))
    same_group = tree.locate(addr(bg=0, bank=1))
    assert tree.ready_at(rd, other_group) == clk + max(t["nCCD_S"], t["nBL"])
    assert tree.ready_at(rd, same_group) == clk + t["nCCD_L"]


def test_issue_checks_state_and_timing():
    spec = ddr4()
    tree = NodeTree(spec)
    ids = spec.command_index
    with pytest.raises(ProtocolViolation):
        tree.issue(ids["RD"], addr(row=1, col=0), 0)
    tree.issue(ids["ACT"], addr(row=1), 0)
    with pytest.raises(ProtocolViolation):
        tree.issue(ids["RD"], addr(row=1, col=0), 1)


# -- prerequisites -------------------------------------------------------------------


def test_prerequisite_decode_chain():
    spec = ddr4()
    tree = NodeTree(spec)
    ids = spec.command_index
    assert tree.prerequisite(ids["RD"], addr(row=1, col=0)) == ids["ACT"]
    tree.issue(ids["ACT"], addr(row=1), 0)
    assert tree.prerequisite(ids["RD"], addr(row=1, col=0)) == ids["RD"]
    assert tree.prerequisite(ids["WR"], addr(row=2, col=0)) == ids["PRE"]
    assert tree.prerequisite(ids["REFab"], addr(bg=-1, bank=-1)) == ids["PREab"]


def test_rfmab_prerequisite_ddr5():
    spec = build_standard("DDR5", SMALL)
    tree = NodeTree(spec)
    ids = spec.command_index
    rank = (0, 0, -1, -1, -1, -1)
    assert tree.prerequisite(ids["RFMab"], rank) == ids["RFMab"]
    tree.issue(ids["ACT"], (0, 0, 1, 0, 3, -1), 0)
    assert tree.prerequisite(ids["RFMab"], rank) == ids["PREab"]


def test_unreachable_command_raises():
    def loop(tree, cmd, loc, addr):
        return tree.ids.PRE if cmd == tree.ids.RD else tree.ids.RD

    spec = toy([TimingConstraint("bank", ("ACT",), ("RD",), "nA")])
    spec = spec.replace(prereqs={("bank", "RD"): loop, ("bank", "PRE"): loop})
    with pytest.raises(NoPathToCommand):
        NodeTree(spec).prerequisite(spec.command_index["RD"], (0, 0, 1, 0))


# -- properties over random command sequences ------------------------------------------

_step = st.tuples(
    st.sampled_from(["RD", "WR", "RDA", "WRA", "REFab", "PREab", "PRE"]),
    st.integers(0, 1), st.integers(0, 1), st.integers(0, 1), st.integers(0, 7), st.integers(0, 15),
    st.integers(0, 30),
)


def _walk(spec, steps):
    """Drive a tree through ``steps``; yields (tree, history, clk) after each issue."""
    tree = NodeTree(spec)
    ids = spec.command_index
    history = []
    clk = 0
    for name, rank, bg, bank, row, col, slack in steps:
        full = (0, rank, bg, bank, row, col)
        goal = ids[name]
        for _ in range(4):
            cmd = tree.prerequisite(goal, full)
            cname = spec.commands[cmd]
            depth = spec.level_index[spec.scopes[cname]]
            a = tuple(x if i <= depth else -1 for i, x in enumerate(full))
            ready = tree.ready_at(cmd, tree.locate(a))
            yield tree, history, cname, a, ready
            clk = max(clk + 1, ready + slack % 3)
            tree.issue(cmd, a, clk)
            history.append((clk, cname, a))
            if cmd == goal:
                break
        else:
            raise AssertionError(f"{name} not reached within 4 decode steps")


@settings(max_examples=60, deadline=None)
@given(st.lists(_step, min_size=1, max_size=25))
def test_readiness_matches_pairwise_reference(steps):
    spec = ddr4()
    for tree, history, cname, a, ready in _walk(spec, steps):
        assert ready == reference_ready(spec, history, cname, a), (cname, a)


@settings(max_examples=40, deadline=None)
@given(st.lists(_step, min_size=1, max_size=15), st.integers(0, 10))
def test_queries_are_pure(steps, probes):
    spec = ddr4()
    rng = random.Random(probes)
    for tree, _h, _c, _a, _r in _walk(spec, steps):
        before = tree.snapshot()
        for _ in range(probes):
            cmd = rng.randrange(len(spec.commands))
            full = (0, rng.randrange(2), rng.randrange(2), rng.randrange(2), rng.randrange(8), rng.randrange(16))
            tree.prerequisite(cmd, full)
            tree.check_ready(cmd, full, rng.randrange(1000))
        assert tree.snapshot() == before


@settings(max_examples=40, deadline=None)
@given(st.lists(_step, min_size=1, max_size=20))
def test_readiness_never_moves_earlier(steps):
    spec = ddr4()
    seen: dict = {}
    for tree, _h, _c, _a, _r in _walk(spec, steps):
        for cmd, row in enumerate(tree.next_ready):
            for node, v in enumerate(row):
                assert v >= seen.get((cmd, node), 0)
                seen[(cmd, node)] = v


def test_window_history_is_bounded():
    spec = ddr4(nRRD_S=1, nRRD_L=1, nRC=74)
    tree = NodeTree(spec)
    ids = spec.command_index
    clk = 0
    for i in range(40):
        bg, b = divmod(i % 4, 2)
        tree.issue(ids["PRE"], addr(bg=bg, bank=b), clk + 1000 * i)
        tree.issue(ids["ACT"], addr(bg=bg, bank=b, row=i % 8), clk + 1000 * i + 100)
    assert all(len(h) <= 4 for h in tree._history.values())
