"""DDR4 and DDR5 device specifications."""

from __future__ import annotations

from typing import Mapping

from ..dramspec import DeviceSpec, TimingConstraint as T
from ..dramspec import library as lib
from ..errors import BadParameter
from .common import LEVELS, OrgPreset, resolve_org, resolve_timing

RD_ = ("RD", "RDA")
WR_ = ("WR", "WRA")
CAS = RD_ + WR_


def _constraints(refreshes: tuple[str, ...], extra: tuple[T, ...] = ()) -> tuple[T, ...]:
    """Permutation records common to the DDR4 family.

    ``refreshes`` lists the all-bank maintenance commands (REFab, and RFMab on
    DDR5); each one blocks the rank for its own recovery symbol.
    """
    return (
        # data bus occupancy
        T("channel", RD_, RD_, "nBL"),
        T("channel", WR_, WR_, "nBL"),
        # rank, or different bank group
        T("rank", RD_, RD_, "nCCD_S"),
        T("rank", WR_, WR_, "nCCD_S"),
        T("rank", RD_, WR_, "nCL + nBL + 2 - nCWL"),
        T("rank", WR_, RD_, "nCWL + nBL + nWTR_S"),
        # rank-to-rank switching
        T("rank", RD_, CAS, "nBL + nCS", sibling=True),
        T("rank", WR_, RD_, "nCL + nBL + nCS - nCWL", sibling=True),
        T("rank", WR_, WR_, "nBL + nCS", sibling=True),
        T("rank", RD_, ("PREab",), "nRTP"),
        T("rank", WR_, ("PREab",), "nCWL + nBL + nWR"),
        T("rank", ("ACT",), ("ACT",), "nRRD_S"),
        T("rank", ("ACT",), ("ACT",), "nFAW", window=4),
        T("rank", ("ACT",), ("PREab",), "nRAS"),
        T("rank", ("PREab",), ("ACT",), "nRP"),
        T("rank", ("ACT",), refreshes, "nRC"),
        T("rank", ("PRE", "PREab"), refreshes, "nRP"),
        T("rank", ("RDA",), refreshes, "nRTP + nRP"),
        T("rank", ("WRA",), refreshes, "nCWL + nBL + nWR + nRP"),
        T("rank", ("REFab",), ("ACT", "PREab") + refreshes, "nRFC"),
        *extra,
        # same bank group
        T("bankgroup", RD_, RD_, "nCCD_L"),
        T("bankgroup", WR_, WR_, "nCCD_L"),
        T("bankgroup", WR_, RD_, "nCWL + nBL + nWTR_L"),
        T("bankgroup", ("ACT",), ("ACT",), "nRRD_L"),
        # same bank
        T("bank", ("ACT",), ("ACT",), "nRC"),
        T("bank", ("ACT",), CAS, "nRCD"),
        T("bank", ("ACT",), ("PRE",), "nRAS"),
        T("bank", ("PRE",), ("ACT",), "nRP"),
        T("bank", ("RD",), ("PRE",), "nRTP"),
        T("bank", ("WR",), ("PRE",), "nCWL + nBL + nWR"),
        T("bank", ("RDA",), ("ACT",), "nRTP + nRP"),
        T("bank", ("WRA",), ("ACT",), "nCWL + nBL + nWR + nRP"),
    )


DDR4_COMMANDS = ("ACT", "PRE", "PREab", "RD", "WR", "RDA", "WRA", "REFab")

DDR4_SCOPES = {
    "ACT": "row",
    "PRE": "bank",
    "PREab": "rank",
    "RD": "column",
    "WR": "column",
    "RDA": "column",
    "WRA": "column",
    "REFab": "rank",
}

DDR4_KINDS = {
    "ACT": {"opens_row"},
    "PRE": {"closes_row"},
    "PREab": {"closes_all"},
    "RD": {"read"},
    "WR": {"write"},
    "RDA": {"read", "closes_row"},
    "WRA": {"write", "closes_row"},
    "REFab": {"refresh"},
}

DDR4_TIMING = _constraints(("REFab",))

DDR5_TIMING = _constraints(
    ("REFab", "RFMab"),
    extra=(T("rank", ("RFMab",), ("ACT", "PREab", "REFab", "RFMab"), "nRFM"),),
)


def _prereqs(*maintenance: str) -> dict:
    table = {("bank", "ACT"): lib.require_bank_closed}
    for cmd in CAS:
        table[("bank", cmd)] = lib.require_row_open
    for cmd in maintenance:
        table[("rank", cmd)] = lib.require_all_banks_closed
    return table


_ACTIONS = {
    ("bank", "ACT"): lib.open_row,
    ("bank", "PRE"): lib.close_row,
    ("rank", "PREab"): lib.close_all_rows,
    ("bank", "RD"): lib.consume_column,
    ("bank", "WR"): lib.consume_column,
    ("bank", "RDA"): lib.consume_column_and_close,
    ("bank", "WRA"): lib.consume_column_and_close,
}


def _check_org(org: OrgPreset, standard: str):
    missing = [lv for lv in LEVELS if lv not in org.fanouts]
    if missing or len(org.fanouts) != len(LEVELS):
        raise BadParameter(f"{standard}.org", f"levels must be exactly {', '.join(LEVELS)}")


def _required(timings: Mapping[str, int], names, standard: str):
    missing = [n for n in names if n not in timings]
    if missing:
        raise BadParameter(f"{standard}.timing", f"missing timing values {missing}")


def build_ddr4(org: OrgPreset, timings: Mapping[str, int]) -> DeviceSpec:
    _check_org(org, "DDR4")
    _required(timings, ("nRCD", "nRP", "nRAS", "nRC", "nCL", "nCWL", "nBL", "nRFC", "nREFI"), "DDR4")
    return DeviceSpec(
        name="DDR4",
        levels=LEVELS,
        fanouts=org.fanouts,
        commands=DDR4_COMMANDS,
        scopes=DDR4_SCOPES,
        kinds=DDR4_KINDS,
        timing=timings,
        constraints=DDR4_TIMING,
        prereqs=_prereqs("REFab"),
        actions=_ACTIONS,
        autoprecharge={"RD": "RDA", "WR": "WRA"},
        org_info=org.info(),
    )


def build_ddr5(org: OrgPreset, timings: Mapping[str, int]) -> DeviceSpec:
    _check_org(org, "DDR5")
    _required(timings, ("nRCD", "nRP", "nRAS", "nRC", "nCL", "nCWL", "nBL", "nRFC", "nREFI", "nRFM"), "DDR5")
    return DeviceSpec(
        name="DDR5",
        levels=LEVELS,
        fanouts=org.fanouts,
        commands=DDR4_COMMANDS + ("RFMab",),
        scopes={**DDR4_SCOPES, "RFMab": "rank"},
        kinds={**DDR4_KINDS, "RFMab": {"refresh"}},
        timing=timings,
        constraints=DDR5_TIMING,
        prereqs=_prereqs("REFab", "RFMab"),
        actions=_ACTIONS,
        autoprecharge={"RD": "RDA", "WR": "WRA"},
        org_info=org.info(),
    )


BUILDERS = {"DDR4": build_ddr4, "DDR5": build_ddr5}


def build_standard(standard: str, org: Mapping | None = None, timing: Mapping | None = None) -> DeviceSpec:
    """Build a preset spec from config-style ``org``/``timing`` mappings."""
    try:
        builder = BUILDERS[standard]
    except KeyError:
        raise BadParameter("DRAM.impl", f"unknown standard {standard!r}") from None
    return builder(resolve_org(standard, org), resolve_timing(standard, timing))
