"""Reusable command behaviors shared by every DRAM standard.

Prerequisite functions have the signature ``fn(tree, cmd, loc, addr) -> cmd``
and must not mutate ``tree``.  Action functions have the signature
``fn(tree, cmd, loc, addr, clk)`` and apply a command's state change.

``loc`` holds the flat node id at every node level (channel .. bank) and
``addr`` is the full address vector.  Command indices are looked up through
``tree.ids``, which the spec resolves once at initialization, so the same
function object works for any standard that defines the commands it names
(listed in its ``requires`` attribute).
"""

from __future__ import annotations


def _requires(*names):
    def deco(fn):
        fn.requires = names
        return fn

    return deco


# -- prerequisites -------------------------------------------------------------


@_requires("PREab")
def require_all_banks_closed(tree, cmd, loc, addr):
    open_row = tree.open_row
    lo, hi = tree.banks_under(tree.scope_level[cmd], loc)
    for b in range(lo, hi):
        if open_row[b] >= 0:
            return tree.ids.PREab
    return cmd


@_requires("PRE")
def require_bank_closed(tree, cmd, loc, addr):
    if tree.open_row[loc[tree.bank_level]] >= 0:
        return tree.ids.PRE
    return cmd


@_requires("ACT", "PRE")
def require_row_open(tree, cmd, loc, addr):
    row = tree.open_row[loc[tree.bank_level]]
    if row == addr[tree.row_level]:
        return cmd
    if row < 0:
        return tree.ids.ACT
    return tree.ids.PRE


@_requires("PRE")
def require_same_row_or_precharge(tree, cmd, loc, addr):
    """Allow ``cmd`` on a closed bank or on the target row; otherwise close."""
    row = tree.open_row[loc[tree.bank_level]]
    if row < 0 or row == addr[tree.row_level]:
        return cmd
    return tree.ids.PRE


# -- actions -------------------------------------------------------------------


def open_row(tree, cmd, loc, addr, clk):
    b = loc[tree.bank_level]
    tree.open_row[b] = addr[tree.row_level]
    tree.row_accesses[b] = 0


def close_row(tree, cmd, loc, addr, clk):
    b = loc[tree.bank_level]
    tree.open_row[b] = -1
    tree.row_accesses[b] = 0


def close_all_rows(tree, cmd, loc, addr, clk):
    lo, hi = tree.banks_under(tree.scope_level[cmd], loc)
    open_rows = tree.open_row
    accesses = tree.row_accesses
    for b in range(lo, hi):
        open_rows[b] = -1
        accesses[b] = 0


def consume_column(tree, cmd, loc, addr, clk):
    tree.row_accesses[loc[tree.bank_level]] += 1


def consume_column_and_close(tree, cmd, loc, addr, clk):
    b = loc[tree.bank_level]
    tree.open_row[b] = -1
    tree.row_accesses[b] = 0


PREREQS = {
    fn.__name__: fn
    for fn in (
        require_all_banks_closed,
        require_bank_closed,
        require_row_open,
        require_same_row_or_precharge,
    )
}

ACTIONS = {
    fn.__name__: fn
    for fn in (open_row, close_row, close_all_rows, consume_column, consume_column_and_close)
}


def behavior_name(fn) -> str:
    for table in (PREREQS, ACTIONS):
        for name, known in table.items():
            if known is fn:
                return name
    raise KeyError(f"{fn!r} is not a library behavior")
