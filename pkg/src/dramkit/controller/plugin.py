"""The controller-side extension contract.

A plugin sees the controller only through :class:`PluginHost`: it can read
the device spec and (read-only) device state, observe every issued command,
and inject maintenance requests into the priority queue.  Nothing else in
the controller is reachable, so mitigations never need controller edits.
"""

from __future__ import annotations

import random
from typing import Sequence

from ..registry import Component
from .request import MAINTENANCE, Request


class PluginHost:
    def __init__(self, controller):
        self._ctrl = controller
        self.spec = controller.spec
        self.channel = controller.channel
        self.shared: dict = controller.shared
        self.seed = controller.seed

    @property
    def clk(self) -> int:
        return self._ctrl.clk

    @property
    def device(self):
        """The device state tree; plugins must treat it as read-only."""
        return self._ctrl.tree

    def rng(self, name: str) -> random.Random:
        """A generator seeded from the run seed, the channel and ``name``."""
        return random.Random(f"{self.seed}/{self.channel}/{name}")

    def maintenance(self, commands: Sequence[str], addr_vec: Sequence[int], origin: str = "") -> Request:
        """Make a maintenance request that issues ``commands`` in order at ``addr_vec``.

        Levels below the first command's scope may be -1.
        """
        for c in commands:
            self.spec.resolve_command(c)
        return Request(MAINTENANCE, addr_vec=addr_vec, maintenance=tuple(commands), origin=origin)

    def inject(self, req: Request) -> bool:
        """Queue ``req`` with priority; False if the priority queue is full."""
        return self._ctrl.inject(req)

    def pending_maintenance(self) -> int:
        return len(self._ctrl.queues.priority)


class ControllerPlugin(Component):
    """Base class: every hook is a no-op.

    ``on_command_issued`` receives the command index, the address vector with
    levels below the command's scope set to -1, and the issue cycle.
    ``next_wakeup`` returns the next cycle at which ``on_tick`` must run, or
    None when the plugin is purely event-driven.  The default is
    conservative: every cycle.
    """

    interface = "ControllerPlugin"
    params = {}

    def bind(self, host: PluginHost) -> None:
        self.host = host

    def on_tick(self, clk: int) -> None:
        pass

    def on_command_issued(self, cmd: int, addr_vec: tuple, clk: int) -> None:
        pass

    def next_wakeup(self, clk: int) -> int | None:
        return clk + 1

    def finish(self, clk: int) -> None:
        pass

    def stats(self) -> dict:
        return {}


class NoOpPlugin(ControllerPlugin):
    """Observes nothing and injects nothing."""

    def next_wakeup(self, clk: int):
        return None
