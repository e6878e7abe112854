"""DRAM device components: build a preset spec and its runtime state tree."""

from __future__ import annotations

from ..dramspec import NodeTree
from ..errors import BadParameter
from ..registry import Component
from .common import org_preset_name, resolve_org, resolve_timing, timing_preset_name
from .ddr import BUILDERS


class DRAMDevice(Component):
    """``org`` and ``timing`` each take a ``preset`` name plus overrides."""

    interface = "DRAM"
    standard = ""
    params = {"org": {}, "timing": {}}

    def __init__(self, params, ctx):
        super().__init__(params, ctx)
        std = self.standard
        self.org = resolve_org(std, params["org"], f"{ctx.path}.org")
        timing = resolve_timing(std, params["timing"], f"{ctx.path}.timing")
        try:
            spec = BUILDERS[std](self.org, timing)
        except BadParameter as exc:
            raise BadParameter(f"{ctx.path}.{exc.path}", exc.message) from None
        self.spec = self.transform(spec)
        self.tree = NodeTree(self.spec)
        ctx.effective["org"] = {"preset": org_preset_name(std, params["org"]), **self.org.fanouts,
                                "channel_width": self.org.channel_width, "prefetch": self.org.prefetch}
        ctx.effective["timing"] = {"preset": timing_preset_name(std, params["timing"]), **timing}

    def transform(self, spec):
        """Hook for subclasses that derive a modified device from the preset."""
        return spec

    @property
    def transaction_bytes(self) -> int:
        return self.org.transaction_bytes


class DDR4Device(DRAMDevice):
    standard = "DDR4"


class DDR5Device(DRAMDevice):
    standard = "DDR5"


def register(catalog) -> None:
    catalog.register_implementation("DRAM", "DDR4", DDR4Device)
    catalog.register_implementation("DRAM", "DDR5", DDR5Device)
