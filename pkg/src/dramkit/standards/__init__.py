from .common import LEVELS, OrgPreset, org_presets, resolve_org, resolve_timing, timing_presets
from .component import DDR4Device, DDR5Device, DRAMDevice, register
from .ddr import BUILDERS, DDR4_TIMING, DDR5_TIMING, build_ddr4, build_ddr5, build_standard

__all__ = [
    "BUILDERS",
    "DDR4Device",
    "DDR5Device",
    "DRAMDevice",
    "DDR4_TIMING",
    "DDR5_TIMING",
    "LEVELS",
    "OrgPreset",
    "build_ddr4",
    "build_ddr5",
    "build_standard",
    "org_presets",
    "resolve_org",
    "resolve_timing",
    "register",
    "timing_presets",
]
