"""Preset loading and the org/timing tables shared by the shipped standards."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Mapping

import yaml

from ..errors import BadParameter

LEVELS = ("channel", "rank", "bankgroup", "bank", "row", "column")

TIMING_SYMBOLS = (
    "nBL", "nCL", "nRCD", "nRP", "nRAS", "nRC", "nWR", "nRTP", "nCWL",
    "nCCD_S", "nCCD_L", "nRRD_S", "nRRD_L", "nWTR_S", "nWTR_L", "nFAW",
    "nRFC", "nREFI", "nCS",
)  # fmt: skip


@dataclass
class OrgPreset:
    standard: str
    fanouts: dict[str, int]
    density: str = ""
    channel_width: int = 64
    prefetch: int = 8
    dq: int = 8
    extra: dict = field(default_factory=dict)

    @property
    def transaction_bytes(self) -> int:
        return self.channel_width * self.prefetch // 8

    def info(self) -> dict:
        return {
            "density": self.density,
            "dq": self.dq,
            "channel_width": self.channel_width,
            "prefetch": self.prefetch,
        }


@lru_cache(maxsize=None)
def _preset_file(standard: str) -> dict:
    text = resources.files(__package__).joinpath("presets", f"{standard}.yaml").read_text()
    return yaml.safe_load(text)


def org_presets(standard: str) -> dict:
    return _preset_file(standard)["org"]["presets"]


def timing_presets(standard: str) -> dict:
    return _preset_file(standard)["timing"]["presets"]


def resolve_org(standard: str, org: Mapping | None, path: str = "DRAM.org") -> OrgPreset:
    """Start from a named org preset and apply per-level overrides.

    ``org`` may carry ``preset`` plus any of the level names, ``channel_width``
    and ``prefetch``.
    """
    org = dict(org or {})
    table = _preset_file(standard)["org"]
    name = org.pop("preset", table["default"])
    if name not in table["presets"]:
        raise BadParameter(f"{path}.preset", f"unknown {standard} org preset {name!r}")
    base = table["presets"][name]
    fanouts = dict(base["levels"])
    params = {k: base[k] for k in ("density", "channel_width", "prefetch", "dq")}
    for key, value in org.items():
        if key in fanouts:
            fanouts[key] = value
        elif key in params:
            params[key] = value
        else:
            raise BadParameter(f"{path}.{key}", "unknown org parameter")
    for lv, n in fanouts.items():
        if not isinstance(n, int) or n < 1:
            raise BadParameter(f"{path}.{lv}", f"fanout must be a positive integer, got {n!r}")
    if fanouts["column"] % params["prefetch"]:
        raise BadParameter(f"{path}.column", "column count must be a multiple of the prefetch size")
    return OrgPreset(standard=standard, fanouts=fanouts, **params)


def resolve_timing(standard: str, timing: Mapping | None, path: str = "DRAM.timing") -> dict[str, int]:
    timing = dict(timing or {})
    table = _preset_file(standard)["timing"]
    name = timing.pop("preset", table["default"])
    if name not in table["presets"]:
        raise BadParameter(f"{path}.preset", f"unknown {standard} timing preset {name!r}")
    values = {k: v for k, v in table["presets"][name].items() if k != "tCK_ps"}
    for key, value in timing.items():
        if key not in values:
            raise BadParameter(f"{path}.{key}", "unknown timing symbol")
        if not isinstance(value, int) or value < 1:
            raise BadParameter(f"{path}.{key}", f"must be an integer >= 1, got {value!r}")
        values[key] = value
    return values


def timing_preset_name(standard: str, timing: Mapping | None) -> str:
    return (timing or {}).get("preset", _preset_file(standard)["timing"]["default"])


def org_preset_name(standard: str, org: Mapping | None) -> str:
    return (org or {}).get("preset", _preset_file(standard)["org"]["default"])
