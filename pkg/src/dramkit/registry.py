"""Interface/implementation catalog and the config-driven graph builder.

Every swappable component is a class exposing ``params`` (name -> default)
and ``slots`` (config key -> interface name for nested components).  The
builder validates a config node against those declarations, materializes the
defaults into the effective config, and hands the component a
:class:`BuildContext` through which it builds its own children.  No component
names a concrete class of a peer.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Mapping

import yaml

from .errors import (
    BadParameter,
    DuplicateImplementation,
    MissingComponent,
    UnknownImplementation,
    UnknownInterface,
)

INTERFACES = (
    "Frontend",
    "MemorySystem",
    "AddrMapper",
    "DRAM",
    "Controller",
    "Scheduler",
    "RefreshManager",
    "RowPolicy",
    "ControllerPlugin",
)

TOP_LEVEL_SLOTS = {"Frontend": "Frontend", "MemorySystem": "MemorySystem"}
TOP_LEVEL_PARAMS = {"seed": 0}


class Component:
    """Base for registered implementations.

    Subclasses list their parameters in ``params`` and nested components in
    ``slots``; a slot whose config value is a list builds one component per
    entry (plugin lists).
    """

    interface: str = ""
    params: dict[str, Any] = {}
    slots: dict[str, str] = {}
    list_slots: tuple[str, ...] = ()

    def __init__(self, params: dict, ctx: "BuildContext"):
        self.p = params
        self.ctx = ctx

    @classmethod
    def validate(cls, params: dict, path: str) -> None:
        """Hook for implementation-specific parameter checks."""


class Catalog:
    def __init__(self, interfaces=INTERFACES):
        self.entries: dict[str, dict[str, Callable]] = {name: {} for name in interfaces}

    def add_interface(self, name: str) -> None:
        self.entries.setdefault(name, {})

    def register_implementation(self, interface_name: str, impl_name: str, factory) -> None:
        if interface_name not in self.entries:
            raise UnknownInterface(f"unknown interface {interface_name!r}")
        for iface, impls in self.entries.items():
            if impl_name in impls:
                raise DuplicateImplementation(f"{impl_name!r} is already registered under {iface}")
        self.entries[interface_name][impl_name] = factory

    def resolve(self, interface_name: str, impl_name: str):
        if interface_name not in self.entries:
            raise UnknownInterface(f"unknown interface {interface_name!r}")
        impls = self.entries[interface_name]
        if impl_name not in impls:
            known = ", ".join(sorted(impls)) or "none"
            raise UnknownImplementation(
                f"no implementation {impl_name!r} for interface {interface_name} (known: {known})"
            )
        return impls[impl_name]

    def implementations(self, interface_name: str) -> list[str]:
        return sorted(self.entries.get(interface_name, ()))


_DEFAULT: Catalog | None = None


def populate(catalog: Catalog) -> Catalog:
    """Run each module's registration routine against ``catalog``."""
    from . import controller, memsys, mitigations, standards

    for module in (memsys, standards, controller, mitigations):
        module.register(catalog)
    return catalog


def default_catalog() -> Catalog:
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = populate(Catalog())
    return _DEFAULT


def _check_type(value, default, path):
    if default is None:
        return value
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise BadParameter(path, f"expected a boolean, got {value!r}")
    elif isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise BadParameter(path, f"expected an integer, got {value!r}")
    elif isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise BadParameter(path, f"expected a number, got {value!r}")
        value = float(value)
    elif isinstance(default, str):
        if not isinstance(value, str):
            raise BadParameter(path, f"expected a string, got {value!r}")
    elif isinstance(default, (dict, list)):
        if not isinstance(value, type(default)):
            raise BadParameter(path, f"expected a {type(default).__name__}, got {value!r}")
    return value


class BuildContext:
    """Connector handed to a component while it is being built."""

    def __init__(self, builder: "Builder", path: str, node: Mapping, effective: dict, env: dict):
        self.builder = builder
        self.path = path
        self.node = node
        self.effective = effective
        self.env = env

    def has_child(self, slot: str) -> bool:
        return self.node.get(slot) is not None

    def build_child(self, slot: str, **connect):
        cls = self.builder.component_class_for_slot(self, slot)
        iface = cls.slots[slot]
        env = {**self.env, **connect}
        return self.builder.build(iface, self.node.get(slot), f"{self.path}.{slot}", self.effective, slot, env)

    def build_children(self, slot: str, **connect) -> list:
        cls = self.builder.component_class_for_slot(self, slot)
        iface = cls.slots[slot]
        entries = self.node.get(slot) or []
        if not isinstance(entries, list):
            raise BadParameter(f"{self.path}.{slot}", "expected a list of components")
        env = {**self.env, **connect}
        out = []
        eff_list = self.effective[slot] = []
        for i, entry in enumerate(entries):
            holder: dict = {}
            out.append(self.builder.build(iface, entry, f"{self.path}.{slot}[{i}]", holder, "_", env))
            eff_list.append(holder["_"])
        return out


class Builder:
    def __init__(self, catalog: Catalog):
        self.catalog = catalog
        self._classes: dict[str, type] = {}

    def component_class_for_slot(self, ctx: BuildContext, slot: str):
        cls = self._classes[ctx.path]
        if slot not in cls.slots:
            raise KeyError(f"{cls.__name__} declares no slot {slot!r}")
        return cls

    def build(self, interface: str, node, path: str, parent_effective: dict, key: str, connect: dict):
        if node is None:
            raise MissingComponent(key if key != "_" else interface, path.rsplit(".", 1)[0] if "." in path else "")
        if not isinstance(node, Mapping):
            raise BadParameter(path, "expected a mapping with an 'impl' key")
        impl = node.get("impl")
        if not isinstance(impl, str):
            raise BadParameter(f"{path}.impl", "missing or non-string implementation name")
        cls = self.catalog.resolve(interface, impl)
        allowed = {"impl", *cls.params, *cls.slots}
        for k in node:
            if k not in allowed:
                raise BadParameter(f"{path}.{k}", f"unknown parameter for {interface} {impl}")
        params = {}
        for name, default in cls.params.items():
            value = node.get(name, copy.deepcopy(default))
            params[name] = _check_type(value, default, f"{path}.{name}")
        cls.validate(params, path)
        effective = {"impl": impl, **copy.deepcopy(params)}
        parent_effective[key] = effective
        ctx = BuildContext(self, path, node, effective, connect)
        self._classes[path] = cls
        obj = cls(params, ctx)
        for slot in cls.slots:
            if slot in cls.list_slots:
                effective.setdefault(slot, [])
            elif slot not in effective and node.get(slot) is not None:
                raise BadParameter(f"{path}.{slot}", f"{impl} did not build its {slot}")
        return obj


@dataclass
class SimulationGraph:
    frontend: Any
    memory_system: Any
    effective_config: dict
    seed: int = 0

    def effective_config_text(self) -> str:
        return dump_config(self.effective_config)

    def write_effective_config(self, outdir) -> Path:
        out = Path(outdir)
        out.mkdir(parents=True, exist_ok=True)
        path = out / "effective-config.yaml"
        path.write_text(self.effective_config_text())
        return path


def build_simulation(config: Mapping, catalog: Catalog | None = None) -> SimulationGraph:
    """Instantiate and wire the whole simulation described by ``config``."""
    catalog = catalog or default_catalog()
    if not isinstance(config, Mapping):
        raise BadParameter("", "config must be a mapping")
    for k in config:
        if k not in TOP_LEVEL_SLOTS and k not in TOP_LEVEL_PARAMS:
            raise BadParameter(k, "unknown top-level key")
    effective: dict = {}
    for name, default in TOP_LEVEL_PARAMS.items():
        effective[name] = _check_type(config.get(name, default), default, name)
    builder = Builder(catalog)
    env = {"seed": effective["seed"]}
    memsys = builder.build("MemorySystem", config.get("MemorySystem"), "MemorySystem", effective, "MemorySystem", env)
    frontend = builder.build("Frontend", config.get("Frontend"), "Frontend", effective, "Frontend", env)
    ordered = {k: effective[k] for k in ("seed", "Frontend", "MemorySystem")}
    return SimulationGraph(frontend, memsys, ordered, seed=effective["seed"])


def load_config(path) -> dict:
    try:
        data = yaml.safe_load(Path(path).read_text())
    except yaml.YAMLError as exc:
        raise BadParameter(str(path), f"invalid YAML: {exc}") from None
    if not isinstance(data, dict):
        raise BadParameter(str(path), "top level must be a mapping")
    return data


def dump_config(config: Mapping) -> str:
    return yaml.safe_dump(config, sort_keys=False, default_flow_style=False)
