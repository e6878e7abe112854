"""RowHammer threshold sweeps: one simulation per (mitigation, threshold) cell."""

from __future__ import annotations

import csv
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Mapping, Sequence

import yaml

from ..errors import BadParameter
from ..registry import build_simulation, default_catalog
from .configs import with_plugins

BASELINE = "baseline"


@dataclass
class Cell:
    mitigation: str
    t_rh: int | None
    cycles: int | None = None
    slowdown: float | None = None
    injected: int | None = None
    status: str = "ok"


def cell_params(mitigation: str, t_rh: int) -> dict:
    """Plugin config for ``mitigation`` at threshold ``t_rh``."""
    cls = default_catalog().resolve("ControllerPlugin", mitigation)
    validate = getattr(cls, "validate", None)
    params = cls.for_threshold(t_rh) if hasattr(cls, "for_threshold") else {"t_rh": t_rh}
    if validate is not None:
        full = {**getattr(cls, "params", {}), **params}
        validate(full, f"plugins[{mitigation}]")
    return {"impl": mitigation, **params}


def _simulate(config: Mapping) -> tuple[int, int]:
    from ..memsys import run

    stats = run(build_simulation(config))
    injected = sum(v for k, v in stats.items() if k.startswith("plugin.") and k.endswith(".injected"))
    return stats["cycles"], injected


def _run_cell(config: Mapping) -> tuple[int | None, int | None, str]:
    try:
        cycles, injected = _simulate(config)
        return cycles, injected, "ok"
    except Exception as exc:  # a failed cell is reported, never fatal to the sweep
        return None, None, f"error: {type(exc).__name__}: {exc}"


def sweep(
    config: Mapping,
    mitigations: Sequence[str],
    thresholds: Sequence[int],
    *,
    jobs: int | None = None,
) -> list[Cell]:
    """Baseline first, then every mitigation at every threshold in the order given."""
    if not mitigations or not thresholds:
        raise BadParameter("sweep", "need at least one mitigation and one threshold")
    for t in thresholds:
        if t < 1:
            raise BadParameter("thresholds", f"thresholds must be >= 1, got {t}")
    cells = [Cell(BASELINE, None)]
    configs = [with_plugins(config, [])]
    for m in mitigations:
        for t in thresholds:
            cells.append(Cell(m, t))
            configs.append(with_plugins(config, [cell_params(m, t)]))

    jobs = jobs or os.cpu_count() or 1
    if jobs == 1:
        results = [_run_cell(c) for c in configs]
    else:
        results = []
        with ProcessPoolExecutor(max_workers=min(jobs, len(configs))) as pool:
            futures = [pool.submit(_run_cell, c) for c in configs]
            for f in futures:
                try:
                    results.append(f.result())
                except Exception as exc:  # the worker process itself died
                    results.append((None, None, f"error: {type(exc).__name__}: {exc}"))

    for cell, (cycles, injected, status) in zip(cells, results):
        cell.cycles, cell.injected, cell.status = cycles, injected, status
    base = cells[0].cycles
    for cell in cells:
        if cell.cycles is not None and base:
            cell.slowdown = round(cell.cycles / base, 6)
    return cells


def write_results(cells: Sequence[Cell], outdir) -> tuple[Path, Path]:
    """``sweep.yaml`` (list of cells) and ``sweep.csv`` (one row per cell)."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    rows = [asdict(c) for c in cells]
    ypath = out / "sweep.yaml"
    ypath.write_text(yaml.safe_dump({"cells": rows}, sort_keys=False))
    cpath = out / "sweep.csv"
    with open(cpath, "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=list(rows[0]))
        w.writeheader()
        for r in rows:
            w.writerow({k: "" if v is None else v for k, v in r.items()})
    return ypath, cpath


def format_table(cells: Sequence[Cell]) -> str:
    lines = [f"{'mitigation':<12} {'t_rh':>6} {'cycles':>12} {'slowdown':>9} {'injected':>9}  status"]
    for c in cells:
        t = "-" if c.t_rh is None else str(c.t_rh)
        cyc = "-" if c.cycles is None else str(c.cycles)
        sd = "-" if c.slowdown is None else f"{c.slowdown:.4f}"
        inj = "-" if c.injected is None else str(c.injected)
        lines.append(f"{c.mitigation:<12} {t:>6} {cyc:>12} {sd:>9} {inj:>9}  {c.status}")
    return "\n".join(lines)
