"""``simctl``: run, gen, verify and sweep.

Exit codes: 0 success, 1 violations found (or failed sweep cells), 2 usage
or configuration error.
"""

from __future__ import annotations

import argparse
import sys

from ..errors import ProtocolViolation, SimError, WatchdogTimeout
from ..registry import build_simulation, load_config

OK, VIOLATIONS, USAGE = 0, 1, 2
MAX_PRINTED = 50


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE)


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _names(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="simctl", description="Cycle-accurate DRAM simulator.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="simulate one config")
    r.add_argument("-c", "--config", required=True)
    r.add_argument("-o", "--outdir")
    r.add_argument("--trace", help="request trace (overrides Frontend.path)")
    r.add_argument("--record", help="write the command trace CSV to this path")
    r.add_argument("--seed", type=int)

    g = sub.add_parser("gen", help="generate a synthetic request trace")
    g.add_argument("--pattern", required=True, choices=("random", "stream", "hammer"))
    g.add_argument("--count", type=int, required=True)
    g.add_argument("--rw-ratio", type=int, default=4)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--bubbles", type=int, default=0)
    g.add_argument("--max-bubbles", type=int)
    g.add_argument("--aggressor-banks", type=int, default=4, help="hammer: banks under attack")
    g.add_argument("--sides", type=int, default=2, help="hammer: aggressor rows per bank")
    g.add_argument("--standard", default="DDR4", choices=("DDR4", "DDR5"))
    g.add_argument("-o", "--output", required=True)

    v = sub.add_parser("verify", help="check a command trace for timing and state violations")
    v.add_argument("--spec", required=True, type=str.lower, choices=("ddr4", "ddr5"))
    v.add_argument("-c", "--config", help="take org and timing overrides from this config")
    v.add_argument("--trace", required=True)

    s = sub.add_parser("sweep", help="mitigation x threshold slowdown table")
    s.add_argument("-c", "--config", required=True)
    s.add_argument("--mitigations", required=True, type=_names)
    s.add_argument("--thresholds", required=True, type=_ints)
    s.add_argument("--trace", help="request trace (overrides Frontend.path)")
    s.add_argument("-o", "--outdir", default="sweep-out")
    s.add_argument("-j", "--jobs", type=int)
    return p


def _load(path: str, trace: str | None = None) -> dict:
    from .configs import with_trace

    config = load_config(path)
    if trace:
        config = with_trace(config, trace)
    return config


def cmd_run(args) -> int:
    from ..memsys import run
    from .configs import with_plugins

    config = _load(args.config, args.trace)
    if args.seed is not None:
        config["seed"] = args.seed
    if args.record:
        config = with_plugins(config, [{"impl": "CommandTraceRecorder", "path": args.record}])
    graph = build_simulation(config)
    if args.outdir:
        graph.write_effective_config(args.outdir)
    stats = run(graph)
    sys.stdout.write(stats.to_text())
    if args.outdir:
        stats.write(args.outdir)
    return OK


def cmd_gen(args) -> int:
    from .tracegen import gen_trace, write_trace

    entries = gen_trace(
        args.pattern, args.count, args.rw_ratio, args.seed,
        bubbles=args.bubbles, max_bubbles=args.max_bubbles, standard=args.standard,
        aggressor_pairs=args.aggressor_banks, sides=args.sides,
    )
    write_trace(entries, args.output)
    return OK


def _spec_for(args):
    standard = args.spec.upper()
    if not args.config:
        from ..standards import build_standard

        return build_standard(standard)
    from .configs import with_trace

    # only the device matters here; the request trace need not exist
    graph = build_simulation(with_trace(load_config(args.config), ""))
    spec = graph.memory_system.spec
    if spec.name.upper() != standard:
        raise SimError(f"--spec {args.spec} does not match the config's {spec.name} device")
    return spec


def cmd_verify(args) -> int:
    from .verifier import verify_file

    spec = _spec_for(args)
    violations = verify_file(spec, args.trace)
    for v in violations[:MAX_PRINTED]:
        print(v)
    if len(violations) > MAX_PRINTED:
        print(f"... {len(violations) - MAX_PRINTED} more")
    print(f"{len(violations)} violations")
    return VIOLATIONS if violations else OK


def cmd_sweep(args) -> int:
    from .sweep import format_table, sweep, write_results

    config = _load(args.config, args.trace)
    build_simulation(config)  # fail fast on a bad base config
    cells = sweep(config, args.mitigations, args.thresholds, jobs=args.jobs)
    print(format_table(cells))
    ypath, cpath = write_results(cells, args.outdir)
    print(f"wrote {ypath} and {cpath}")
    return OK if all(c.status == "ok" for c in cells) else VIOLATIONS


COMMANDS = {"run": cmd_run, "gen": cmd_gen, "verify": cmd_verify, "sweep": cmd_sweep}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ProtocolViolation, WatchdogTimeout) as exc:
        print(f"simctl: {exc}", file=sys.stderr)
        return VIOLATIONS
    except (SimError, OSError) as exc:
        print(f"simctl: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    raise SystemExit(main())
