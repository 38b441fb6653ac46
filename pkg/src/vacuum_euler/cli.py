"""Command line entry point ``vacuum-euler``."""

from __future__ import annotations

import argparse
import json
import sys

from .errors import ConfigError, VacuumEulerError
from .harness import DRIVERS, EXIT_CONFIG, RunConfig, load_config, parse_config, run_scenario

# which overrides each subcommand honours
_EPS = {"simulate", "convergence", "compare", "linearize"}
_NODES = {"regstudy", "interp-check"}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vacuum-euler", description="Vacuum-boundary Euler solver and studies.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in DRIVERS:
        s = sub.add_parser(name)
        s.add_argument("--config", help="JSON run configuration (defaults are used when omitted)")
        s.add_argument("--out", help="output directory, overrides the config's 'outputs'")
        if name in _EPS:
            s.add_argument("--eps", type=float, action="append" if name == "convergence" else "store",
                           help="time step (repeatable for convergence)")
        if name in _NODES or name in _EPS:
            s.add_argument("--nodes", type=int, help="node count")
    return p


def _config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else parse_config("{}")
    over = {}
    if args.out:
        over["outputs"] = args.out
    if getattr(args, "nodes", None) is not None and args.command in _EPS:
        over["node_count"] = args.nodes
    return cfg.with_overrides(**over) if over else cfg


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _config(args)
        kw = {}
        if args.command in _EPS and args.eps is not None:
            kw["eps_list" if args.command == "convergence" else "eps"] = args.eps
        if args.command in _NODES and args.nodes is not None:
            kw["nodes"] = args.nodes
        code, summary = run_scenario(cfg, args.command, **kw)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except VacuumEulerError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    print(json.dumps(summary, sort_keys=True, default=float))
    return code


if __name__ == "__main__":
    sys.exit(main())
