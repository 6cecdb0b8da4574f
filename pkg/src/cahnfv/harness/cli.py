"""Command-line entry point: ``cahnfv run <preset|config>`` and ``cahnfv list``.

Exit codes: 0 success, 2 configuration error, 3 solver failure,
4 invariant violation (strict mode).
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from ..diagnostics import InvariantViolation
from .config import ParseError, ValidationError, apply_overrides, parse_config
from .runner import RunFailure, run
from .scenarios import PRESET_NAMES, UnknownScenario, expand, preset

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_INVARIANT = 0, 2, 3, 4


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cahnfv", description="Finite-volume Cahn-Hilliard scenarios")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a preset or a config file")
    r.add_argument("target", help="preset name or path to a key = value config file")
    r.add_argument("--out", default="out", help="output directory (default: ./out)")
    r.add_argument("--seed", type=int)
    r.add_argument("--dt", type=float)
    r.add_argument("--cells", type=int, help="cells per axis")
    r.add_argument("--schedule", choices=("seq", "oddeven"))
    r.add_argument("--strict", action="store_true", help="stop at the first invariant violation")
    r.add_argument("--snapshots", help="comma-separated snapshot times")
    r.add_argument("--desk", action="store_true", help="use the reduced desk-scale preset")
    sub.add_parser("list", help="list presets")
    return p


def _scenario(args):
    target = Path(args.target)
    if args.target in PRESET_NAMES:
        sc = preset(args.target, args.desk)
    elif target.is_file():
        sc = parse_config(target, args.desk)
    else:
        raise UnknownScenario(f"{args.target!r} is neither a preset nor a config file")
    pairs = {}
    for key, val in (("seed", args.seed), ("dt", args.dt), ("schedule", args.schedule), ("snapshots", args.snapshots)):
        if val is not None:
            pairs[key] = (str(val), None)
    if args.cells is not None:
        pairs["cells"] = (str(args.cells), None)
    if args.strict:
        pairs["strict"] = ("on", None)
    return apply_overrides(sc, pairs) if pairs else sc


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if args.command == "list":
        for name in PRESET_NAMES:
            sc = preset(name)
            runs = len(expand(sc))
            dims = "x".join(str(n) for n in sc.cells)
            print(f"{name:22s} {sc.dim}D {dims:>8s}  dt={sc.dt:g} t_end={sc.t_end:g}  runs={runs}")
        return EXIT_OK
    try:
        sc = _scenario(args)
    except (ParseError, ValidationError, UnknownScenario, OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        out = run(sc, args.out)
    except RunFailure as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except InvariantViolation as exc:
        print(f"invariant violation ({exc.kind}) at step {getattr(exc, 'step', '?')}: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    print(out.summary_path)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
