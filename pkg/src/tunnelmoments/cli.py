"""Command-line entry point: ``tunnelmoments <command> --config run.json``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .dynamics import ground_state_init
from .errors import ConfigurationError, ConvergenceError, DomainError
from .io import parse_config, resolve_threads, run_scenario

EXIT_OK, EXIT_RUN_FAILED, EXIT_BAD_CONFIG = 0, 1, 2

COMMANDS = {
    "ground-state": "minimize the field-free energy and print the ground state",
    "evolve": "integrate one trajectory and write trajectory.csv",
    "contour": "write an equipotential contour of the effective potential",
    "criteria": "integrate and evaluate the configured exit-time criteria",
    "sweep": "run the configured parameter sweep",
    "backprop": "integrate, back-propagate classically and write backprop.csv",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tunnelmoments", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name, help_text in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, type=Path, help="JSON run configuration")
        p.add_argument("--out", type=Path, default=None, help="output directory (overrides config)")
        p.add_argument("--seed", type=int, default=None, help="reserved; runs are deterministic")
        p.add_argument("--threads", type=int, default=1,
                       help="sweep workers (TUNNEL_THREADS overrides)")
    return parser


def _ground_state(cfg, out_dir: Path):
    gs = ground_state_init(cfg.model, cfg.U)
    report = {
        "model": type(cfg.model).__name__,
        "method": gs.method,
        "energy": gs.energy,
        "x": gs.x.tolist(),
        "s": gs.s.tolist(),
        "U": gs.U.tolist(),
    }
    out_dir.mkdir(parents=True, exist_ok=True)
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    (out_dir / "ground_state.json").write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config)
        threads = resolve_threads(args.threads)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    out_dir = args.out or cfg.output_dir
    try:
        if args.command == "ground-state":
            return _ground_state(cfg, Path(out_dir))
        result = run_scenario(cfg, out_dir, threads=threads, what=args.command)
    except (ConfigurationError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    except ConvergenceError as exc:
        print(f"error: {exc} {exc.diagnostics}", file=sys.stderr)
        return EXIT_RUN_FAILED
    for f in result["files"]:
        print(f)
    if result["status"]:
        print(f"error: {result['error']}", file=sys.stderr)
        return EXIT_RUN_FAILED
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
