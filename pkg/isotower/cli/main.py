#!/usr/bin/env python3
"""Umbrella CLI: one subcommand per tool, plus package identity."""

from __future__ import annotations

import argparse
import sys
from typing import List, Optional

from . import build_cli, crater_cli, tectonic_cli, tower_cli, voltage_cli
from ._common import CliParser, add_version_argument, run_guarded

SUBCOMMANDS: tuple[tuple[str, str], ...] = (
    ("build", "Build the isogeny graph G_N^m"),
    ("crater", "Classify crater components"),
    ("tower", "Build and verify the p-tower"),
    ("tectonic", "Generate, recognize, predict and search tectonic craters"),
    ("voltage", "Voltage assignment and derived graph"),
    ("inverse", "Search and confirm realizations of crater parameters"),
)


def _format_examples_section() -> str:
    return "\n".join(
        [
            "Examples:",
            "  isotower build --p 5 --l 2 --m 0 --out g.json",
            "  isotower tectonic gen --omega 3 --s 2 --t 2 --c 1 --dot out.dot",
            "  isotower tower --p 5 --l 2 --rmax 2",
        ]
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = CliParser(
        prog="isotower",
        description="Isogeny graphs with level structure",
        epilog=_format_examples_section(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    add_version_argument(parser, "isotower")
    commands = parser.add_subparsers(dest="command", metavar="COMMAND")
    helps = dict(SUBCOMMANDS)

    build_cli.add_arguments(commands.add_parser("build", help=helps["build"]))
    crater_cli.add_arguments(commands.add_parser("crater", help=helps["crater"]))
    tower_cli.add_arguments(commands.add_parser("tower", help=helps["tower"]))
    tectonic_cli.add_arguments(commands.add_parser("tectonic", help=helps["tectonic"]))
    voltage_cli.add_arguments(commands.add_parser("voltage", help=helps["voltage"]))
    tectonic_cli.add_inverse_arguments(commands.add_parser("inverse", help=helps["inverse"]))
    return parser


_HANDLERS = {
    "build": build_cli.execute,
    "crater": crater_cli.execute,
    "tower": tower_cli.execute,
    "tectonic": tectonic_cli.execute,
    "voltage": voltage_cli.execute,
    "inverse": tectonic_cli.execute_inverse,
}


def run(argv: Optional[List[str]] = None) -> int:
    parser = _build_parser()
    argv = sys.argv[1:] if argv is None else argv
    if not argv:
        parser.print_help()
        return 0
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return 0
    return run_guarded(_HANDLERS[args.command], args)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
