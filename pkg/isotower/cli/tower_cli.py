#!/usr/bin/env python3

import argparse
import sys
from pathlib import Path
from typing import List, Optional

from ..core import EXIT_OK, EXIT_VERIFICATION, ValidationError
from ..graphs import BuildParams, build_tower, export_dot
from ..graphs.tower import level_graphs_dot
from ._common import (
    CliParser,
    add_common_arguments,
    add_version_argument,
    dump_json,
    run_guarded,
    settings_from_args,
    write_output,
)


def add_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--p", type=int, required=True, help="Characteristic (prime > 3)")
    parser.add_argument("--deg", type=int, default=1, help="Base field degree (default: 1)")
    parser.add_argument("--l", dest="ell", type=int, required=True, help="Isogeny degree")
    parser.add_argument("--N", dest="N", type=int, default=1, help="Tame level (default: 1)")
    parser.add_argument(
        "--rmax",
        type=int,
        default=None,
        help="Levels above m0 (default: largest within the vertex budget)",
    )
    parser.add_argument(
        "--anchor",
        type=int,
        default=None,
        metavar="J",
        help="j-invariant (base field index) whose component carries the tower",
    )
    parser.add_argument(
        "--dot-dir",
        help="Directory for one DOT file per level",
    )
    add_common_arguments(parser)


def execute(args: argparse.Namespace) -> int:
    settings = settings_from_args(args)
    params = BuildParams(
        p=args.p, ell=args.ell, N=args.N, m=0, base_degree=args.deg, seed=settings.seed
    ).validate()
    dot_dir = Path(args.dot_dir) if args.dot_dir else None
    if dot_dir is not None and not dot_dir.is_dir():
        raise ValidationError(f"DOT directory does not exist: {dot_dir}")

    report = build_tower(params, args.rmax, args.anchor, settings)
    write_output(dump_json(report.to_dict()), args.out)
    if dot_dir is not None:
        for m, text in sorted(level_graphs_dot(report).items()):
            write_output(text, str(dot_dir / f"level_{m}.dot"))
    if args.dot and report.graphs:
        write_output(export_dot(report.graphs[-1].graph, name="top"), args.dot)
    return EXIT_OK if report.verified else EXIT_VERIFICATION


def run(argv: Optional[List[str]] = None) -> int:
    parser = CliParser(description="Build and verify the p-tower over G_N^m0")
    add_version_argument(parser, "isotower-tower")
    add_arguments(parser)
    args = parser.parse_args(argv)
    return run_guarded(execute, args)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
