#!/usr/bin/env python3

import argparse
import sys
from typing import List, Optional

import networkx as nx

from ..core import EXIT_OK
from ..graphs import build_graph, export_dot, profile_craters
from ._common import (
    CliParser,
    add_common_arguments,
    add_field_arguments,
    add_version_argument,
    dump_json,
    params_from_args,
    run_guarded,
    settings_from_args,
    write_output,
)


def add_arguments(parser: argparse.ArgumentParser) -> None:
    add_field_arguments(parser)
    add_common_arguments(parser)
    parser.add_argument(
        "--swap",
        action="store_true",
        help="Make blue the larger Frobenius eigenvalue",
    )
    parser.add_argument(
        "--kind",
        choices=["split", "ramified-loop", "ramified-cycle", "inert-isolated"],
        help="Report only craters of this kind",
    )


def execute(args: argparse.Namespace) -> int:
    settings = settings_from_args(args)
    params = params_from_args(args, settings)
    ig = build_graph(params, settings)
    results = [
        (profile, colored)
        for profile, colored in profile_craters(ig, swap=args.swap)
        if args.kind is None or profile.kind == args.kind
    ]
    document = {
        "graph": ig.summary(),
        "craters": [profile.to_dict() for profile, _ in results],
    }
    write_output(dump_json(document), args.out)
    if args.dot:
        merged = nx.compose_all([colored for _, colored in results]) if results else nx.MultiDiGraph()
        write_output(export_dot(merged, name="craters"), args.dot)
    return EXIT_OK


def run(argv: Optional[List[str]] = None) -> int:
    parser = CliParser(description="Classify the craters of G_N^m")
    add_version_argument(parser, "isotower-crater")
    add_arguments(parser)
    args = parser.parse_args(argv)
    return run_guarded(execute, args)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
