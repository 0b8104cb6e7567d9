#!/usr/bin/env python3

import argparse
import logging
import sys
from typing import List, Optional

from ..core import EXIT_OK, EXIT_VERIFICATION
from ..graphs import (
    build_graph,
    check_dual_closure,
    check_edge_counts,
    export,
    export_dot,
    project,
    verify_covering,
)
from ._common import (
    CliParser,
    add_common_arguments,
    add_field_arguments,
    add_version_argument,
    params_from_args,
    run_guarded,
    settings_from_args,
    write_output,
)

logger = logging.getLogger(__name__)


def add_arguments(parser: argparse.ArgumentParser) -> None:
    add_field_arguments(parser)
    add_common_arguments(parser)
    parser.add_argument(
        "--format",
        choices=["json", "dot"],
        default="json",
        help="Format of the main output (default: json)",
    )
    parser.add_argument(
        "--check",
        action="store_true",
        help="Check crater edge counts and dual edges; exit 2 on violations",
    )
    parser.add_argument(
        "--cover-to",
        type=int,
        metavar="M",
        help="Also build G_N^M over the same field and verify the projection is a covering",
    )


def execute(args: argparse.Namespace) -> int:
    settings = settings_from_args(args)
    params = params_from_args(args, settings)
    ig = build_graph(params, settings)
    status = EXIT_OK

    if args.check:
        problems = check_edge_counts(ig)
        missing = check_dual_closure(ig)
        ig.graph.graph["checks"] = {
            "edge_counts": problems,
            "missing_duals": [list(e) for e in missing],
        }
        for problem in problems:
            logger.warning("edge count: %s", problem)
        if missing:
            logger.warning("%d edges without a dual edge", len(missing))
        if problems or missing:
            status = EXIT_VERIFICATION

    if args.cover_to is not None:
        mapping, low = project(ig, params.N, args.cover_to, settings)
        report = verify_covering(ig.graph, low.graph, mapping)
        ig.graph.graph["covering"] = dict(report.to_dict(), m_low=args.cover_to)
        logger.info("projection to m=%d: cover=%s degree=%s", args.cover_to, report.is_cover, report.degree)
        if not report.is_cover:
            status = EXIT_VERIFICATION

    write_output(export(ig.graph, args.format), args.out)
    if args.dot:
        write_output(export_dot(ig.graph), args.dot)
    return status


def run(argv: Optional[List[str]] = None) -> int:
    parser = CliParser(description="Build the isogeny graph G_N^m")
    add_version_argument(parser, "isotower-build")
    add_arguments(parser)
    args = parser.parse_args(argv)
    return run_guarded(execute, args)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
