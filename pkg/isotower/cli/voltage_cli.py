#!/usr/bin/env python3

import argparse
import sys
from typing import List, Optional

from ..core import EXIT_OK, EXIT_VERIFICATION, ValidationError
from ..graphs import (
    BuildParams,
    build_voltage,
    choose_bases,
    coboundary_between,
    compute_assignment,
    derived_graph,
    export_dot,
    verify_appendix,
)
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
    parser.add_argument("--m", type=int, required=True, help="Truncation level of E[p^m]")
    parser.add_argument(
        "--tree-mode",
        action="store_true",
        help="Propagate bases along a spanning tree so tree edges carry voltage 1",
    )
    parser.add_argument(
        "--full-group",
        action="store_true",
        help="Export the derived graph over all units instead of Aut-orbits",
    )
    parser.add_argument(
        "--compare-seed",
        type=int,
        default=None,
        help="Second seed; check both assignments differ by a coboundary",
    )
    add_common_arguments(parser)


def execute(args: argparse.Namespace) -> int:
    settings = settings_from_args(args)
    if args.m < 0:
        raise ValidationError(f"--m must be >= 0, got {args.m}")
    params = BuildParams(
        p=args.p, ell=args.ell, N=1, m=args.m, base_degree=args.deg, seed=settings.seed
    ).validate()
    vd, target = build_voltage(params, settings.seed, args.tree_mode, settings)
    report = verify_appendix(vd, target, settings)
    document = {"voltage": vd.to_dict(), "comparison": report.to_dict()}
    status = EXIT_OK if report.ok else EXIT_VERIFICATION

    if args.compare_seed is not None:
        other_bases = choose_bases(vd.base, args.m, args.compare_seed, args.tree_mode, settings)
        other = compute_assignment(vd.base, other_bases, args.m, settings)
        cob = coboundary_between(vd, other)
        document["coboundary"] = dict(cob.to_dict(), seeds=[settings.seed, args.compare_seed])
        if not cob.is_coboundary:
            status = EXIT_VERIFICATION

    write_output(dump_json(document), args.out)
    if args.dot:
        write_output(export_dot(derived_graph(vd, args.full_group), name="derived"), args.dot)
    return status


def run(argv: Optional[List[str]] = None) -> int:
    parser = CliParser(description="Voltage assignment on G_1^0 and its derived graph")
    add_version_argument(parser, "isotower-voltage")
    add_arguments(parser)
    args = parser.parse_args(argv)
    return run_guarded(execute, args)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
