#!/usr/bin/env python3

import argparse
import dataclasses
import sys
from pathlib import Path
from typing import List, Optional

from ..core import EXIT_OK, EXIT_VERIFICATION, ValidationError
from ..graphs import (
    CMOracleInput,
    SearchBounds,
    TectonicParams,
    cm_order_profile,
    export,
    export_dot,
    generate,
    inverse_search,
    load_json,
    recognize,
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


def _add_params(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--omega", type=int, required=True, help="Number of central vertices")
    parser.add_argument("--s", type=int, required=True, help="Blue meeting offset")
    parser.add_argument("--t", type=int, required=True, help="Green meeting offset")
    parser.add_argument("--c", type=int, required=True, help="Twist, coprime to omega")


def _add_bounds(parser: argparse.ArgumentParser) -> None:
    defaults = SearchBounds()
    parser.add_argument("--max-p", type=int, default=defaults.max_p, help=f"Largest p (default: {defaults.max_p})")
    parser.add_argument("--max-l", type=int, default=defaults.max_l, help=f"Largest l (default: {defaults.max_l})")
    parser.add_argument("--max-N", dest="max_N", type=int, default=defaults.max_N, help="Largest N (default: 1)")
    parser.add_argument(
        "--max-dK", dest="max_dK", type=int, default=defaults.max_dK,
        help=f"Largest |d_K| (default: {defaults.max_dK})",
    )
    parser.add_argument("--m", type=int, default=defaults.m, help="Exponent of p (default: 1)")


def add_arguments(parser: argparse.ArgumentParser) -> None:
    actions = parser.add_subparsers(dest="action", metavar="ACTION")
    actions.required = True

    gen = actions.add_parser("gen", help="Generate the tectonic crater with given parameters")
    _add_params(gen)
    gen.add_argument("--format", choices=["json", "dot"], default="json", help="Main output format")
    add_common_arguments(gen)

    rec = actions.add_parser("recognize", help="Recognize a colored graph from a JSON file")
    rec.add_argument("input", help="Graph JSON file")
    add_common_arguments(rec)

    oracle = actions.add_parser("oracle", help="Predict crater parameters from quadratic-order data")
    oracle.add_argument("--dK", dest="d_K", type=int, required=True, help="Fundamental discriminant")
    oracle.add_argument("--p", type=int, required=True, help="Prime split in K")
    oracle.add_argument("--m", type=int, default=1, help="Exponent of p (default: 1)")
    oracle.add_argument("--N", dest="N", type=int, default=1, help="Tame level (default: 1)")
    oracle.add_argument(
        "--x", type=int, nargs=2, required=True, metavar=("A", "B"),
        help="Generator a + b*omega_K of the ideal above l",
    )
    add_common_arguments(oracle)

    search = actions.add_parser("search", help="Search (d_K, p, N, l) realizing given parameters")
    _add_params(search)
    _add_bounds(search)
    search.add_argument("--confirm", action="store_true", help="Confirm witnesses on isogeny graphs")
    add_common_arguments(search)


def add_inverse_arguments(parser: argparse.ArgumentParser) -> None:
    _add_params(parser)
    _add_bounds(parser)
    add_common_arguments(parser)


def _params(args: argparse.Namespace) -> TectonicParams:
    return TectonicParams(args.omega, args.s, args.t, args.c).validate()


def _search(args: argparse.Namespace, confirm: bool) -> int:
    settings = settings_from_args(args)
    target = _params(args)
    bounds = SearchBounds(args.max_p, args.max_l, args.max_N, args.max_dK, args.m)
    witnesses = inverse_search(target, bounds, confirm, settings)
    document = {
        "target": target.to_dict(),
        "bounds": dataclasses.asdict(bounds),
        "witnesses": [w.to_dict() for w in witnesses],
    }
    write_output(dump_json(document), args.out)
    if confirm and witnesses and not any(w.confirmed for w in witnesses):
        return EXIT_VERIFICATION
    return EXIT_OK


def execute(args: argparse.Namespace) -> int:
    if args.action == "gen":
        graph = generate(_params(args))
        write_output(export(graph, args.format), args.out)
        if args.dot:
            write_output(export_dot(graph, name="tectonic"), args.dot)
        return EXIT_OK

    if args.action == "recognize":
        path = Path(args.input)
        if not path.is_file():
            raise ValidationError(f"Input file does not exist: {args.input}")
        found = recognize(load_json(path.read_text(encoding="utf-8")))
        document = {"tectonic": found is not None, "params": found.to_dict() if found else None}
        write_output(dump_json(document), args.out)
        return EXIT_OK if found else EXIT_VERIFICATION

    if args.action == "oracle":
        inp = CMOracleInput(args.d_K, args.p, (args.x[0], args.x[1]), args.m, args.N)
        profile = cm_order_profile(inp)
        document = {"input": dataclasses.asdict(inp), "norm": inp.norm(), "profile": profile.to_dict()}
        write_output(dump_json(document), args.out)
        return EXIT_OK

    return _search(args, confirm=args.confirm)


def execute_inverse(args: argparse.Namespace) -> int:
    return _search(args, confirm=True)


def run(argv: Optional[List[str]] = None) -> int:
    parser = CliParser(description="Tectonic craters: generate, recognize, predict, search")
    add_version_argument(parser, "isotower-tectonic")
    add_arguments(parser)
    args = parser.parse_args(argv)
    return run_guarded(execute, args)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
