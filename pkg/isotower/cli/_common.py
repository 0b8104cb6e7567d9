"""Shared helpers for packaged CLI entry points."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from typing import Any, Callable, NoReturn, Optional

from ..core import IsotowerError, ValidationError, validate_output_path
from ..graphs import BuildParams
from ..utilities import Settings, load_settings, parse_int_list

LOG_FORMAT = "%(asctime)s - %(levelname)s - %(message)s"


class CliParser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit with the validation code."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(ValidationError.exit_code, f"{self.prog}: error: {message}\n")


def add_version_argument(parser: argparse.ArgumentParser, prog: str) -> None:
    from .. import __version__

    parser.add_argument(
        "-V",
        "--version",
        action="version",
        version=f"{prog} {__version__}",
    )


def add_common_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--seed",
        type=int,
        default=None,
        help="Seed for all random choices (default: ISOTOWER_SEED or 0)",
    )
    parser.add_argument(
        "--jobs",
        "-j",
        type=int,
        default=None,
        help="Worker threads (default: ISOTOWER_JOBS or 1)",
    )
    parser.add_argument(
        "--out",
        "-o",
        help="Write the JSON result here instead of stdout",
    )
    parser.add_argument("--dot", help="Also write a Graphviz DOT file")
    parser.add_argument(
        "--progress",
        action="store_true",
        help="Show progress bars",
    )
    parser.add_argument(
        "--verbose",
        "-v",
        action="store_true",
        help="Enable debug logging",
    )


def add_field_arguments(parser: argparse.ArgumentParser, with_level: bool = True) -> None:
    parser.add_argument("--p", type=int, required=True, help="Characteristic (prime > 3)")
    parser.add_argument(
        "--deg",
        type=int,
        default=1,
        help="Degree of the base field over F_p (default: 1)",
    )
    parser.add_argument("--l", dest="ell", type=int, required=True, help="Isogeny degree (prime)")
    parser.add_argument("--N", dest="N", type=int, default=1, help="Tame level (default: 1)")
    if with_level:
        parser.add_argument("--m", type=int, default=0, help="Exponent of p in the level (default: 0)")
    parser.add_argument(
        "--j-filter",
        metavar="LIST",
        help="Comma-separated j-invariants (base field indices) to keep",
    )
    parser.add_argument(
        "--exclude-special-j",
        action="store_true",
        help="Skip j = 0 and j = 1728",
    )


def configure_logging(verbose: bool) -> None:
    logging.basicConfig(level=logging.INFO, format=LOG_FORMAT)
    if verbose:
        logging.getLogger().setLevel(logging.DEBUG)


def settings_from_args(args: argparse.Namespace) -> Settings:
    jobs = getattr(args, "jobs", None)
    if jobs is not None and jobs < 1:
        raise ValidationError(f"--jobs must be >= 1, got {jobs}")
    return load_settings().with_overrides(
        seed=getattr(args, "seed", None),
        jobs=jobs,
        progress=True if getattr(args, "progress", False) else None,
    )


def params_from_args(args: argparse.Namespace, settings: Settings) -> BuildParams:
    j_filter = None
    if getattr(args, "j_filter", None):
        try:
            values = parse_int_list(args.j_filter)
        except ValueError:
            values = None
        if values is None:
            raise ValidationError(f"--j-filter expects comma-separated integers, got {args.j_filter!r}")
        j_filter = tuple(values)
    return BuildParams(
        p=args.p,
        ell=args.ell,
        N=args.N,
        m=getattr(args, "m", 0),
        base_degree=args.deg,
        j_filter=j_filter,
        exclude_special_j=getattr(args, "exclude_special_j", False),
        seed=settings.seed,
    ).validate()


def dump_json(data: Any) -> str:
    return json.dumps(data, indent=2) + "\n"


def write_output(text: str, path: Optional[str]) -> None:
    if path:
        target = validate_output_path(path)
        target.write_text(text, encoding="utf-8")
        logging.getLogger(__name__).info("wrote %s", target)
    else:
        sys.stdout.write(text)


def run_guarded(command: Callable[[argparse.Namespace], int], args: argparse.Namespace) -> int:
    """Run a subcommand, mapping library errors to exit codes."""
    configure_logging(getattr(args, "verbose", False))
    try:
        return command(args)
    except IsotowerError as e:
        print(f"Error: {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        print(f"Error: {e}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        print("Interrupted", file=sys.stderr)
        return 130
