"""Command-line entry point for the phasekit toolkit."""

import argparse
import logging
import sys
from typing import List, Optional

from dotenv import load_dotenv

from phasekit import __version__
from phasekit.commands import COMMANDS
from phasekit.utils.config import configure_logging
from phasekit.utils.constants import EXIT_NUMERICAL_FAILURE, EXIT_OK, EXIT_USAGE
from phasekit.utils.errors import NumericalFailure

# Load environment variables
load_dotenv()

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="phasekit", description="Phase retrieval solvers and benchmarks.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", dest="log_level", help="overrides LOG_LEVEL")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        sub = subparsers.add_parser(command.name, help=command.help)
        command.add_arguments(sub)
        sub.set_defaults(handler=command)
    return parser


def cli_main(argv: Optional[List[str]] = None) -> int:
    """Run one subcommand; returns 0 on success, 1 on usage errors, 2 on numerical failure."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE

    try:
        configure_logging(args.log_level)
        return args.handler(args).run()
    except NumericalFailure as e:
        logger.error("Numerical failure: %s", e)
        return EXIT_NUMERICAL_FAILURE
    except (ValueError, OSError) as e:
        # pydantic ValidationError and SignalFormatError are ValueErrors
        print(f"phasekit {args.command}: error: {e}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
