"""
Main entry point for the hidden-confounder-attack toolkit.

This module dispatches the scenario, attack, verify-assumptions and
export-graph commands.
"""

import sys
from pathlib import Path
from typing import List, Optional

# Add src to path for imports
sys.path.insert(0, str(Path(__file__).parent / "src"))

from src.cli import attack_cli, graph_cli, scenario_cli
from src.cli.common import EXIT_OK, EXIT_USAGE, UsageArgumentParser, configure_logging, guarded


def build_parser() -> UsageArgumentParser:
    parser = UsageArgumentParser(
        prog="hca",
        description="Hidden confounder attacks on linear programs",
    )
    subparsers = parser.add_subparsers(dest="command", help="Available commands")
    scenario_cli.add_parser(subparsers)
    attack_cli.add_parsers(subparsers)
    graph_cli.add_parser(subparsers)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point for the application; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # --help exits with 0, usage errors with 64
        return int(e.code) if e.code is not None else EXIT_OK

    if not args.command:
        parser.print_help()
        return EXIT_USAGE

    configure_logging(getattr(args, "verbose", False))
    return guarded(args.run, args)


if __name__ == "__main__":
    sys.exit(main())
