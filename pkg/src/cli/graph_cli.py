"""
Command-line interface for exporting road graphs with highlighted routes as DOT.
"""

import argparse
import logging
import sys
from pathlib import Path

from ..data.sources import load_graph_csv, load_solution
from ..services.reports import atomic_write_text, graph_to_dot
from .common import EXIT_OK, EXIT_USAGE

logger = logging.getLogger(__name__)


def add_parser(subparsers) -> argparse.ArgumentParser:
    parser = subparsers.add_parser("export-graph", help="Write a graph and its routes as DOT")
    parser.add_argument("--graph", required=True, help="Graph CSV (src,dst,cost,confounder_value)")
    parser.add_argument("--solution", action="append", default=[],
                        help="Solution JSON {\"x\": [...]}; first is the base, second the adversarial route")
    parser.add_argument("--out", type=str, help="DOT file to write (default: stdout)")
    parser.add_argument("-v", "--verbose", action="store_true", help="Log at DEBUG level")
    parser.set_defaults(run=run)
    return parser


def run(args: argparse.Namespace) -> int:
    if len(args.solution) > 2:
        print("Error: at most two --solution files (base, adversarial)", file=sys.stderr)
        return EXIT_USAGE
    graph = load_graph_csv(args.graph)
    solutions = [load_solution(path) for path in args.solution]
    dot = graph_to_dot(graph, solutions, name=Path(args.graph).stem)
    if args.out:
        atomic_write_text(args.out, dot)
        print(f"Wrote {args.out}")
    else:
        print(dot, end="")
    return EXIT_OK
