"""
Shared plumbing of the command-line front ends: exit codes, logging setup,
error mapping and the run manifest.
"""

import argparse
import logging
import platform
import sys
import time
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import networkx as nx
import numpy as np
import pandas as pd
import pydantic
from pydantic import ValidationError

from .. import __version__
from ..config import get_output_root
from ..core.errors import HcaError, PreconditionError, SolverError
from ..data.models import RunManifest
from ..data.schemas import format_validation_error
from ..services.reports import write_manifest

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_USAGE = 64


class UsageArgumentParser(argparse.ArgumentParser):
    """ArgumentParser that exits with 64 on usage errors."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"Error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def add_common_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", type=str, help="Output directory (default: $HCA_OUTPUT_ROOT/<command>)")
    parser.add_argument("-v", "--verbose", action="store_true", help="Log at DEBUG level")


def configure_logging(verbose: bool = False) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def output_dir(out: Optional[str], default_name: str) -> Path:
    return Path(out) if out else get_output_root() / default_name


def versions() -> Dict[str, str]:
    return {
        "hca": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "pandas": pd.__version__,
        "networkx": nx.__version__,
        "pydantic": pydantic.VERSION,
    }


def finish_run(command: str, config_path: Optional[str], config: Dict[str, Any],
               out_dir: Path, started: float, files: List[str]) -> Path:
    """Write manifest.json once every result file is in place."""
    manifest = RunManifest(
        command=command,
        config_path=config_path,
        config=config,
        output_dir=str(out_dir),
        versions=versions(),
        wall_clock_seconds=time.perf_counter() - started,
        files=list(files) + ["manifest.json"],
    )
    return write_manifest(manifest)


def guarded(run: Callable[[argparse.Namespace], int], args: argparse.Namespace) -> int:
    """Run a command, mapping failures onto the exit-code contract."""
    try:
        return run(args)
    except ValidationError as e:
        print(f"Error: invalid configuration\n{format_validation_error(e)}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverError, PreconditionError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_SOLVER
    except HcaError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_CONFIG
