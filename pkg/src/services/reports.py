"""
Report and table writers.

Everything written here is deterministic for identical inputs: JSON keys
are sorted, floats are written with repr precision, CSVs use '\n' line
endings and wall-clock time only ever goes to manifest.json. Files are
written to a temporary sibling first and renamed into place.
"""

import json
import logging
import math
import os
import tempfile
from dataclasses import asdict
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

import networkx as nx
import numpy as np
import pandas as pd

from ..core.errors import ConfigurationError
from ..core.metrics import as_binary_code
from ..core.problems import ordered_edges
from ..data.models import AssumptionDiagnostics, AttackReport, RunManifest, ScenarioResult
from .scenarios import config_echo

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _plain(value: Any) -> Any:
    """Convert numpy / enum values to JSON-safe Python objects; nan and inf become null."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, Enum):
        return value.value
    return value


def report_to_dict(report: AttackReport) -> Dict[str, Any]:
    """JSON-ready view of an AttackReport, including trace and config echo."""
    return _plain({
        "w": report.w,
        "w_hat": report.w_hat,
        "x_base": report.x_base,
        "x_adv": report.x_adv,
        "status_adv": report.status_adv.value,
        "cost_base": report.cost_base,
        "cost_adv": report.cost_adv,
        "rel_cost_gap": report.rel_cost_gap,
        "shd_codes": report.shd_codes,
        "h_base": report.h_base,
        "h_adv": report.h_adv,
        "delta_h": report.delta_h,
        "success": report.success,
        "perturbation_norm": report.perturbation_norm,
        "steps_taken": report.steps_taken,
        "excluded_samples": report.excluded_samples,
        "h_collision": report.h_collision,
        "candidate_objectives": report.candidate_objectives,
        "trace": [asdict(step) for step in report.trace],
        "config": config_echo(report.config),
        "provenance": report.provenance,
    })


def diagnostics_to_dict(diag: AssumptionDiagnostics) -> Dict[str, Any]:
    return _plain({
        "radius": diag.radius,
        "trials": diag.trials,
        "seed": diag.seed,
        "verdict": diag.verdict,
        "n_optima_at_witness": diag.n_optima_at_witness,
        "multiple_optima_witness": diag.multiple_optima_witness,
        "solution_change_witness": diag.solution_change_witness,
        "optimality_margin": diag.optimality_margin,
        "notes": diag.notes,
    })


def dumps(payload: Dict[str, Any]) -> str:
    return json.dumps(_plain(payload), sort_keys=True, indent=2, allow_nan=False) + "\n"


def atomic_write_text(path: PathLike, text: str) -> Path:
    """Write text to path through a temporary file in the same directory."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    logger.debug("Wrote %s", path)
    return path


def write_json(path: PathLike, payload: Dict[str, Any]) -> Path:
    return atomic_write_text(path, dumps(payload))


def write_csv(path: PathLike, frame: pd.DataFrame) -> Path:
    return atomic_write_text(path, frame.to_csv(index=False, lineterminator="\n"))


def write_attack_report(path: PathLike, report: AttackReport) -> Path:
    return write_json(path, report_to_dict(report))


def write_scenario_result(result: ScenarioResult, out_dir: PathLike) -> List[str]:
    """
    Write the files of a scenario run and return their names.

    result.json always; skew.csv and dataset.csv for attack scenarios;
    comparison.csv for the energy scenario.
    """
    out_dir = Path(out_dir)
    payload = {
        "scenario": result.name,
        "seed": result.seed,
        "config": result.config,
        "summary": result.summary,
    }
    if result.report is not None:
        payload["report"] = report_to_dict(result.report)
    files = [write_json(out_dir / "result.json", payload)]
    if result.skew is not None:
        files.append(write_csv(out_dir / "skew.csv", result.skew))
    if result.dataset is not None:
        files.append(write_csv(out_dir / "dataset.csv", result.dataset.to_frame()))
    if result.comparison is not None:
        files.append(write_csv(out_dir / "comparison.csv", result.comparison))
    names = [f.name for f in files]
    result.files.extend(names)
    return names


def write_manifest(manifest: RunManifest) -> Path:
    """manifest.json is written last, after every result file exists."""
    payload = asdict(manifest)
    payload["files"] = sorted(manifest.files)
    return write_json(Path(manifest.output_dir) / "manifest.json", payload)


# ---------------------------------------------------------------------------
# DOT export
# ---------------------------------------------------------------------------

def _quote(name: Any) -> str:
    text = str(name).replace("\\", "\\\\").replace('"', '\\"')
    return f'"{text}"'


def _active_edges(graph: nx.DiGraph, x: Optional[Sequence[float]]) -> set:
    if x is None:
        return set()
    edges = ordered_edges(graph)
    code = as_binary_code(np.asarray(x, dtype=float))
    if code.shape[0] != len(edges):
        raise ConfigurationError(
            f"Solution has {code.shape[0]} entries, graph has {len(edges)} edges"
        )
    return {edge for edge, bit in zip(edges, code) if bit == 1}


def graph_to_dot(graph: nx.DiGraph, solutions: Iterable[Sequence[float]] = (),
                 name: str = "roads") -> str:
    """
    DOT text of a road graph with solution edges highlighted.

    The first solution is the base route, the second the adversarial one.
    Nodes are sorted by name; edges follow ordered_edges.
    """
    solutions = list(solutions)
    base = _active_edges(graph, solutions[0] if solutions else None)
    adv = _active_edges(graph, solutions[1] if len(solutions) > 1 else None)
    lines = [f"digraph {_quote(name)} {{", "  rankdir=LR;"]
    for node in sorted(graph.nodes(), key=str):
        lines.append(f"  {_quote(node)};")
    for u, v in ordered_edges(graph):
        attrs = [f'label="{graph.edges[u, v].get("cost", 0.0):g}"']
        if (u, v) in base and (u, v) in adv:
            attrs += ['class="both"', 'color="purple"', "penwidth=2"]
        elif (u, v) in base:
            attrs += ['class="base"', 'color="blue"', "penwidth=2"]
        elif (u, v) in adv:
            attrs += ['class="adversarial"', 'color="red"', 'style="dashed"', "penwidth=2"]
        lines.append(f"  {_quote(u)} -> {_quote(v)} [{', '.join(attrs)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def sweep_summary(frame: pd.DataFrame) -> Dict[str, Any]:
    n = int(len(frame))
    successes = int(frame["success"].sum()) if n else 0
    return {"runs": n, "successes": successes, "success_rate": successes / n if n else 0.0}
