"""
File sources for SCMs, linear programs, lifts, configs, graphs and datasets.

JSON inputs are validated with the pydantic schemas first; a missing file
or broken JSON becomes a ConfigurationError naming the path, and schema
violations surface as pydantic ValidationErrors with field paths.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Union

import networkx as nx
import numpy as np
import pandas as pd

from ..core.errors import ConfigurationError
from ..core.problems import graph_from_edges, ordered_edges
from .models import (
    AttackConfig,
    ConfounderLift,
    DataSet,
    Distribution,
    EnergyParams,
    EnergyProfiles,
    LinearProgram,
    NoiseSpec,
    NoiseVariable,
    ProblemFamily,
    Scm,
    StructuralEquation,
    Term,
)
from .schemas import (
    AttackConfigSchema,
    AttackFileSchema,
    EnergyParamsSchema,
    LiftSchema,
    LinearProgramSchema,
    ScenarioConfigSchema,
    ScmSchema,
    SolutionSchema,
)

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
GRAPH_COLUMNS = ("src", "dst", "cost", "confounder_value")
PROFILE_COLUMNS = ("demand", "avail_pv")


def load_json(path: PathLike, what: str = "input") -> Any:
    """Read a JSON file, turning I/O and syntax problems into configuration errors."""
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except FileNotFoundError:
        raise ConfigurationError(f"{what.capitalize()} file not found at {path}")
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"Invalid JSON in {what} file {path}: {e}")


def _read_csv(path: PathLike, what: str, required) -> pd.DataFrame:
    path = Path(path)
    try:
        frame = pd.read_csv(path)
    except FileNotFoundError:
        raise ConfigurationError(f"{what.capitalize()} file not found at {path}")
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise ConfigurationError(f"Invalid CSV in {what} file {path}: {e}")
    missing = [c for c in required if c not in frame.columns]
    if missing:
        raise ConfigurationError(f"{what.capitalize()} file {path} lacks columns {missing}")
    return frame


# ---------------------------------------------------------------------------
# SCM
# ---------------------------------------------------------------------------

def scm_from_dict(data: Dict[str, Any]) -> Scm:
    schema = ScmSchema.model_validate(data)
    return Scm(
        name=schema.name,
        exogenous=tuple(
            NoiseVariable(u.name, Distribution(u.distribution.kind, dict(u.distribution.params)))
            for u in schema.exogenous
        ),
        equations=tuple(
            StructuralEquation(
                target=eq.target,
                intercept=eq.intercept,
                terms=tuple(Term(t.source, t.coef, t.transform) for t in eq.terms),
                clamp=eq.clamp,
            )
            for eq in schema.equations
        ),
        observed=tuple(schema.observed) if schema.observed is not None else None,
    )


def scm_to_dict(scm: Scm) -> Dict[str, Any]:
    return {
        "name": scm.name,
        "exogenous": [
            {"name": u.name, "distribution": {"kind": u.distribution.kind,
                                              "params": dict(u.distribution.params)}}
            for u in scm.exogenous
        ],
        "equations": [
            {
                "target": eq.target,
                "intercept": eq.intercept,
                "terms": [{"source": t.source, "coef": t.coef, "transform": t.transform}
                          for t in eq.terms],
                "clamp": list(eq.clamp) if eq.clamp is not None else None,
            }
            for eq in scm.equations
        ],
        "observed": list(scm.observed),
    }


def load_scm(path: PathLike) -> Scm:
    return scm_from_dict(load_json(path, "SCM"))


# ---------------------------------------------------------------------------
# Linear programs, lifts, attack configs
# ---------------------------------------------------------------------------

def lp_from_dict(data: Dict[str, Any]) -> LinearProgram:
    schema = LinearProgramSchema.model_validate(data)
    bounds = None
    if schema.bounds is not None:
        bounds = np.array([[lo, np.inf if hi is None else hi] for lo, hi in schema.bounds])
    return LinearProgram(
        sense=schema.sense,
        w=np.array(schema.w),
        A_ub=np.array(schema.A_ub) if schema.A_ub is not None else None,
        b_ub=np.array(schema.b_ub) if schema.b_ub is not None else None,
        A_eq=np.array(schema.A_eq) if schema.A_eq is not None else None,
        b_eq=np.array(schema.b_eq) if schema.b_eq is not None else None,
        bounds=bounds,
        labels=tuple(schema.labels) if schema.labels is not None else None,
    )


def lp_to_dict(lp: LinearProgram) -> Dict[str, Any]:
    return {
        "sense": lp.sense.value,
        "w": lp.w.tolist(),
        "A_ub": lp.A_ub.tolist(),
        "b_ub": lp.b_ub.tolist(),
        "A_eq": lp.A_eq.tolist(),
        "b_eq": lp.b_eq.tolist(),
        "bounds": [[float(lo), None if np.isinf(hi) else float(hi)] for lo, hi in lp.bounds],
        "labels": list(lp.labels),
    }


def load_lp(path: PathLike) -> LinearProgram:
    return lp_from_dict(load_json(path, "LP"))


def load_lift(path: PathLike) -> ConfounderLift:
    """Lift file: family, confounder name, c and optionally the owning unit per index."""
    schema = LiftSchema.model_validate(load_json(path, "lift"))
    c = np.array(schema.c, dtype=float)
    owner = np.array(schema.owner, dtype=int) if schema.owner is not None else np.arange(c.size)
    return ConfounderLift(c=c, family=ProblemFamily(schema.family),
                          confounder=schema.confounder, owner=owner)


def attack_config_from_schema(schema: AttackConfigSchema) -> AttackConfig:
    noise = schema.noise
    return AttackConfig(
        epsilon=schema.epsilon,
        steps=schema.steps,
        noise=NoiseSpec(sigma=noise.sigma, n_samples=noise.n_samples, seed=noise.seed,
                        family=noise.family),
        step_rule=schema.step_rule,
        direction=schema.direction,
        cost_gap_budget=schema.cost_gap_budget,
        outer=schema.outer,
    )


def load_attack_config(path: PathLike) -> AttackConfig:
    schema = AttackFileSchema.model_validate(load_json(path, "attack config"))
    return attack_config_from_schema(schema.attack)


def load_scenario_config(path: Optional[PathLike]) -> ScenarioConfigSchema:
    """Scenario config file; every section is optional and defaults are filled in."""
    if path is None:
        return ScenarioConfigSchema()
    return ScenarioConfigSchema.model_validate(load_json(path, "scenario config"))


def energy_params_from_schema(schema: EnergyParamsSchema) -> EnergyParams:
    return EnergyParams(**schema.model_dump())


def load_solution(path: PathLike) -> np.ndarray:
    return np.array(SolutionSchema.model_validate(load_json(path, "solution")).x, dtype=float)


# ---------------------------------------------------------------------------
# CSV inputs
# ---------------------------------------------------------------------------

def load_graph_csv(path: PathLike) -> nx.DiGraph:
    """Road graph from a CSV with columns src, dst, cost, confounder_value; edge order is row order."""
    frame = _read_csv(path, "graph", GRAPH_COLUMNS[:3])
    if "confounder_value" not in frame.columns:
        frame["confounder_value"] = 0.0
    rows = []
    seen = set()
    for row in frame.itertuples(index=False):
        u, v = str(row.src), str(row.dst)
        if (u, v) in seen:
            raise ConfigurationError(f"Graph file {path} lists edge {u}->{v} twice")
        seen.add((u, v))
        cost, value = float(row.cost), float(row.confounder_value)
        if not (np.isfinite(cost) and np.isfinite(value)):
            raise ConfigurationError(f"Edge {u}->{v} in {path} has a non-finite value")
        rows.append((u, v, {"cost": cost, "confounder_value": value}))
    graph = graph_from_edges(rows)
    logger.debug("Loaded graph with %d nodes and %d edges from %s",
                 graph.number_of_nodes(), graph.number_of_edges(), path)
    return graph


def graph_to_frame(graph: nx.DiGraph) -> pd.DataFrame:
    rows = []
    for u, v in ordered_edges(graph):
        data = graph.edges[u, v]
        rows.append((u, v, data.get("cost", 0.0), data.get("confounder_value", 0.0)))
    return pd.DataFrame(rows, columns=list(GRAPH_COLUMNS))


def load_profiles_csv(path: PathLike) -> EnergyProfiles:
    frame = _read_csv(path, "profiles", PROFILE_COLUMNS)
    return EnergyProfiles(demand=frame["demand"].to_numpy(dtype=float),
                          avail_pv=frame["avail_pv"].to_numpy(dtype=float))


def load_dataset_csv(path: PathLike, seed: int = 0, source: Optional[str] = None) -> DataSet:
    """Dataset exported by DataSet.to_frame (the unit_id column is dropped)."""
    frame = _read_csv(path, "dataset", ())
    if "unit_id" in frame.columns:
        frame = frame.sort_values("unit_id", kind="mergesort").drop(columns="unit_id")
    if frame.empty:
        raise ConfigurationError(f"Dataset file {path} has no rows")
    units = [{k: float(v) for k, v in record.items()} for record in frame.to_dict("records")]
    return DataSet(units=units, seed=seed, source=source or Path(path).stem)
