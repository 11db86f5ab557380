"""
Data models for structural causal models, linear programs and attacks.

This module contains the dataclasses, enums and protocols shared by the
core algorithms, the services and the command-line front ends.
"""

import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Protocol, Sequence, Tuple

import networkx as nx
import numpy as np
import pandas as pd

from ..core.errors import ConfigurationError, StructuralError
from ..core.validation import (
    validate_distribution,
    validate_lp_shapes,
    validate_positive,
    validate_transform,
)


class Sense(Enum):
    """Optimization direction of a linear program."""
    MAXIMIZE = "maximize"
    MINIMIZE = "minimize"


class SolveStatus(Enum):
    """Outcome of a simplex solve."""
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


class ProblemFamily(Enum):
    """LP families with a known integral parameterization."""
    LA = "LA"  # linear assignment
    SP = "SP"  # shortest path


class NoiseFamily(Enum):
    """Noise distribution used by the perturbed optimizer."""
    STANDARD_NORMAL = "standard-normal"
    GUMBEL = "gumbel"


class StepRule(Enum):
    """How a gradient is turned into a cost perturbation."""
    SIGN = "sign"
    RAW_GRADIENT = "raw-gradient"


class Direction(Enum):
    """Whether the attack pushes the confounder sum up or down."""
    MAXIMIZE_H = "maximize-h"
    MINIMIZE_H = "minimize-h"


class OuterFunction(Enum):
    """Outer function f applied to the aggregated confounder value."""
    IDENTITY = "identity"
    MEAN = "mean"
    NEGATE = "negate"


# ---------------------------------------------------------------------------
# Structural causal models
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Distribution:
    """Sampling distribution of an exogenous noise variable."""
    kind: str  # "uniform" | "normal" | "lognormal" | "constant"
    params: Dict[str, float]

    def __post_init__(self):
        object.__setattr__(self, "params", {k: float(v) for k, v in self.params.items()})
        validate_distribution(self.kind, self.params)

    def draw(self, rng: np.random.Generator) -> float:
        """Draw a single value from this distribution."""
        p = self.params
        if self.kind == "uniform":
            return float(rng.uniform(p["low"], p["high"]))
        if self.kind == "normal":
            return float(rng.normal(p["mean"], p["std"]))
        if self.kind == "lognormal":
            return float(rng.lognormal(p["mean"], p["sigma"]))
        return p["value"]


@dataclass(frozen=True)
class NoiseVariable:
    """Exogenous variable U with its distribution P(U)."""
    name: str
    distribution: Distribution


@dataclass(frozen=True)
class Term:
    """One additive input of a structural equation: coef * transform(source)."""
    source: str
    coef: float
    transform: str = "identity"  # "identity" | "log" | "exp"

    def __post_init__(self):
        validate_transform(self.transform)


@dataclass(frozen=True)
class StructuralEquation:
    """Linear-plus-clamp assignment target <- intercept + sum(terms), clamped."""
    target: str
    intercept: float = 0.0
    terms: Tuple[Term, ...] = ()
    clamp: Optional[Tuple[float, float]] = None

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if self.clamp is not None:
            lo, hi = float(self.clamp[0]), float(self.clamp[1])
            if lo > hi:
                raise ConfigurationError(
                    f"Equation for '{self.target}' has clamp lower bound {lo} above upper bound {hi}"
                )
            object.__setattr__(self, "clamp", (lo, hi))

    @property
    def sources(self) -> Tuple[str, ...]:
        return tuple(t.source for t in self.terms)


@dataclass(frozen=True)
class Scm:
    """
    Semi-Markovian structural causal model <U, V, F, P(U)>.

    Endogenous variables are the equation targets, in declaration order.
    Parents and attached noises are derived from the equation terms.
    Construction fails with a StructuralError when the wiring is invalid.
    """
    name: str
    exogenous: Tuple[NoiseVariable, ...]
    equations: Tuple[StructuralEquation, ...]
    observed: Optional[Tuple[str, ...]] = None
    graph: nx.DiGraph = field(init=False, repr=False, compare=False)
    order: Tuple[str, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "exogenous", tuple(self.exogenous))
        object.__setattr__(self, "equations", tuple(self.equations))

        noise_names = [u.name for u in self.exogenous]
        if len(set(noise_names)) != len(noise_names):
            raise StructuralError(f"SCM '{self.name}' declares a noise variable twice")

        targets = [eq.target for eq in self.equations]
        duplicated = sorted({t for t in targets if targets.count(t) > 1})
        if duplicated:
            raise StructuralError(
                f"SCM '{self.name}' has more than one equation for {duplicated}"
            )
        clash = sorted(set(targets) & set(noise_names))
        if clash:
            raise StructuralError(f"SCM '{self.name}' uses {clash} as both noise and endogenous")

        graph = nx.DiGraph()
        graph.add_nodes_from(targets)
        for eq in self.equations:
            for source in eq.sources:
                if source in noise_names:
                    continue
                if source not in targets:
                    raise StructuralError(
                        f"Equation for '{eq.target}' references unknown variable '{source}'"
                    )
                graph.add_edge(source, eq.target)

        if not nx.is_directed_acyclic_graph(graph):
            cycle = nx.find_cycle(graph)
            raise StructuralError(f"SCM '{self.name}' has a cyclic parent relation: {cycle}")

        position = {name: i for i, name in enumerate(targets)}
        order = tuple(nx.lexicographical_topological_sort(graph, key=position.__getitem__))

        observed = tuple(targets) if self.observed is None else tuple(self.observed)
        unknown = sorted(set(observed) - set(targets))
        if unknown:
            raise StructuralError(f"Observed variables {unknown} are not endogenous in '{self.name}'")

        object.__setattr__(self, "observed", observed)
        object.__setattr__(self, "graph", graph)
        object.__setattr__(self, "order", order)

    @property
    def endogenous(self) -> Tuple[str, ...]:
        return tuple(eq.target for eq in self.equations)

    @property
    def noise_names(self) -> Tuple[str, ...]:
        return tuple(u.name for u in self.exogenous)

    def equation(self, target: str) -> StructuralEquation:
        for eq in self.equations:
            if eq.target == target:
                return eq
        raise ConfigurationError(f"SCM '{self.name}' has no variable '{target}'")

    def parents(self, target: str) -> Tuple[str, ...]:
        """Endogenous parents Pa_i of a variable."""
        return tuple(s for s in self.equation(target).sources if s not in self.noise_names)

    def attached_noises(self, target: str) -> Tuple[str, ...]:
        """Noise variables U_i feeding a variable."""
        noises = self.noise_names
        return tuple(dict.fromkeys(s for s in self.equation(target).sources if s in noises))


@dataclass
class DataSet:
    """Observed per-unit records sampled from an SCM, with the noise draws that produced them."""
    units: List[Dict[str, float]]
    seed: int
    source: str
    noise: List[Dict[str, float]] = field(default_factory=list)

    def __post_init__(self):
        if not self.units:
            raise ConfigurationError("A dataset needs at least one unit")
        fields = set(self.units[0])
        for i, unit in enumerate(self.units):
            if set(unit) != fields:
                raise ConfigurationError(
                    f"Unit {i} has fields {sorted(unit)}, expected {sorted(fields)}"
                )
        if self.noise and len(self.noise) != len(self.units):
            raise ConfigurationError("Noise records must align with units")

    @property
    def n(self) -> int:
        return len(self.units)

    @property
    def fields(self) -> Tuple[str, ...]:
        return tuple(self.units[0])

    def column(self, name: str) -> np.ndarray:
        if name not in self.units[0]:
            raise ConfigurationError(f"Dataset from '{self.source}' has no field '{name}'")
        return np.array([u[name] for u in self.units], dtype=float)

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.units, columns=list(self.fields))
        frame.insert(0, "unit_id", range(self.n))
        return frame


@dataclass(frozen=True)
class AdversaryView:
    """Per-unit hidden-confounder values, aligned with a DataSet."""
    confounder: str
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))

    def __len__(self) -> int:
        return len(self.values)


# ---------------------------------------------------------------------------
# Linear programs
# ---------------------------------------------------------------------------

_STRUCTURE_IDS = itertools.count()


@dataclass(frozen=True, eq=False)
class LinearProgram:
    """
    Linear program  opt <w, x>  s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  lo <= x <= hi.

    Arrays are copied to read-only float arrays on construction. Programs
    created by with_costs share their constraint structure, which lets the
    solver reuse its phase-one basis.
    """
    sense: Sense
    w: np.ndarray
    A_ub: Optional[np.ndarray] = None
    b_ub: Optional[np.ndarray] = None
    A_eq: Optional[np.ndarray] = None
    b_eq: Optional[np.ndarray] = None
    bounds: Optional[np.ndarray] = None
    labels: Optional[Tuple[str, ...]] = None
    structure_id: int = field(default=-1, repr=False)

    def __post_init__(self):
        if not isinstance(self.sense, Sense):
            object.__setattr__(self, "sense", Sense(self.sense))
        w = _frozen_array(self.w).reshape(-1)
        k = w.shape[0]
        object.__setattr__(self, "w", w)
        for A_name, b_name in (("A_ub", "b_ub"), ("A_eq", "b_eq")):
            A = getattr(self, A_name)
            b = getattr(self, b_name)
            A = np.zeros((0, k)) if A is None else np.asarray(A, dtype=float)
            if A.ndim == 1 and A.size == 0:
                A = A.reshape(0, k)
            b = np.zeros(A.shape[0] if A.ndim == 2 else 0) if b is None else b
            object.__setattr__(self, A_name, _frozen_array(A))
            object.__setattr__(self, b_name, _frozen_array(b).reshape(-1))
        if self.bounds is None:
            bounds = np.column_stack([np.zeros(k), np.full(k, np.inf)])
        else:
            bounds = np.asarray(self.bounds, dtype=float)
        object.__setattr__(self, "bounds", _frozen_array(bounds))
        labels = tuple(f"x[{j}]" for j in range(k)) if self.labels is None else tuple(self.labels)
        object.__setattr__(self, "labels", labels)
        if not np.all(np.isfinite(w)):
            raise ConfigurationError("Cost vector w must be finite")
        validate_lp_shapes(k, self.A_ub, self.b_ub, self.A_eq, self.b_eq, self.bounds, labels)
        if self.structure_id < 0:
            object.__setattr__(self, "structure_id", next(_STRUCTURE_IDS))

    @property
    def k(self) -> int:
        return self.w.shape[0]

    def with_costs(self, w: Sequence[float]) -> "LinearProgram":
        """Same constraints, new cost vector."""
        w = np.asarray(w, dtype=float).reshape(-1)
        if w.shape[0] != self.k:
            raise ConfigurationError(f"Cost vector has length {w.shape[0]}, LP has {self.k} variables")
        return LinearProgram(
            sense=self.sense, w=w, A_ub=self.A_ub, b_ub=self.b_ub, A_eq=self.A_eq,
            b_eq=self.b_eq, bounds=self.bounds, labels=self.labels,
            structure_id=self.structure_id,
        )

    def objective_value(self, x: np.ndarray) -> float:
        return float(np.dot(self.w, x))

    def residuals(self, x: np.ndarray) -> Dict[str, float]:
        """Worst equality residual, worst inequality violation and worst bound violation."""
        x = np.asarray(x, dtype=float)
        eq = float(np.max(np.abs(self.A_eq @ x - self.b_eq))) if self.A_eq.shape[0] else 0.0
        ub = float(np.max(self.A_ub @ x - self.b_ub)) if self.A_ub.shape[0] else 0.0
        lo_violation = np.max(self.bounds[:, 0] - x)
        hi = self.bounds[:, 1]
        finite = np.isfinite(hi)
        hi_violation = np.max(x[finite] - hi[finite]) if finite.any() else 0.0
        return {
            "eq": eq,
            "ub": max(ub, 0.0),
            "bounds": float(max(lo_violation, hi_violation, 0.0)),
        }


def _frozen_array(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Solution:
    """Result of a solve: status, primal vector, objective and basis diagnostics."""
    status: SolveStatus
    x: np.ndarray
    objective: float
    reduced_costs: np.ndarray
    basis: Tuple[int, ...] = ()
    iterations: int = 0

    @property
    def is_optimal(self) -> bool:
        return self.status is SolveStatus.OPTIMAL


# ---------------------------------------------------------------------------
# Perturbed optimizer
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NoiseSpec:
    """Noise injected into the cost vector: w + sigma * z with z ~ family."""
    sigma: float
    n_samples: int
    seed: int = 0
    family: NoiseFamily = NoiseFamily.STANDARD_NORMAL

    def __post_init__(self):
        if not isinstance(self.family, NoiseFamily):
            object.__setattr__(self, "family", NoiseFamily(self.family))
        validate_positive("noise.sigma", self.sigma)
        if int(self.n_samples) < 1:
            raise ConfigurationError(f"noise.n_samples must be >= 1, got {self.n_samples}")


@dataclass
class PerturbedSolution:
    """Monte-Carlo mean of perturbed vertex solutions."""
    mean_x: np.ndarray
    seed: int
    n_used: int
    n_excluded: int = 0
    samples: Optional[List[np.ndarray]] = None


@dataclass
class GradientEstimate:
    """Score-function gradient of a linear functional together with its smoothed value."""
    grad: np.ndarray
    value: float  # Monte-Carlo mean of <c, x*(w + sigma z)>
    baseline: float
    n_used: int
    n_excluded: int = 0


# ---------------------------------------------------------------------------
# Hidden confounder attack
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class IntegralParamMap:
    """
    Unit-to-cost-index correspondence of an integral parameterization.

    index_sets[i] are the cost indices owned by unit i, active_sets[i] the
    subset that carries the unit's confounder value in a lift, and inverse[i]
    rebuilds the unit's observed record from w restricted to index_sets[i].
    """
    family: ProblemFamily
    k: int
    index_sets: Tuple[np.ndarray, ...]
    active_sets: Tuple[np.ndarray, ...]
    inverse: Tuple[Callable[[np.ndarray], Optional[Dict[str, float]]], ...]
    fields: Tuple[str, ...]

    @property
    def n_units(self) -> int:
        return len(self.index_sets)


@dataclass(frozen=True, eq=False)
class ConfounderLift:
    """Confounder values placed on LP variables so that <c, x> sums the active units."""
    c: np.ndarray
    family: ProblemFamily
    confounder: str
    owner: np.ndarray  # unit index carried by each cost index, -1 for none

    @property
    def k(self) -> int:
        return self.c.shape[0]


@dataclass(frozen=True)
class AttackConfig:
    """Parameters of an FGSM-style cost attack."""
    epsilon: float
    steps: int
    noise: NoiseSpec
    step_rule: StepRule = StepRule.SIGN
    direction: Direction = Direction.MAXIMIZE_H
    cost_gap_budget: float = 0.05
    outer: OuterFunction = OuterFunction.IDENTITY

    def __post_init__(self):
        for name, enum in (("step_rule", StepRule), ("direction", Direction), ("outer", OuterFunction)):
            value = getattr(self, name)
            if not isinstance(value, enum):
                object.__setattr__(self, name, enum(value))
        validate_positive("attack.epsilon", self.epsilon, allow_zero=True)
        validate_positive("attack.cost_gap_budget", self.cost_gap_budget, allow_zero=True)
        if int(self.steps) < 0:
            raise ConfigurationError(f"attack.steps must be >= 0, got {self.steps}")


@dataclass
class AttackStep:
    """One iteration of the attack loop."""
    step: int
    perturbation_norm: float
    smoothed_h: float
    code_changed: bool
    h_adv: float


@dataclass
class AttackReport:
    """Everything an attack produced, computed with the deterministic solver."""
    w: np.ndarray
    w_hat: np.ndarray
    x_base: np.ndarray
    x_adv: np.ndarray
    status_adv: SolveStatus
    cost_base: float
    cost_adv: float
    rel_cost_gap: float
    shd_codes: int
    h_base: float
    h_adv: float
    delta_h: float
    success: bool
    perturbation_norm: float
    steps_taken: int
    config: AttackConfig
    trace: List[AttackStep] = field(default_factory=list)
    excluded_samples: int = 0
    h_collision: bool = False
    provenance: Dict[str, Any] = field(default_factory=dict)

    @property
    def candidate_objectives(self) -> Dict[str, float]:
        """Values a distance-style attack objective could have used instead of h."""
        return {"shd": float(self.shd_codes), "rel_cost_gap": self.rel_cost_gap}


@dataclass
class NoAttackCertificate:
    """Returned when the observed SCM is causally sufficient: nothing to lift."""
    scm_name: str
    reason: str
    hidden_confounders: Tuple[str, ...] = ()


@dataclass
class WitnessNotFound:
    """The seed sweep ended without a successful attack."""
    seeds_tried: Tuple[int, ...]
    reason: str
    last_report: Optional[AttackReport] = None


@dataclass
class AssumptionDiagnostics:
    """Outcome of a bounded search for the attack's geometric preconditions."""
    radius: float
    trials: int
    seed: int
    multiple_optima_found: bool
    multiple_optima_witness: Optional[np.ndarray]
    n_optima_at_witness: int
    solution_change_found: bool
    solution_change_witness: Optional[np.ndarray]
    optimality_margin: Optional[float] = None
    notes: List[str] = field(default_factory=list)

    @property
    def verdict(self) -> Dict[str, str]:
        def word(found: bool) -> str:
            return "found" if found else "not-found-within-budget"
        return {
            "multiple_optima": word(self.multiple_optima_found),
            "solution_change": word(self.solution_change_found),
        }


@dataclass
class BundleInstance:
    """One realized scenario: LP, parameterization and confounder lift for a seed."""
    seed: int
    dataset: DataSet
    view: AdversaryView
    lp: LinearProgram
    param_map: IntegralParamMap
    lift: ConfounderLift


class ScenarioBundle(Protocol):
    """What hca_witness needs from a scenario."""
    confounder: str
    config: AttackConfig

    def realize(self, scm_true: Scm, scm_observed: Scm, seed: int) -> BundleInstance:
        """Sample, parameterize and lift for one seed."""
        ...


# ---------------------------------------------------------------------------
# Energy system and run bookkeeping
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EnergyParams:
    """Prices and demand of the household energy-system LP."""
    c_pv: float = 0.005      # EUR/kW
    c_bat: float = 300.0     # EUR/kWh
    c_ele: float = 0.25      # EUR/kWh
    c_gas: float = 0.25      # EUR/kWh
    u_gas: float = 0.0       # kWh per hour
    annual_demand: float = 3000.0  # kWh

    def __post_init__(self):
        for name in ("c_pv", "c_bat", "c_ele", "c_gas", "u_gas"):
            validate_positive(f"energy.{name}", getattr(self, name), allow_zero=True)
        validate_positive("energy.annual_demand", self.annual_demand)


@dataclass(frozen=True, eq=False)
class EnergyProfiles:
    """Hourly demand (kWh) and PV availability in [0, 1]."""
    demand: np.ndarray
    avail_pv: np.ndarray

    def __post_init__(self):
        demand = _frozen_array(self.demand).reshape(-1)
        avail = _frozen_array(self.avail_pv).reshape(-1)
        if demand.shape != avail.shape or demand.size == 0:
            raise ConfigurationError(
                f"Profiles need equal non-zero lengths, got {demand.size} and {avail.size}"
            )
        if np.any(demand < 0) or not np.all(np.isfinite(demand)):
            raise ConfigurationError("Demand profile must be finite and non-negative")
        if np.any(avail < 0) or np.any(avail > 1):
            raise ConfigurationError("PV availability must lie in [0, 1]")
        object.__setattr__(self, "demand", demand)
        object.__setattr__(self, "avail_pv", avail)

    @property
    def hours(self) -> int:
        return self.demand.shape[0]


@dataclass
class ScenarioResult:
    """Outcome of one scenario run."""
    name: str
    seed: int
    config: Dict[str, Any]
    summary: Dict[str, Any]
    report: Optional[AttackReport] = None
    dataset: Optional[DataSet] = None
    skew: Optional[pd.DataFrame] = None
    comparison: Optional[pd.DataFrame] = None
    wall_clock_seconds: float = 0.0
    files: List[str] = field(default_factory=list)


@dataclass
class RunManifest:
    """Provenance of a CLI run, written last."""
    command: str
    config_path: Optional[str]
    config: Dict[str, Any]
    output_dir: str
    versions: Dict[str, str]
    wall_clock_seconds: float
    files: List[str] = field(default_factory=list)
