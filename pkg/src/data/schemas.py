"""
Pydantic schemas for every JSON input file.

Schemas only check shape and ranges; conversion to the dataclass models in
models.py (which run the structural checks) happens in sources.py.
"""

from typing import Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


# ---------------------------------------------------------------------------
# SCM
# ---------------------------------------------------------------------------

class DistributionSchema(StrictModel):
    kind: Literal["uniform", "normal", "lognormal", "constant"]
    params: Dict[str, float]


class NoiseSchema(StrictModel):
    name: str = Field(min_length=1)
    distribution: DistributionSchema


class TermSchema(StrictModel):
    source: str = Field(min_length=1)
    coef: float
    transform: Literal["identity", "log", "exp"] = "identity"


class EquationSchema(StrictModel):
    target: str = Field(min_length=1)
    intercept: float = 0.0
    terms: List[TermSchema] = Field(default_factory=list)
    clamp: Optional[Tuple[float, float]] = None


class ScmSchema(StrictModel):
    name: str = "scm"
    exogenous: List[NoiseSchema]
    equations: List[EquationSchema] = Field(min_length=1)
    observed: Optional[List[str]] = None


# ---------------------------------------------------------------------------
# Linear programs and attacks
# ---------------------------------------------------------------------------

class LinearProgramSchema(StrictModel):
    sense: Literal["maximize", "minimize"]
    w: List[float] = Field(min_length=1)
    A_ub: Optional[List[List[float]]] = None
    b_ub: Optional[List[float]] = None
    A_eq: Optional[List[List[float]]] = None
    b_eq: Optional[List[float]] = None
    # null upper bound means +inf
    bounds: Optional[List[Tuple[float, Optional[float]]]] = None
    labels: Optional[List[str]] = None

    @model_validator(mode="after")
    def _rows_have_k_columns(self):
        k = len(self.w)
        for name in ("A_ub", "A_eq"):
            matrix = getattr(self, name)
            if matrix is not None and any(len(row) != k for row in matrix):
                raise ValueError(f"every row of {name} needs {k} entries")
        return self


class LiftSchema(StrictModel):
    family: Literal["LA", "SP"]
    confounder: str = "C"
    c: List[float] = Field(min_length=1)
    owner: Optional[List[int]] = None

    @model_validator(mode="after")
    def _owner_aligned(self):
        if self.owner is not None and len(self.owner) != len(self.c):
            raise ValueError("owner must have the same length as c")
        return self


class NoiseSpecSchema(StrictModel):
    family: Literal["standard-normal", "gumbel"] = "standard-normal"
    sigma: float = Field(gt=0)
    n_samples: int = Field(ge=1)
    seed: int = 0


class AttackConfigSchema(StrictModel):
    epsilon: float = Field(ge=0)
    steps: int = Field(ge=0)
    step_rule: Literal["sign", "raw-gradient"] = "sign"
    direction: Literal["maximize-h", "minimize-h"] = "maximize-h"
    cost_gap_budget: float = Field(default=0.05, ge=0)
    outer: Literal["identity", "mean", "negate"] = "identity"
    noise: NoiseSpecSchema


class AttackFileSchema(StrictModel):
    """Config file of the `attack` command; the attack block may sit at the top level."""
    attack: AttackConfigSchema

    @model_validator(mode="before")
    @classmethod
    def _wrap_bare(cls, data):
        if isinstance(data, dict) and "attack" not in data:
            return {"attack": data}
        return data


# ---------------------------------------------------------------------------
# Scenarios
# ---------------------------------------------------------------------------

class EnergyParamsSchema(StrictModel):
    c_pv: float = Field(default=0.005, ge=0)
    c_bat: float = Field(default=300.0, ge=0)
    c_ele: float = Field(default=0.25, ge=0)
    c_gas: float = Field(default=0.25, ge=0)
    u_gas: float = Field(default=0.0, ge=0)
    annual_demand: float = Field(default=3000.0, gt=0)


class VaccinationSchema(StrictModel):
    n_people: int = Field(default=25, ge=1)
    n_spots: int = Field(default=10, ge=1)
    alpha: float = 1.0
    beta: float = 1.0
    scm: Dict[str, float] = Field(default_factory=dict)

    @field_validator("beta")
    @classmethod
    def _beta_nonzero(cls, value: float) -> float:
        if value == 0:
            raise ValueError("beta must be non-zero")
        return value

    @model_validator(mode="after")
    def _spots_fit(self):
        if self.n_spots > self.n_people:
            raise ValueError("n_spots cannot exceed n_people")
        return self


class ShortestPathSchema(StrictModel):
    graph: Optional[str] = None  # CSV path; the built-in road fixture when omitted
    source: str = "NY"
    target: str = "SF"


class EnergySchema(StrictModel):
    hours: int = Field(default=168, ge=1)
    params: EnergyParamsSchema = Field(default_factory=EnergyParamsSchema)
    price_variants: List[float] = Field(default_factory=lambda: [0.005, 0.001], min_length=1)
    profiles: Optional[str] = None  # CSV with demand, avail_pv columns


class ScenarioConfigSchema(StrictModel):
    seed: int = 0
    attack: Optional[AttackConfigSchema] = None
    vaccination: VaccinationSchema = Field(default_factory=VaccinationSchema)
    shortest_path: ShortestPathSchema = Field(default_factory=ShortestPathSchema)
    energy: EnergySchema = Field(default_factory=EnergySchema)


class SolutionSchema(StrictModel):
    x: List[float]


def format_validation_error(exc: ValidationError) -> str:
    """One line per problem, each prefixed with the dotted field path."""
    lines = []
    for error in exc.errors():
        path = ".".join(str(part) for part in error["loc"]) or "<root>"
        lines.append(f"{path}: {error['msg']}")
    return "\n".join(lines)
