"""
Integral LP-parameterizations, confounder lifts and the h evaluation.

A parameterization turns a dataset into a cost vector unit by unit: each
unit owns a disjoint set of cost indices and can be rebuilt from them. The
lift writes a hidden confounder onto those indices so that <c, x> sums the
confounder over the units a 0/1 solution activates.
"""

import logging
import math
from dataclasses import dataclass
from typing import ClassVar, Dict, Optional, Protocol, Tuple

import numpy as np

from ..core.errors import ConfigurationError
from ..core.metrics import as_binary_code
from ..data.models import (
    AdversaryView,
    ConfounderLift,
    DataSet,
    IntegralParamMap,
    OuterFunction,
    ProblemFamily,
)

logger = logging.getLogger(__name__)

RECONSTRUCTION_TOL = 1e-9


class ParameterizationPolicy(Protocol):
    """Rule turning a dataset into LP costs for one problem family."""
    family: ClassVar[ProblemFamily]

    def apply(self, dataset: DataSet) -> Tuple[np.ndarray, IntegralParamMap]:
        ...


@dataclass(frozen=True)
class VaccinationPolicy:
    """
    Vaccine-spot suitability  s_i = alpha (1 - h_i) + beta p_i  (+ gamma * wealth_i).

    People are workers and spots are jobs. The matrix is padded to
    n_people x n_people with zero-suitability dummy spots so everyone not
    vaccinated is matched to a dummy. Unit i owns its whole row; only the
    real-spot columns carry its confounder value.
    """
    n_spots: int
    alpha: float = 1.0
    beta: float = 1.0
    health_field: str = "H"
    priority_field: str = "P"
    wealth_field: Optional[str] = None
    gamma: float = 0.0
    family: ClassVar[ProblemFamily] = ProblemFamily.LA

    def __post_init__(self):
        if self.n_spots < 1:
            raise ConfigurationError(f"n_spots must be >= 1, got {self.n_spots}")
        if self.beta == 0:
            raise ConfigurationError("beta must be non-zero for the priority to be recoverable")

    def suitability(self, dataset: DataSet) -> np.ndarray:
        h = dataset.column(self.health_field)
        p = dataset.column(self.priority_field)
        s = self.alpha * (1.0 - h) + self.beta * p
        if self.wealth_field is not None:
            s = s + self.gamma * dataset.column(self.wealth_field)
        return s

    def apply(self, dataset: DataSet) -> Tuple[np.ndarray, IntegralParamMap]:
        n = dataset.n
        if self.n_spots > n:
            raise ConfigurationError(
                f"n_spots ({self.n_spots}) cannot exceed the number of people ({n})"
            )
        s = self.suitability(dataset)
        matrix = np.zeros((n, n))
        matrix[:, :self.n_spots] = s[:, None]

        h = dataset.column(self.health_field)
        wealth = (dataset.column(self.wealth_field) if self.wealth_field is not None
                  else np.zeros(n))
        fields = (self.health_field, self.priority_field) + (
            (self.wealth_field,) if self.wealth_field is not None else ()
        )
        param_map = IntegralParamMap(
            family=self.family,
            k=n * n,
            index_sets=tuple(np.arange(i * n, (i + 1) * n) for i in range(n)),
            active_sets=tuple(np.arange(i * n, i * n + self.n_spots) for i in range(n)),
            inverse=tuple(self._inverse(float(h[i]), float(wealth[i])) for i in range(n)),
            fields=fields,
        )
        return matrix.reshape(-1), param_map

    def _inverse(self, health: float, wealth: float):
        # health (and wealth) are side information of the unit; the row only
        # determines the suitability score
        n_spots = self.n_spots

        def rebuild(row: np.ndarray) -> Optional[Dict[str, float]]:
            real, dummy = row[:n_spots], row[n_spots:]
            if np.any(dummy != 0.0) or np.any(real != real[0]):
                return None
            score = float(real[0]) - self.alpha * (1.0 - health)
            if self.wealth_field is not None:
                score -= self.gamma * wealth
            record = {self.health_field: health, self.priority_field: score / self.beta}
            if self.wealth_field is not None:
                record[self.wealth_field] = wealth
            return record

        return rebuild


@dataclass(frozen=True)
class EdgeCostPolicy:
    """Each unit is an edge whose cost field becomes its own cost index."""
    cost_field: str = "toll"
    family: ClassVar[ProblemFamily] = ProblemFamily.SP

    def apply(self, dataset: DataSet) -> Tuple[np.ndarray, IntegralParamMap]:
        w = dataset.column(self.cost_field)
        field = self.cost_field
        param_map = IntegralParamMap(
            family=self.family,
            k=dataset.n,
            index_sets=tuple(np.array([j]) for j in range(dataset.n)),
            active_sets=tuple(np.array([j]) for j in range(dataset.n)),
            inverse=tuple(lambda row: {field: float(row[0])} for _ in range(dataset.n)),
            fields=(field,),
        )
        return w, param_map


def parameterize(dataset: DataSet, policy: ParameterizationPolicy) -> Tuple[np.ndarray, IntegralParamMap]:
    """Cost vector and integral map of a dataset under a policy."""
    return policy.apply(dataset)


def check_integral(param_map: IntegralParamMap, dataset: DataSet, w) -> bool:
    """True iff index sets are disjoint and every unit is rebuilt from its slice."""
    w = np.asarray(w, dtype=float)
    if w.shape[0] != param_map.k or param_map.n_units != dataset.n:
        logger.debug("Parameterization lengths disagree with the dataset")
        return False
    owned = np.concatenate(param_map.index_sets) if param_map.index_sets else np.array([], dtype=int)
    if np.unique(owned).size != owned.size:
        logger.debug("Index sets overlap")
        return False
    for i, (indices, inverse) in enumerate(zip(param_map.index_sets, param_map.inverse)):
        record = inverse(w[indices])
        if record is None:
            logger.debug("Unit %d cannot be rebuilt from its slice", i)
            return False
        for name in param_map.fields:
            if abs(record[name] - dataset.units[i][name]) > RECONSTRUCTION_TOL:
                logger.debug("Unit %d field %s rebuilt as %r", i, name, record[name])
                return False
    return True


def lift_confounder(view: AdversaryView, param_map: IntegralParamMap,
                    family: ProblemFamily) -> ConfounderLift:
    """Place each unit's confounder value on its active cost indices."""
    family = ProblemFamily(family)
    if family is not param_map.family:
        raise ConfigurationError(
            f"Lift requested for family {family.value} but the map is {param_map.family.value}"
        )
    if len(view) != param_map.n_units:
        raise ConfigurationError(
            f"Adversary view has {len(view)} values for {param_map.n_units} units"
        )
    c = np.zeros(param_map.k)
    owner = np.full(param_map.k, -1, dtype=int)
    for i, active in enumerate(param_map.active_sets):
        c[active] = view.values[i]
        owner[active] = i
    return ConfounderLift(c=c, family=family, confounder=view.confounder, owner=owner)


def active_units(x, lift: ConfounderLift) -> np.ndarray:
    """Sorted indices of units whose carrier indices are switched on in the code."""
    code = as_binary_code(x)
    owners = lift.owner[(code == 1) & (lift.owner >= 0)]
    return np.unique(owners)


def evaluate_h(x, lift: ConfounderLift, f: OuterFunction = OuterFunction.IDENTITY) -> float:
    """f applied to the confounder sum of the units active in the 0/1 code x."""
    code = as_binary_code(x)
    if code.shape[0] != lift.k:
        raise ConfigurationError(f"Code has length {code.shape[0]}, lift has {lift.k}")
    total = math.fsum(lift.c[code == 1])
    f = OuterFunction(f)
    if f is OuterFunction.NEGATE:
        return -total
    if f is OuterFunction.MEAN:
        n_active = active_units(code, lift).size
        return total / n_active if n_active else 0.0
    return total
