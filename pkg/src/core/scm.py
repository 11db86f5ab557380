"""
Sampling and confounder bookkeeping for structural causal models.

Every unit draws its noise from a stream derived from (seed, unit index,
noise name), so a unit's values never depend on how many units were drawn
or in which order. The draws are stored on the DataSet, which lets
adversary_view replay them through a richer SCM exactly.
"""

import logging
import zlib
from typing import Dict, Set

import numpy as np

from ..data.models import AdversaryView, DataSet, Scm
from .errors import ConfigurationError, ProvenanceError, StructuralError

logger = logging.getLogger(__name__)

PROVENANCE_TOL = 1e-9

_TRANSFORMS = {
    "identity": lambda v: v,
    "exp": np.exp,
}


def noise_rng(seed: int, unit: int, name: str) -> np.random.Generator:
    """Random stream of one noise variable for one unit."""
    return np.random.default_rng([int(seed), int(unit), zlib.crc32(name.encode("utf-8"))])


def draw_noise(scm: Scm, seed: int, unit: int) -> Dict[str, float]:
    return {u.name: u.distribution.draw(noise_rng(seed, unit, u.name)) for u in scm.exogenous}


def evaluate_unit(scm: Scm, noise: Dict[str, float]) -> Dict[str, float]:
    """Evaluate every structural equation in topological order."""
    values: Dict[str, float] = dict(noise)
    for target in scm.order:
        eq = scm.equation(target)
        total = eq.intercept
        for term in eq.terms:
            raw = values[term.source]
            if term.transform == "log":
                if raw <= 0:
                    raise StructuralError(
                        f"log transform in equation for '{target}' got non-positive "
                        f"{term.source}={raw!r}"
                    )
                arg = float(np.log(raw))
            else:
                arg = float(_TRANSFORMS[term.transform](raw))
            total += term.coef * arg
        if eq.clamp is not None:
            total = min(max(total, eq.clamp[0]), eq.clamp[1])
        values[target] = float(total)
    return values


def sample(scm: Scm, n: int, seed: int) -> DataSet:
    """Draw n units from the SCM; records hold only the observed variables."""
    if n < 1:
        raise ConfigurationError(f"Sample size must be >= 1, got {n}")
    units = []
    noise = []
    for i in range(n):
        draws = draw_noise(scm, seed, i)
        values = evaluate_unit(scm, draws)
        units.append({name: values[name] for name in scm.observed})
        noise.append(draws)
    logger.debug("Sampled %d units from SCM '%s' (seed=%d)", n, scm.name, seed)
    return DataSet(units=units, seed=int(seed), source=scm.name, noise=noise)


def hidden_confounders(scm: Scm) -> Set[str]:
    """Noise variables attached to two or more distinct endogenous variables."""
    return {
        u for u in scm.noise_names
        if sum(1 for v in scm.endogenous if u in scm.attached_noises(v)) >= 2
    }


def is_causally_sufficient(scm: Scm) -> bool:
    return not hidden_confounders(scm)


def adversary_view(scm_true: Scm, dataset: DataSet, confounder: str) -> AdversaryView:
    """
    Per-unit values of a confounder of scm_true, replayed on the dataset's noise.

    Raises:
        ConfigurationError: confounder is not a variable of scm_true
        ProvenanceError: the recorded noise does not come from scm_true's
            streams at dataset.seed, or the observed fields disagree with
            scm_true's equations
    """
    if confounder not in scm_true.endogenous and confounder not in scm_true.noise_names:
        raise ConfigurationError(
            f"Confounder '{confounder}' is not a variable of SCM '{scm_true.name}'"
        )
    if not dataset.noise:
        raise ProvenanceError(f"Dataset from '{dataset.source}' carries no recorded noise")
    missing = [u for u in scm_true.noise_names if u not in dataset.noise[0]]
    if missing:
        raise ProvenanceError(f"Dataset from '{dataset.source}' has no draws for noise {missing}")

    shared = [f for f in dataset.fields if f in scm_true.endogenous]
    values = np.empty(dataset.n)
    for i, recorded in enumerate(dataset.noise):
        redrawn = draw_noise(scm_true, dataset.seed, i)
        if any(redrawn[u] != recorded[u] for u in scm_true.noise_names):
            raise ProvenanceError(
                f"Unit {i}: recorded noise does not match seed {dataset.seed} of '{scm_true.name}'"
            )
        realized = evaluate_unit(scm_true, recorded)
        for name in shared:
            if abs(realized[name] - dataset.units[i][name]) > PROVENANCE_TOL:
                raise ProvenanceError(
                    f"Unit {i}: field '{name}' differs from '{scm_true.name}' "
                    f"({dataset.units[i][name]!r} vs {realized[name]!r})"
                )
        values[i] = realized[confounder]
    return AdversaryView(confounder=confounder, values=values)
