"""
Built-in structural causal models of the bundled scenarios.

Vaccination: wealth confounds health and priority. The observed model only
knows wealth as the noise U_C shared by H and P (causally insufficient);
the true model makes wealth the endogenous variable W <- U_C, with the same
noise names so a dataset sampled from the observed model replays exactly
through the true one.
"""

from dataclasses import dataclass

from ..data.models import Distribution, NoiseVariable, Scm, StructuralEquation, Term

WEALTH = "W"
HEALTH = "H"
PRIORITY = "P"


@dataclass(frozen=True)
class VaccinationScmParams:
    """Coefficients of the vaccination SCM (scores are unitless, wealth in currency units)."""
    wealth_sigma: float = 0.5
    h_intercept: float = 0.5
    h_wealth: float = 0.3
    h_noise: float = 0.15
    p_intercept: float = 0.9
    p_health: float = -0.8
    p_wealth: float = 0.2
    p_noise: float = 0.1


def _vaccination_noise(params: VaccinationScmParams):
    return (
        NoiseVariable("U_C", Distribution("lognormal", {"mean": 0.0, "sigma": params.wealth_sigma})),
        NoiseVariable("U_H", Distribution("normal", {"mean": 0.0, "std": params.h_noise})),
        NoiseVariable("U_P", Distribution("normal", {"mean": 0.0, "std": params.p_noise})),
    )


def _health_priority(params: VaccinationScmParams, wealth_source: str):
    health = StructuralEquation(
        HEALTH, params.h_intercept,
        (Term(wealth_source, params.h_wealth, "log"), Term("U_H", 1.0)),
        clamp=(0.0, 1.0),
    )
    priority = StructuralEquation(
        PRIORITY, params.p_intercept,
        (Term(HEALTH, params.p_health), Term(wealth_source, params.p_wealth, "log"), Term("U_P", 1.0)),
        clamp=(0.0, 1.0),
    )
    return health, priority


def vaccination_scm(params: VaccinationScmParams = VaccinationScmParams()) -> Scm:
    """Observed model: H and P share the hidden confounder U_C."""
    return Scm(
        name="vaccination-observed",
        exogenous=_vaccination_noise(params),
        equations=_health_priority(params, "U_C"),
        observed=(HEALTH, PRIORITY),
    )


def vaccination_true_scm(params: VaccinationScmParams = VaccinationScmParams()) -> Scm:
    """True model: wealth W is endogenous but not observed."""
    return Scm(
        name="vaccination-true",
        exogenous=_vaccination_noise(params),
        equations=(StructuralEquation(WEALTH, 0.0, (Term("U_C", 1.0),)),)
        + _health_priority(params, WEALTH),
        observed=(HEALTH, PRIORITY),
    )


def vaccination_repaired_scm(params: VaccinationScmParams = VaccinationScmParams()) -> Scm:
    """True model with wealth observed, which makes it causally sufficient."""
    true = vaccination_true_scm(params)
    return Scm(
        name="vaccination-repaired",
        exogenous=true.exogenous,
        equations=true.equations,
        observed=(WEALTH, HEALTH, PRIORITY),
    )


def road_scm() -> Scm:
    """Observed road model: segment length U_D drives both toll and travel time."""
    return Scm(
        name="road-observed",
        exogenous=(
            NoiseVariable("U_D", Distribution("uniform", {"low": 50.0, "high": 400.0})),
            NoiseVariable("U_T", Distribution("normal", {"mean": 0.0, "std": 1.0})),
            NoiseVariable("U_R", Distribution("normal", {"mean": 0.0, "std": 0.2})),
        ),
        equations=(
            StructuralEquation("toll", 0.0, (Term("U_D", 0.05), Term("U_T", 1.0)), clamp=(0.0, 1e9)),
            StructuralEquation("hours", 0.0, (Term("U_D", 0.0125), Term("U_R", 1.0)), clamp=(0.0, 1e9)),
        ),
        observed=("toll", "hours"),
    )


def road_true_scm() -> Scm:
    """True road model with segment length D endogenous."""
    observed = road_scm()
    return Scm(
        name="road-true",
        exogenous=observed.exogenous,
        equations=(
            StructuralEquation("D", 0.0, (Term("U_D", 1.0),)),
            StructuralEquation("toll", 0.0, (Term("D", 0.05), Term("U_T", 1.0)), clamp=(0.0, 1e9)),
            StructuralEquation("hours", 0.0, (Term("D", 0.0125), Term("U_R", 1.0)), clamp=(0.0, 1e9)),
        ),
        observed=("toll", "hours"),
    )
