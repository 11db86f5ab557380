"""
Hidden confounder attack engine.

The attack nudges the LP cost vector along the (sign of the) smoothed
gradient of the confounder functional <c, x*(w)> until the deterministic
solver returns a different vertex whose confounder sum moved in the
requested direction while the objective stayed within the cost-gap budget.
"""

import logging
import math
from dataclasses import replace
from typing import Iterable, Optional, Union

import numpy as np

from ..config import TAU_FEAS, TAU_OPT
from ..core.errors import ConfigurationError, PreconditionError
from ..core.metrics import as_binary_code, rel_cost_gap, shd
from ..core.problems import assignment_margin
from ..core.scm import hidden_confounders, is_causally_sufficient
from ..core.simplex import SimplexSolver, default_solver, enumerate_alternate_optima
from ..data.models import (
    AssumptionDiagnostics,
    AttackConfig,
    AttackReport,
    AttackStep,
    ConfounderLift,
    Direction,
    IntegralParamMap,
    LinearProgram,
    NoAttackCertificate,
    ProblemFamily,
    ScenarioBundle,
    Scm,
    Sense,
    Solution,
    StepRule,
    WitnessNotFound,
)
from .parameterization import check_integral, evaluate_h
from .perturbed import PerturbedOptimizer

logger = logging.getLogger(__name__)

BISECTION_STEPS = 40


def step_seed(seed: int, step: int) -> int:
    """Noise seed of attack step `step`, derived from the configured seed."""
    return int(np.random.SeedSequence([int(seed), int(step)]).generate_state(1)[0])


def shape_step(grad: np.ndarray, family: ProblemFamily, rule: StepRule,
               param_map: Optional[IntegralParamMap] = None) -> np.ndarray:
    """
    Attack step for one gradient estimate.

    With a param_map the gradient is first averaged over each unit's active
    indices and zeroed elsewhere, so every unit moves by one scalar. For
    assignments the part of the step that shifts every perfect matching's
    objective by the same amount is then removed: the mean over units when a
    map is given, row and column means of the square cost matrix otherwise.
    Under the sign rule the result is rescaled to a max-norm of at most one.
    """
    step = np.asarray(grad, dtype=float)
    if param_map is not None:
        step = tie_to_units(step, param_map)
    if rule is StepRule.SIGN:
        step = np.sign(step)
    if family is ProblemFamily.LA:
        step = _balanced(step, param_map)
        if rule is StepRule.SIGN:
            peak = float(np.max(np.abs(step), initial=0.0))
            if peak > 1.0:
                step = step / peak
    return step


def tie_to_units(step: np.ndarray, param_map: IntegralParamMap) -> np.ndarray:
    """Average the step over each unit's active indices; other indices do not move."""
    tied = np.zeros_like(step)
    for active in param_map.active_sets:
        if active.size:
            tied[active] = np.mean(step[active])
    return tied


def _balanced(step: np.ndarray, param_map: Optional[IntegralParamMap]) -> np.ndarray:
    if param_map is not None:
        active = [a for a in param_map.active_sets if a.size]
        if not active:
            return step
        shift = np.mean([step[a[0]] for a in active])
        out = step.copy()
        for a in active:
            out[a] -= shift
        return out
    n = math.isqrt(step.shape[0])
    if n * n != step.shape[0]:
        return step
    S = step.reshape(n, n)
    centered = S - S.mean(axis=1, keepdims=True) - S.mean(axis=0, keepdims=True) + S.mean()
    return centered.reshape(-1)


class AttackEngine:
    """
    Runs cost attacks against one solver.

    Args:
        solver: deterministic solver used for base, adversarial and perturbed solves
        workers: threads for the perturbed samples of each gradient estimate
    """

    def __init__(self, solver: Optional[SimplexSolver] = None, workers: int = 1):
        self.solver = solver or default_solver()
        self.optimizer = PerturbedOptimizer(self.solver, workers=workers)

    def attack(self, lp: LinearProgram, lift: ConfounderLift, cfg: AttackConfig,
               param_map: Optional[IntegralParamMap] = None) -> AttackReport:
        """
        Run the iterated cost attack.

        With a param_map the step is kept inside the costs the parameterization
        can produce (see shape_step), so w_hat still decodes to a dataset.
        """
        if lift.k != lp.k:
            raise ConfigurationError(f"Lift has length {lift.k}, LP has {lp.k} variables")
        base = self.solver.solve(lp)
        if not base.is_optimal:
            raise PreconditionError(f"Base LP is {base.status.value}; nothing to attack")

        w = lp.w.copy()
        code_base = as_binary_code(base.x)
        h_base = evaluate_h(code_base, lift, cfg.outer)
        sign = 1.0 if cfg.direction is Direction.MAXIMIZE_H else -1.0

        delta = np.zeros(lp.k)
        adv = base
        trace = []
        excluded = 0
        collision = False
        steps_taken = 0
        success = False

        if cfg.epsilon > 0:
            for s in range(1, cfg.steps + 1):
                noise = replace(cfg.noise, seed=step_seed(cfg.noise.seed, s))
                estimate = self.optimizer.gradient(lp.with_costs(w + delta), lift.c, noise, base=adv)
                excluded += estimate.n_excluded
                step = shape_step(estimate.grad, lift.family, cfg.step_rule, param_map)
                delta = delta + sign * cfg.epsilon * step
                steps_taken = s

                adv = self.solver.solve(lp.with_costs(w + delta))
                if not adv.is_optimal:
                    logger.warning("Adversarial LP is %s at step %d", adv.status.value, s)
                    break
                code_adv = as_binary_code(adv.x)
                h_adv = evaluate_h(code_adv, lift, cfg.outer)
                changed = bool(np.any(code_adv != code_base))
                collision = collision or (changed and h_adv == h_base)
                trace.append(AttackStep(
                    step=s,
                    perturbation_norm=float(np.max(np.abs(delta))),
                    smoothed_h=estimate.value,
                    code_changed=changed,
                    h_adv=h_adv,
                ))
                logger.debug("step %d: |delta|=%.4g smoothed h=%.6g changed=%s h_adv=%.6g",
                             s, trace[-1].perturbation_norm, estimate.value, changed, h_adv)
                cost_adv = float((w + delta) @ adv.x)
                if (changed and self._moved(h_adv, h_base, cfg.direction)
                        and rel_cost_gap(cost_adv, base.objective) <= cfg.cost_gap_budget):
                    success = True
                    break

        return self._report(lp, lift, cfg, base, adv, w, delta, steps_taken, success,
                            trace, excluded, collision)

    @staticmethod
    def _moved(h_adv: float, h_base: float, direction: Direction) -> bool:
        return h_adv > h_base if direction is Direction.MAXIMIZE_H else h_adv < h_base

    @staticmethod
    def _report(lp, lift, cfg, base: Solution, adv: Solution, w, delta, steps_taken, success,
                trace, excluded, collision) -> AttackReport:
        w_hat = w + delta
        x_base = base.x
        h_base = evaluate_h(x_base, lift, cfg.outer)
        if adv.is_optimal:
            x_adv = adv.x
            h_adv = evaluate_h(x_adv, lift, cfg.outer)
            cost_adv = float(w_hat @ x_adv)
            distance = shd(x_base, x_adv)
        else:
            x_adv = np.zeros(lp.k)
            h_adv = h_base
            cost_adv = float("nan")
            distance = 0
        gap = rel_cost_gap(cost_adv, base.objective) if adv.is_optimal else float("nan")
        return AttackReport(
            w=w.copy(),
            w_hat=w_hat,
            x_base=x_base,
            x_adv=x_adv,
            status_adv=adv.status,
            cost_base=base.objective,
            cost_adv=cost_adv,
            rel_cost_gap=gap,
            shd_codes=distance,
            h_base=h_base,
            h_adv=h_adv,
            delta_h=h_adv - h_base,
            success=success,
            perturbation_norm=float(np.max(np.abs(delta))) if delta.size else 0.0,
            steps_taken=steps_taken,
            config=cfg,
            trace=trace,
            excluded_samples=excluded,
            h_collision=collision,
            provenance={"noise_seed": cfg.noise.seed},
        )

    def verify_assumptions(self, lp: LinearProgram, radius: float, trials: int, seed: int,
                           assignment_n: Optional[int] = None,
                           limit: int = 8) -> AssumptionDiagnostics:
        """
        Bounded search for the attack's preconditions inside the infinity ball of `radius`.

        Multiple optima are looked for at w itself and at tie points located by
        bisection between w and any trial cost that changes the solution.
        A solution change is looked for at the adversarial corner of the ball,
        where every chosen variable gets worse by `radius` and every other
        variable better, and at `trials` uniform random points.
        """
        if radius < 0:
            raise ConfigurationError(f"radius must be >= 0, got {radius}")
        base = self.solver.solve(lp)
        if not base.is_optimal:
            raise PreconditionError(f"Base LP is {base.status.value}")
        w = lp.w.copy()
        notes = []

        margin = None
        if assignment_n is not None:
            margin = assignment_margin(w.reshape(assignment_n, assignment_n), lp.sense)
            notes.append(f"optimality margin {margin:.6g} from the permutation oracle")

        optima = enumerate_alternate_optima(lp, base, limit=limit, solver=self.solver)
        multi_found = len(optima) > 1
        multi_witness = w.copy() if multi_found else None
        n_optima = len(optima) if multi_found else 1
        if multi_found:
            notes.append("multiple optima at the unperturbed costs")

        change_found = False
        change_witness = None
        code = np.rint(base.x)
        corner = (1.0 - 2.0 * code) if lp.sense is Sense.MAXIMIZE else (2.0 * code - 1.0)
        candidates = [w + radius * corner]
        for t in range(trials):
            rng = np.random.default_rng([int(seed), t])
            candidates.append(w + radius * rng.uniform(-1.0, 1.0, lp.k))

        for w_hat in candidates:
            sol = self.solver.solve(lp.with_costs(w_hat))
            if not sol.is_optimal or not self._differs(sol.x, base.x):
                continue
            if not change_found:
                change_found, change_witness = True, w_hat
            if not multi_found:
                tie = self._tie_point(lp, w, w_hat, base)
                if tie is not None:
                    multi_found, multi_witness, n_optima = True, tie[0], tie[1]
                    notes.append("multiple optima at a bisected tie point")
            if change_found and multi_found:
                break

        return AssumptionDiagnostics(
            radius=radius,
            trials=trials,
            seed=seed,
            multiple_optima_found=multi_found,
            multiple_optima_witness=multi_witness,
            n_optima_at_witness=n_optima,
            solution_change_found=change_found,
            solution_change_witness=change_witness,
            optimality_margin=margin,
            notes=notes,
        )

    def _tie_point(self, lp: LinearProgram, w: np.ndarray, w_far: np.ndarray, base: Solution):
        """Cost on the segment [w, w_far] where two vertices have equal objective."""
        lo, hi = 0.0, 1.0
        x_lo, x_hi = base.x, self.solver.solve(lp.with_costs(w_far)).x
        direction = w_far - w
        for _ in range(BISECTION_STEPS):
            mid = 0.5 * (lo + hi)
            sol = self.solver.solve(lp.with_costs(w + mid * direction))
            if self._differs(sol.x, base.x):
                hi, x_hi = mid, sol.x
            else:
                lo, x_lo = mid, sol.x
        denom = float(direction @ (x_lo - x_hi))
        if abs(denom) < TAU_OPT:
            return None
        lam = float(w @ (x_hi - x_lo)) / denom
        if not 0.0 <= lam <= 1.0:
            return None
        w_tie = w + lam * direction
        tie_lp = lp.with_costs(w_tie)
        sol = self.solver.solve(tie_lp)
        scale = max(1.0, abs(sol.objective))
        if (abs(float(w_tie @ x_lo) - sol.objective) > TAU_FEAS * scale
                or abs(float(w_tie @ x_hi) - sol.objective) > TAU_FEAS * scale):
            return None
        optima = enumerate_alternate_optima(tie_lp, sol, limit=8, solver=self.solver)
        return w_tie, max(2, len(optima))

    @staticmethod
    def _differs(x1: np.ndarray, x2: np.ndarray) -> bool:
        return bool(np.max(np.abs(np.asarray(x1) - np.asarray(x2))) > 1e-6)

    def hca_witness(self, scm_true: Scm, scm_observed: Scm, bundle: ScenarioBundle,
                    seeds: Iterable[int] = range(10)
                    ) -> Union[AttackReport, NoAttackCertificate, WitnessNotFound]:
        """
        Executable witness that a causally insufficient SCM yields an attack.

        Runs sample, parameterize, lift and attack for each seed and returns the
        first successful report (lowest seed). A causally sufficient observed
        SCM gets a certificate instead, since there is no hidden confounder.

        Raises:
            PreconditionError: the bundle's parameterization is not integral
        """
        if is_causally_sufficient(scm_observed):
            return NoAttackCertificate(
                scm_name=scm_observed.name,
                reason="observed SCM is causally sufficient; no hidden confounder to lift",
            )
        confounders = tuple(sorted(hidden_confounders(scm_observed)))
        tried = []
        last = None
        for seed in seeds:
            instance = bundle.realize(scm_true, scm_observed, seed)
            if not check_integral(instance.param_map, instance.dataset, instance.lp.w):
                raise PreconditionError(
                    f"Parameterization of seed {seed} is not integral; the witness needs one"
                )
            cfg = replace(bundle.config, noise=replace(bundle.config.noise, seed=seed))
            report = self.attack(instance.lp, instance.lift, cfg, instance.param_map)
            report.provenance.update({
                "seed": seed,
                "hidden_confounders": list(confounders),
                "confounder": bundle.confounder,
            })
            tried.append(seed)
            last = report
            logger.info("Witness seed %d: success=%s delta_h=%.6g", seed, report.success, report.delta_h)
            if report.success:
                return report
        return WitnessNotFound(
            seeds_tried=tuple(tried),
            reason="no seed produced a successful attack",
            last_report=last,
        )
