"""
Differentiable perturbed optimizer.

Smooths the piecewise-constant LP argmax by averaging vertex solutions of
LP(w + sigma z) over Monte-Carlo noise, and estimates gradients of linear
functionals of the smoothed solution with the score-function identity
(standard-normal noise only). Sample k always draws its noise from a stream
seeded by (seed, k), every sample starts phase two from the unperturbed
optimum and reductions run in sample order, so results do not depend on
the number of worker threads.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence

import numpy as np

from ..core.errors import ConfigurationError, PreconditionError, SolverError, UnsupportedEstimatorError
from ..core.simplex import SimplexSolver, default_solver
from ..data.models import (
    GradientEstimate,
    LinearProgram,
    NoiseFamily,
    NoiseSpec,
    PerturbedSolution,
    Solution,
)

logger = logging.getLogger(__name__)


def sample_noise(noise: NoiseSpec, index: int, size: int) -> np.ndarray:
    """Noise vector z_k of sample `index`."""
    rng = np.random.default_rng([int(noise.seed), int(index)])
    if noise.family is NoiseFamily.GUMBEL:
        return rng.gumbel(size=size)
    return rng.standard_normal(size)


class PerturbedOptimizer:
    """
    Monte-Carlo perturbed argmax over a deterministic simplex solver.

    Args:
        solver: solver used for every perturbed instance
        workers: threads used to solve samples (results are identical for any value)
    """

    def __init__(self, solver: Optional[SimplexSolver] = None, workers: int = 1):
        if workers < 1:
            raise ConfigurationError(f"workers must be >= 1, got {workers}")
        self.solver = solver or default_solver()
        self.workers = workers

    def argmax(self, lp: LinearProgram, noise: NoiseSpec, keep_samples: bool = False) -> PerturbedSolution:
        draws = [sample_noise(noise, i, lp.k) for i in range(noise.n_samples)]
        start = self.solver.solve(lp)
        solutions = self._solve_all(lp, [lp.w + noise.sigma * z for z in draws], start)
        kept = [s.x for s in solutions if s.is_optimal]
        excluded = len(solutions) - len(kept)
        self._warn_excluded(excluded, noise.n_samples)
        if not kept:
            raise SolverError("Every perturbed instance failed to solve")
        mean_x = np.sum(np.stack(kept), axis=0) / len(kept)
        return PerturbedSolution(
            mean_x=mean_x, seed=noise.seed, n_used=len(kept), n_excluded=excluded,
            samples=kept if keep_samples else None,
        )

    def gradient(self, lp: LinearProgram, c: Sequence[float], noise: NoiseSpec,
                 base: Optional[Solution] = None) -> GradientEstimate:
        """
        Score-function estimate of d/dw E[<c, x*(w + sigma z)>] with baseline <c, x*(w)>.

        Args:
            base: x*(w) when the caller already solved lp; solved here otherwise

        Raises:
            UnsupportedEstimatorError: noise family is not standard-normal
            PreconditionError: the unperturbed LP has no optimal solution
        """
        if noise.family is not NoiseFamily.STANDARD_NORMAL:
            raise UnsupportedEstimatorError(
                f"Score-function gradients need standard-normal noise, got {noise.family.value}"
            )
        c = _functional(c, lp.k)
        if base is None:
            base = self.solver.solve(lp)
        if not base.is_optimal:
            raise PreconditionError(f"Unperturbed LP is {base.status.value}")
        baseline = float(c @ base.x)

        draws = [sample_noise(noise, i, lp.k) for i in range(noise.n_samples)]
        solutions = self._solve_all(lp, [lp.w + noise.sigma * z for z in draws], base)
        grad = np.zeros(lp.k)
        values = []
        for z, sol in zip(draws, solutions):
            if not sol.is_optimal:
                continue
            value = float(c @ sol.x)
            values.append(value)
            grad += (value - baseline) * z
        excluded = len(solutions) - len(values)
        self._warn_excluded(excluded, noise.n_samples)
        if not values:
            raise SolverError("Every perturbed instance failed to solve")
        grad /= len(values) * noise.sigma
        return GradientEstimate(
            grad=grad, value=float(np.sum(values) / len(values)), baseline=baseline,
            n_used=len(values), n_excluded=excluded,
        )

    def finite_difference(self, lp: LinearProgram, c: Sequence[float], noise: NoiseSpec,
                          h: float) -> np.ndarray:
        """Central differences of the smoothed functional with common random numbers."""
        if not h > 0:
            raise ConfigurationError(f"Finite-difference step must be > 0, got {h}")
        c = _functional(c, lp.k)
        draws = [sample_noise(noise, i, lp.k) for i in range(noise.n_samples)]
        start = self.solver.solve(lp)
        grad = np.zeros(lp.k)
        for j in range(lp.k):
            step = np.zeros(lp.k)
            step[j] = h
            upper = self._smoothed_value(lp, lp.w + step, c, draws, noise.sigma, start)
            lower = self._smoothed_value(lp, lp.w - step, c, draws, noise.sigma, start)
            grad[j] = (upper - lower) / (2.0 * h)
        return grad

    def _smoothed_value(self, lp: LinearProgram, w: np.ndarray, c: np.ndarray,
                        draws: List[np.ndarray], sigma: float, start: Solution) -> float:
        solutions = self._solve_all(lp, [w + sigma * z for z in draws], start)
        values = [float(c @ s.x) for s in solutions if s.is_optimal]
        if not values:
            raise SolverError("Every perturbed instance failed to solve")
        return float(np.sum(values) / len(values))

    def _solve_all(self, lp: LinearProgram, costs: List[np.ndarray],
                   start: Optional[Solution] = None) -> List[Solution]:
        programs = [lp.with_costs(w) for w in costs]
        if self.workers == 1:
            return [self.solver.solve(p, start) for p in programs]
        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            return list(pool.map(lambda p: self.solver.solve(p, start), programs))

    @staticmethod
    def _warn_excluded(excluded: int, total: int) -> None:
        if excluded:
            logger.warning("Excluded %d of %d perturbed samples without an optimal solution",
                           excluded, total)


def _functional(c: Sequence[float], k: int) -> np.ndarray:
    c = np.asarray(c, dtype=float).reshape(-1)
    if c.shape[0] != k:
        raise ConfigurationError(f"Functional has length {c.shape[0]}, LP has {k} variables")
    return c


def perturbed_argmax(lp: LinearProgram, noise: NoiseSpec) -> PerturbedSolution:
    return PerturbedOptimizer().argmax(lp, noise)


def grad_linear_functional(lp: LinearProgram, c: Sequence[float], noise: NoiseSpec) -> np.ndarray:
    return PerturbedOptimizer().gradient(lp, c, noise).grad


def finite_diff_grad(lp: LinearProgram, c: Sequence[float], noise: NoiseSpec, h: float) -> np.ndarray:
    return PerturbedOptimizer().finite_difference(lp, c, noise, h)
