"""
Tests for the perturbed optimizer: smoothing, gradients and determinism.
"""

import math

import numpy as np
import pytest

from src.core.errors import ConfigurationError, PreconditionError, UnsupportedEstimatorError
from src.core.metrics import cosine_similarity
from src.core.problems import assignment_margin, build_assignment_lp
from src.core.simplex import solve
from src.data.models import LinearProgram, NoiseFamily, NoiseSpec, Sense
from src.services.perturbed import (
    PerturbedOptimizer,
    finite_diff_grad,
    grad_linear_functional,
    perturbed_argmax,
    sample_noise,
)


def normal_cdf(value: float) -> float:
    return 0.5 * (1.0 + math.erf(value / math.sqrt(2.0)))


def normal_pdf(value: float) -> float:
    return math.exp(-0.5 * value * value) / math.sqrt(2.0 * math.pi)


def unit_interval_lp(w: float) -> LinearProgram:
    """max w x over 0 <= x <= 1: x* is 1 when w > 0."""
    return LinearProgram(sense=Sense.MAXIMIZE, w=[w], A_ub=[[1.0]], b_ub=[1.0])


class TestSampleNoise:
    def test_stream_depends_on_seed_and_index_only(self):
        noise = NoiseSpec(sigma=0.5, n_samples=10, seed=3)
        first = sample_noise(noise, 4, 6)
        again = sample_noise(NoiseSpec(sigma=2.0, n_samples=99, seed=3), 4, 6)
        assert first.tolist() == again.tolist()
        assert first.tolist() != sample_noise(noise, 5, 6).tolist()

    def test_gumbel_family(self):
        noise = NoiseSpec(sigma=1.0, n_samples=1, family=NoiseFamily.GUMBEL)
        assert sample_noise(noise, 0, 3).shape == (3,)

    def test_sigma_must_be_positive(self):
        with pytest.raises(ConfigurationError):
            NoiseSpec(sigma=0.0, n_samples=5)
        with pytest.raises(ConfigurationError):
            NoiseSpec(sigma=1.0, n_samples=0)


class TestArgmax:
    def test_single_variable_matches_normal_cdf(self):
        noise = NoiseSpec(sigma=1.0, n_samples=2000, seed=1)
        result = PerturbedOptimizer().argmax(unit_interval_lp(0.3), noise)
        assert result.n_used == 2000
        assert result.mean_x[0] == pytest.approx(normal_cdf(0.3), abs=0.05)

    def test_two_by_two_matches_closed_form(self):
        # identity wins when the difference of four N(0, sigma^2) draws stays above -gap
        w = np.array([[1.0, 0.2], [0.4, 0.9]])
        sigma = 0.5
        lp, _ = build_assignment_lp(w)
        result = PerturbedOptimizer().argmax(lp, NoiseSpec(sigma=sigma, n_samples=3000, seed=5))
        gap = w[0, 0] + w[1, 1] - w[0, 1] - w[1, 0]
        expected = normal_cdf(gap / (2.0 * sigma))
        assert result.mean_x[0] == pytest.approx(expected, abs=0.04)
        assert result.mean_x[0] + result.mean_x[1] == pytest.approx(1.0)

    def test_vanishing_temperature_returns_the_vertex(self):
        cost = np.random.default_rng(11).uniform(size=(4, 4))
        assert assignment_margin(cost) > 1e-6
        lp, _ = build_assignment_lp(cost)
        result = perturbed_argmax(lp, NoiseSpec(sigma=1e-12, n_samples=5))
        np.testing.assert_allclose(result.mean_x, solve(lp).x, atol=1e-6)

    def test_mean_lies_in_the_feasible_polytope(self):
        lp, _ = build_assignment_lp(np.random.default_rng(0).uniform(size=(3, 3)))
        result = PerturbedOptimizer().argmax(lp, NoiseSpec(sigma=0.5, n_samples=30, seed=2))
        np.testing.assert_allclose(lp.A_eq @ result.mean_x, lp.b_eq, atol=1e-9)
        assert np.all(result.mean_x >= -1e-12) and np.all(result.mean_x <= 1.0 + 1e-12)

    def test_same_seed_is_reproducible(self):
        lp, _ = build_assignment_lp(np.random.default_rng(4).uniform(size=(3, 3)))
        noise = NoiseSpec(sigma=0.3, n_samples=25, seed=9)
        first = PerturbedOptimizer().argmax(lp, noise)
        second = PerturbedOptimizer().argmax(lp, noise)
        assert first.mean_x.tolist() == second.mean_x.tolist()

    def test_worker_count_does_not_change_the_result(self):
        lp, _ = build_assignment_lp(np.random.default_rng(8).uniform(size=(3, 3)))
        noise = NoiseSpec(sigma=0.3, n_samples=20, seed=1)
        serial = PerturbedOptimizer(workers=1).argmax(lp, noise)
        threaded = PerturbedOptimizer(workers=4).argmax(lp, noise)
        assert serial.mean_x.tolist() == threaded.mean_x.tolist()

    def test_keep_samples(self):
        result = PerturbedOptimizer().argmax(unit_interval_lp(1.0),
                                             NoiseSpec(sigma=0.1, n_samples=4), keep_samples=True)
        assert len(result.samples) == 4

    def test_workers_must_be_positive(self):
        with pytest.raises(ConfigurationError):
            PerturbedOptimizer(workers=0)


class TestGradient:
    def test_single_variable_matches_normal_density(self):
        noise = NoiseSpec(sigma=1.0, n_samples=2000, seed=7)
        estimate = PerturbedOptimizer().gradient(unit_interval_lp(0.3), [1.0], noise)
        assert estimate.baseline == pytest.approx(1.0)
        assert estimate.grad[0] == pytest.approx(normal_pdf(0.3), abs=0.06)
        assert estimate.value == pytest.approx(normal_cdf(0.3), abs=0.05)

    def test_gumbel_noise_is_unsupported(self):
        noise = NoiseSpec(sigma=1.0, n_samples=5, family=NoiseFamily.GUMBEL)
        with pytest.raises(UnsupportedEstimatorError):
            PerturbedOptimizer().gradient(unit_interval_lp(0.3), [1.0], noise)

    def test_functional_length_must_match(self):
        with pytest.raises(ConfigurationError):
            grad_linear_functional(unit_interval_lp(0.3), [1.0, 2.0], NoiseSpec(sigma=1.0, n_samples=2))

    def test_infeasible_base_is_a_precondition_error(self):
        lp = LinearProgram(sense=Sense.MAXIMIZE, w=[1.0], A_eq=[[1.0]], b_eq=[-1.0])
        with pytest.raises(PreconditionError):
            grad_linear_functional(lp, [1.0], NoiseSpec(sigma=1.0, n_samples=2))

    def test_finite_difference_step_must_be_positive(self):
        with pytest.raises(ConfigurationError):
            PerturbedOptimizer().finite_difference(unit_interval_lp(0.3), [1.0],
                                                   NoiseSpec(sigma=1.0, n_samples=2), h=0.0)

    def test_finite_difference_agrees_in_sign(self):
        lp, _ = build_assignment_lp(np.array([[1.0, 0.2], [0.4, 0.9]]))
        c = np.array([1.0, 0.0, 0.0, 0.0])
        noise = NoiseSpec(sigma=0.5, n_samples=400, seed=3)
        fd = PerturbedOptimizer().finite_difference(lp, c, noise, h=0.2)
        assert fd[0] > 0 and fd[3] > 0
        assert fd[1] < 0 and fd[2] < 0

    def test_score_function_points_along_finite_differences(self):
        lp, _ = build_assignment_lp(np.array([[1.0, 0.2], [0.4, 0.9]]))
        c = np.array([1.0, 0.0, 0.0, 0.0])
        noise = NoiseSpec(sigma=0.5, n_samples=2000, seed=6)
        oracle = finite_diff_grad(lp, c, NoiseSpec(sigma=0.5, n_samples=400, seed=6), h=0.2)
        assert cosine_similarity(grad_linear_functional(lp, c, noise), oracle) >= 0.8

    def test_warm_started_samples_match_cold_solves(self):
        lp, _ = build_assignment_lp(np.random.default_rng(13).uniform(size=(3, 3)))
        c = np.arange(9.0)
        noise = NoiseSpec(sigma=0.5, n_samples=40, seed=2)
        optimizer = PerturbedOptimizer()
        estimate = optimizer.gradient(lp, c, noise)
        grad = np.zeros(9)
        baseline = float(c @ solve(lp).x)
        for i in range(noise.n_samples):
            z = sample_noise(noise, i, lp.k)
            grad += (float(c @ solve(lp.with_costs(lp.w + noise.sigma * z)).x) - baseline) * z
        np.testing.assert_allclose(estimate.grad, grad / (noise.n_samples * noise.sigma), atol=1e-9)

    @pytest.mark.slow
    def test_gradient_fidelity_against_finite_differences(self):
        rng = np.random.default_rng(17)
        lp, _ = build_assignment_lp(rng.uniform(size=(3, 3)))
        c = rng.uniform(size=9)
        optimizer = PerturbedOptimizer(workers=4)
        estimate = optimizer.gradient(lp, c, NoiseSpec(sigma=0.5, n_samples=100_000, seed=3))
        oracle = optimizer.finite_difference(lp, c, NoiseSpec(sigma=0.5, n_samples=20_000, seed=3), h=0.1)
        assert cosine_similarity(estimate.grad, oracle) >= 0.8

    @pytest.mark.slow
    def test_two_by_two_gradient_direction(self):
        w = np.array([[1.0, 0.2], [0.4, 0.9]])
        sigma = 0.5
        lp, _ = build_assignment_lp(w)
        gap = w[0, 0] + w[1, 1] - w[0, 1] - w[1, 0]
        g = normal_pdf(gap / (2.0 * sigma)) / (2.0 * sigma)
        expected = np.array([g, -g, -g, g])
        c = np.array([1.0, 0.0, 0.0, 0.0])
        estimate = PerturbedOptimizer(workers=4).gradient(lp, c, NoiseSpec(sigma=sigma, n_samples=100_000))
        cosine = float(estimate.grad @ expected / (np.linalg.norm(estimate.grad) * np.linalg.norm(expected)))
        assert cosine >= 0.8
