"""
Tests for integral parameterizations, confounder lifts and h.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.core.errors import ConfigurationError, DegenerateSolutionError
from src.core.problems import build_assignment_lp, build_shortest_path_lp
from src.core.scm import adversary_view, sample
from src.core.simplex import solve
from src.data.models import AdversaryView, DataSet, IntegralParamMap, OuterFunction, ProblemFamily
from src.services.parameterization import (
    EdgeCostPolicy,
    VaccinationPolicy,
    active_units,
    check_integral,
    evaluate_h,
    lift_confounder,
    parameterize,
)
from src.services.scenarios import graph_dataset
from src.services.scm_library import vaccination_scm, vaccination_true_scm


@pytest.fixture
def people():
    return sample(vaccination_scm(), 6, seed=0)


class TestVaccinationPolicy:
    def test_rows_hold_suitability_then_dummies(self, people):
        policy = VaccinationPolicy(n_spots=2)
        w, param_map = parameterize(people, policy)
        matrix = w.reshape(6, 6)
        s = 1.0 - people.column("H") + people.column("P")
        np.testing.assert_allclose(matrix[:, 0], s)
        np.testing.assert_allclose(matrix[:, 1], s)
        assert np.all(matrix[:, 2:] == 0.0)
        assert param_map.family is ProblemFamily.LA
        assert param_map.n_units == 6
        assert param_map.active_sets[1].tolist() == [6, 7]

    def test_parameterization_is_integral(self, people):
        w, param_map = parameterize(people, VaccinationPolicy(n_spots=3, alpha=0.5, beta=2.0))
        assert check_integral(param_map, people, w)

    def test_perturbed_row_is_not_integral(self, people):
        w, param_map = parameterize(people, VaccinationPolicy(n_spots=3))
        w = w.copy()
        w[5] = 0.1  # dummy column of the first person
        assert not check_integral(param_map, people, w)

    def test_overlapping_index_sets_are_not_integral(self, people):
        w, param_map = parameterize(people, VaccinationPolicy(n_spots=3))
        overlapping = IntegralParamMap(
            family=param_map.family,
            k=param_map.k,
            index_sets=(param_map.index_sets[0],) * people.n,
            active_sets=param_map.active_sets,
            inverse=param_map.inverse,
            fields=param_map.fields,
        )
        assert not check_integral(overlapping, people, w)

    def test_wrong_length_is_not_integral(self, people):
        w, param_map = parameterize(people, VaccinationPolicy(n_spots=3))
        assert not check_integral(param_map, people, w[:-1])

    def test_too_many_spots(self, people):
        with pytest.raises(ConfigurationError):
            parameterize(people, VaccinationPolicy(n_spots=7))

    def test_zero_beta_is_rejected(self):
        with pytest.raises(ConfigurationError):
            VaccinationPolicy(n_spots=2, beta=0.0)

    def test_missing_field(self, people):
        with pytest.raises(ConfigurationError):
            parameterize(people, VaccinationPolicy(n_spots=2, health_field="Age"))


class TestLift:
    def test_vaccination_lift_marks_real_spots(self, people):
        _, param_map = parameterize(people, VaccinationPolicy(n_spots=2))
        view = adversary_view(vaccination_true_scm(), people, "W")
        lift = lift_confounder(view, param_map, ProblemFamily.LA)
        matrix = lift.c.reshape(6, 6)
        np.testing.assert_allclose(matrix[:, 0], view.values)
        assert np.all(matrix[:, 2:] == 0.0)
        assert lift.owner[:2].tolist() == [0, 0]
        assert lift.owner[2:6].tolist() == [-1] * 4
        assert lift.confounder == "W"

    def test_family_mismatch(self, people):
        _, param_map = parameterize(people, VaccinationPolicy(n_spots=2))
        view = adversary_view(vaccination_true_scm(), people, "W")
        with pytest.raises(ConfigurationError):
            lift_confounder(view, param_map, ProblemFamily.SP)

    def test_view_length_mismatch(self, people):
        _, param_map = parameterize(people, VaccinationPolicy(n_spots=2))
        with pytest.raises(ConfigurationError):
            lift_confounder(AdversaryView("W", np.ones(3)), param_map, ProblemFamily.LA)

    def test_edge_lift_is_one_to_one(self, diamond):
        dataset, view = graph_dataset(diamond)
        w, param_map = parameterize(dataset, EdgeCostPolicy())
        assert w.tolist() == [1.0, 1.0, 1.0, 1.005]
        assert check_integral(param_map, dataset, w)
        lift = lift_confounder(view, param_map, "SP")
        assert lift.c.tolist() == [1.0, 1.0, 3.0, 4.0]
        assert lift.owner.tolist() == [0, 1, 2, 3]


class TestEvaluateH:
    def test_vaccinated_wealth_sum(self, people):
        w, param_map = parameterize(people, VaccinationPolicy(n_spots=2))
        view = adversary_view(vaccination_true_scm(), people, "W")
        lift = lift_confounder(view, param_map, ProblemFamily.LA)
        lp, _ = build_assignment_lp(w.reshape(6, 6))
        x = solve(lp).x
        chosen = active_units(x, lift)
        assert chosen.size == 2
        assert evaluate_h(x, lift) == pytest.approx(float(view.values[chosen].sum()))
        assert evaluate_h(x, lift, OuterFunction.MEAN) == pytest.approx(float(view.values[chosen].mean()))
        assert evaluate_h(x, lift, OuterFunction.NEGATE) == pytest.approx(-float(view.values[chosen].sum()))

    def test_shortest_path_co2(self, diamond):
        dataset, view = graph_dataset(diamond)
        w, param_map = parameterize(dataset, EdgeCostPolicy())
        lift = lift_confounder(view, param_map, ProblemFamily.SP)
        lp, _ = build_shortest_path_lp(diamond, "s", "t")
        x = solve(lp.with_costs(w)).x
        assert evaluate_h(x, lift) == pytest.approx(2.0)
        assert evaluate_h([0, 0, 1, 1], lift) == pytest.approx(7.0)

    def test_fractional_code_is_degenerate(self, diamond):
        dataset, view = graph_dataset(diamond)
        _, param_map = parameterize(dataset, EdgeCostPolicy())
        lift = lift_confounder(view, param_map, ProblemFamily.SP)
        with pytest.raises(DegenerateSolutionError):
            evaluate_h([0.5, 0.5, 0.5, 0.5], lift)

    def test_length_mismatch(self, diamond):
        dataset, view = graph_dataset(diamond)
        _, param_map = parameterize(dataset, EdgeCostPolicy())
        lift = lift_confounder(view, param_map, ProblemFamily.SP)
        with pytest.raises(ConfigurationError):
            evaluate_h([1, 1], lift)

    def test_mean_of_empty_selection_is_zero(self, diamond):
        dataset, view = graph_dataset(diamond)
        _, param_map = parameterize(dataset, EdgeCostPolicy())
        lift = lift_confounder(view, param_map, ProblemFamily.SP)
        assert evaluate_h([0, 0, 0, 0], lift, OuterFunction.MEAN) == 0.0


@settings(max_examples=50, deadline=None)
@given(values=st.lists(st.floats(min_value=0.0, max_value=100.0), min_size=1, max_size=10),
       data=st.data())
def test_h_of_an_edge_lift_is_the_dot_product(values, data):
    k = len(values)
    code = data.draw(st.lists(st.integers(0, 1), min_size=k, max_size=k))
    dataset = DataSet(units=[{"toll": 1.0} for _ in range(k)], seed=0, source="edges")
    _, param_map = parameterize(dataset, EdgeCostPolicy())
    lift = lift_confounder(AdversaryView("co2", values), param_map, ProblemFamily.SP)
    expected = math.fsum(v for v, bit in zip(values, code) if bit)
    assert evaluate_h(code, lift) == expected
    assert active_units(code, lift).tolist() == [j for j, bit in enumerate(code) if bit]
