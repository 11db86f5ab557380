"""
Tests for the assignment, shortest-path and energy LP builders and their oracles.
"""

import itertools

import networkx as nx
import numpy as np
import pytest

from src.config import TAU_FEAS
from src.core.energy import (
    balance_residuals,
    build_energy_lp,
    energy_index,
    energy_summary,
    storage_residuals,
    synthesize_profiles,
)
from src.core.errors import ConfigurationError, PreconditionError
from src.core.problems import (
    assignment_margin,
    brute_force_assignment,
    brute_force_paths,
    build_assignment_lp,
    build_shortest_path_lp,
    graph_from_edges,
    ordered_edges,
    path_edges,
)
from src.core.simplex import enumerate_alternate_optima, solve
from src.data.models import EnergyParams, EnergyProfiles, Sense, SolveStatus


class TestAssignment:
    def test_structure_of_two_by_two(self):
        lp, table = build_assignment_lp(np.ones((2, 2)))
        assert lp.k == 4
        assert lp.A_eq.shape == (4, 4)
        assert lp.A_ub.shape[0] == 0
        assert lp.bounds.tolist() == [[0.0, 1.0]] * 4
        assert lp.labels[1] == "x[worker=0,job=1]"

    def test_worker_table_is_row_major(self):
        _, table = build_assignment_lp(np.zeros((3, 3)))
        assert table[0].tolist() == [0, 1, 2]
        assert table[2].tolist() == [6, 7, 8]

    def test_dominant_diagonal(self):
        cost = np.array([[9.0, 1.0, 1.0], [1.0, 9.0, 1.0], [1.0, 1.0, 9.0]])
        lp, _ = build_assignment_lp(cost)
        sol = solve(lp)
        assert sol.objective == pytest.approx(27.0)
        np.testing.assert_allclose(sol.x, np.eye(3).reshape(-1), atol=1e-9)

    def test_non_square_doubly_stochastic_is_rejected(self):
        with pytest.raises(ConfigurationError):
            build_assignment_lp(np.ones((2, 3)))

    def test_rectangular_assignment_matches_smaller_side(self):
        cost = np.array([[1.0, 5.0, 2.0], [4.0, 1.0, 3.0]])
        lp, _ = build_assignment_lp(cost, doubly_stochastic=False)
        sol = solve(lp)
        assert sol.objective == pytest.approx(9.0)
        assert lp.A_eq.shape == (2, 6)
        assert lp.A_ub.shape == (3, 6)

    def test_all_equal_two_by_two_has_both_permutations(self):
        lp, _ = build_assignment_lp(np.ones((2, 2)))
        sol = solve(lp)
        optima = enumerate_alternate_optima(lp, sol)
        assert len(optima) == 2
        codes = {tuple(np.rint(o.x).astype(int)) for o in optima}
        assert codes == {(1, 0, 0, 1), (0, 1, 1, 0)}


class TestAssignmentOracle:
    def test_one_by_one(self):
        sol = brute_force_assignment(np.array([[3.5]]))
        assert sol.objective == 3.5
        assert sol.x.tolist() == [1.0]

    def test_two_by_two_diagonal(self):
        sol = brute_force_assignment(np.array([[2.0, 1.0], [1.0, 2.0]]))
        assert sol.objective == 4.0
        assert sol.x.tolist() == [1.0, 0.0, 0.0, 1.0]

    def test_ties_keep_first_permutation(self):
        sol = brute_force_assignment(np.ones((3, 3)))
        assert sol.x.tolist() == np.eye(3).reshape(-1).tolist()

    def test_exhaustive_over_every_permutation(self):
        cost = np.random.default_rng(3).uniform(size=(5, 5))
        best = brute_force_assignment(cost).objective
        for perm in itertools.permutations(range(5)):
            assert best >= sum(cost[i, perm[i]] for i in range(5)) - 1e-12

    def test_refuses_large_instances(self):
        with pytest.raises(PreconditionError):
            brute_force_assignment(np.zeros((9, 9)))

    def test_margin(self):
        assert assignment_margin(np.array([[2.0, 1.0], [1.0, 2.0]])) == pytest.approx(2.0)
        assert assignment_margin(np.ones((3, 3))) == 0.0


class TestShortestPath:
    def test_two_node_graph(self):
        graph = nx.DiGraph()
        graph.add_edge("s", "t", cost=5.0)
        lp, table = build_shortest_path_lp(graph, "s", "t")
        sol = solve(lp)
        np.testing.assert_allclose(sol.x, [1.0], atol=1e-9)
        assert sol.objective == pytest.approx(5.0)
        assert table == {("s", "t"): 0}
        assert brute_force_paths(graph, "s", "t").objective == 5.0

    def test_diamond_prefers_strictly_cheaper_path(self):
        graph = graph_from_edges([
            ("s", "a", {"cost": 1.0}),
            ("a", "t", {"cost": 1.0}),
            ("s", "b", {"cost": 1.0}),
            ("b", "t", {"cost": 2.0}),
        ])
        lp, _ = build_shortest_path_lp(graph, "s", "t")
        sol = solve(lp)
        assert sol.objective == pytest.approx(2.0)
        assert path_edges(graph, sol.x) == [("s", "a"), ("a", "t")]
        oracle = brute_force_paths(graph, "s", "t")
        assert oracle.objective == 2.0
        assert oracle.x.tolist() == [1.0, 1.0, 0.0, 0.0]

    def test_columns_follow_the_given_edge_order(self, diamond):
        # networkx itself would list s->a, s->b, a->t, b->t
        assert list(diamond.edges) != ordered_edges(diamond)
        lp, table = build_shortest_path_lp(diamond, "s", "t")
        assert lp.labels == ("x[edge=(s,a)]", "x[edge=(a,t)]", "x[edge=(s,b)]", "x[edge=(b,t)]")
        assert table == {("s", "a"): 0, ("a", "t"): 1, ("s", "b"): 2, ("b", "t"): 3}
        assert lp.w.tolist() == [1.0, 1.0, 1.0, 1.005]
        assert path_edges(diamond, np.array([0.0, 0.0, 1.0, 1.0])) == [("s", "b"), ("b", "t")]

    def test_edges_without_a_position_come_last(self, diamond):
        diamond.add_edge("a", "b", cost=0.5)
        assert ordered_edges(diamond)[-1] == ("a", "b")
        assert ordered_edges(diamond)[:2] == [("s", "a"), ("a", "t")]

    def test_repeated_edge_is_rejected(self):
        with pytest.raises(ConfigurationError, match="twice"):
            graph_from_edges([("s", "t", {"cost": 1.0}), ("s", "t", {"cost": 2.0})])

    def test_flow_rows(self, diamond):
        lp, _ = build_shortest_path_lp(diamond, "s", "t")
        assert lp.sense is Sense.MINIMIZE
        # nodes in insertion order s, a, t, b
        assert lp.b_eq.tolist() == [1.0, 0.0, -1.0, 0.0]
        assert lp.A_eq[0].tolist() == [1.0, 0.0, 1.0, 0.0]

    def test_equal_paths_have_two_optima(self):
        graph = nx.DiGraph()
        for u, v in (("s", "a"), ("a", "t"), ("s", "b"), ("b", "t")):
            graph.add_edge(u, v, cost=1.0)
        lp, _ = build_shortest_path_lp(graph, "s", "t")
        optima = enumerate_alternate_optima(lp, solve(lp))
        assert len(optima) == 2

    def test_missing_node_is_a_configuration_error(self, diamond):
        with pytest.raises(ConfigurationError):
            build_shortest_path_lp(diamond, "s", "z")
        with pytest.raises(ConfigurationError):
            build_shortest_path_lp(diamond, "s", "s")

    def test_no_path_is_infeasible(self):
        graph = nx.DiGraph()
        graph.add_edge("s", "a", cost=1.0)
        graph.add_node("t")
        assert brute_force_paths(graph, "s", "t").status is SolveStatus.INFEASIBLE
        lp, _ = build_shortest_path_lp(graph, "s", "t")
        assert solve(lp).status is SolveStatus.INFEASIBLE

    def test_random_dags_match_path_oracle(self):
        rng = np.random.default_rng(99)
        for _ in range(50):
            n = int(rng.integers(3, 13))
            graph = nx.DiGraph()
            graph.add_nodes_from(range(n))
            for i in range(n):
                for j in range(i + 1, n):
                    if j == i + 1 or rng.random() < 0.3:
                        graph.add_edge(i, j, cost=float(rng.uniform(1.0, 10.0)))
            lp, _ = build_shortest_path_lp(graph, 0, n - 1)
            sol = solve(lp)
            oracle = brute_force_paths(graph, 0, n - 1)
            assert sol.is_optimal
            assert abs(sol.objective - oracle.objective) <= 1e-9
            assert np.max(np.abs(sol.x - np.rint(sol.x))) <= 1e-7
            assert lp.residuals(sol.x)["eq"] <= TAU_FEAS


class TestEnergy:
    def test_single_hour_without_sun_buys_from_grid(self):
        params = EnergyParams(annual_demand=1.0)
        profiles = EnergyProfiles(demand=[1.0], avail_pv=[0.0])
        lp = build_energy_lp(params, profiles)
        sol = solve(lp)
        idx = energy_index(1)
        assert sol.is_optimal
        assert sol.x[idx["p_Ele"][0]] == pytest.approx(1.0)
        assert sol.objective == pytest.approx(params.c_ele)

    def test_reference_parameters_build(self):
        params = EnergyParams(c_pv=0.005, c_bat=300.0, c_ele=0.25, c_gas=0.25, annual_demand=3000.0)
        lp = build_energy_lp(params, synthesize_profiles(24, 3000.0))
        assert lp.k == 2 + 6 * 24
        assert lp.labels[:3] == ("Cap_PV", "Cap_Bat", "p_Ele[t=1]")
        assert lp.A_eq.shape == (48, lp.k)

    def test_negative_price_is_rejected(self):
        with pytest.raises(ConfigurationError):
            EnergyParams(c_pv=-0.1)

    def test_demand_must_match_annual_total(self):
        with pytest.raises(ConfigurationError):
            build_energy_lp(EnergyParams(), synthesize_profiles(24, 2000.0))

    def test_cheaper_pv_shifts_the_plan(self):
        profiles = synthesize_profiles(24, 3000.0)
        rows = []
        for price in (0.005, 0.001):
            params = EnergyParams(c_pv=price)
            lp = build_energy_lp(params, profiles)
            sol = solve(lp)
            assert sol.is_optimal
            assert np.max(np.abs(balance_residuals(sol.x, profiles))) <= 1e-8
            assert np.max(np.abs(storage_residuals(sol.x, 24))) <= 1e-8
            rows.append(energy_summary(lp, sol.x, params, profiles))
        assert rows[1]["Cap_PV"] >= rows[0]["Cap_PV"] - 1e-9
        assert rows[1]["Con_Ele"] <= rows[0]["Con_Ele"] + 1e-9
        assert 0.0 < rows[0]["Self-Gen"] < 1.0

    def test_synthetic_profiles(self):
        profiles = synthesize_profiles(48, 3000.0)
        assert profiles.hours == 48
        assert profiles.demand.sum() == pytest.approx(3000.0)
        assert profiles.avail_pv[0] == 0.0
        assert profiles.avail_pv[12] == pytest.approx(1.0)
