"""
Tests for the bundled scenarios and seed sweeps.
"""

import pandas as pd
import pytest

from src.core.problems import ordered_edges
from src.core.scm import is_causally_sufficient
from src.data.models import EnergyParams
from src.services.scenarios import (
    COMPARISON_COLUMNS,
    NA_ROAD_EDGES,
    SKEW_COLUMNS,
    SWEEP_COLUMNS,
    VaccinationBundle,
    default_attack_config,
    graph_dataset,
    na_road_graph,
    price_monotonicity,
    scenario_energy,
    scenario_shortest_path,
    scenario_vaccination,
    sweep,
)
from src.services.scm_library import vaccination_scm, vaccination_true_scm
from tests.conftest import make_attack_config


class TestDefaults:
    def test_road_hyperparameters(self):
        cfg = default_attack_config("shortest-path", seed=3)
        assert (cfg.noise.sigma, cfg.noise.n_samples, cfg.noise.seed) == (0.25, 20, 3)
        assert (cfg.epsilon, cfg.steps) == (0.01, 50)

    def test_vaccination_hyperparameters(self):
        cfg = default_attack_config("vaccination")
        assert (cfg.noise.sigma, cfg.noise.n_samples) == (0.5, 15)

    def test_road_graph(self):
        graph = na_road_graph()
        assert graph.number_of_nodes() == 12
        assert graph.number_of_edges() == 20
        assert ordered_edges(graph) == [(u, v) for u, v, _, _ in NA_ROAD_EDGES]

    def test_road_dataset_follows_edge_order(self):
        dataset, view = graph_dataset(na_road_graph())
        assert [unit["toll"] for unit in dataset.units] == [toll for _, _, toll, _ in NA_ROAD_EDGES]
        assert view.values.tolist() == [co2 for _, _, _, co2 in NA_ROAD_EDGES]


class TestVaccination:
    def test_small_instance(self):
        result = scenario_vaccination(n_people=8, n_spots=3, seed=1,
                                      cfg=make_attack_config(steps=10))
        assert result.name == "vaccination"
        assert result.config["attack"]["noise"]["seed"] == 1
        assert result.dataset.n == 8
        skew = result.skew
        assert list(skew.columns) == SKEW_COLUMNS
        assert int(skew["matched_base"].sum()) == 3
        wealth = skew["confounder_value"].to_numpy()
        base = skew["matched_base"].to_numpy() == 1
        assert result.summary["mean_wealth_base"] == pytest.approx(wealth[base].mean())
        assert result.summary["h_base"] == pytest.approx(wealth[base].sum())
        if result.summary["success"]:
            assert result.summary["delta_h"] > 0
            assert int(skew["matched_adv"].sum()) == 3

    def test_same_seed_same_result(self):
        cfg = make_attack_config(steps=5)
        first = scenario_vaccination(n_people=6, n_spots=2, seed=4, cfg=cfg)
        second = scenario_vaccination(n_people=6, n_spots=2, seed=4, cfg=cfg)
        assert first.summary == second.summary
        assert first.report.w_hat.tolist() == second.report.w_hat.tolist()

    def test_bundle_realizes_an_integral_instance(self):
        bundle = VaccinationBundle(6, 2, make_attack_config())
        instance = bundle.realize(vaccination_true_scm(), vaccination_scm(), seed=0)
        assert instance.lp.k == 36
        assert instance.lift.c.reshape(6, 6)[:, 2:].sum() == 0.0
        assert not is_causally_sufficient(vaccination_scm())

    def test_everyone_vaccinated_leaves_nothing_to_attack(self):
        result = scenario_vaccination(n_people=5, n_spots=5, seed=2, cfg=make_attack_config(steps=5))
        assert not result.summary["success"]
        assert result.report.h_adv == result.report.h_base
        assert int(result.skew["matched_base"].sum()) == 5

    @pytest.mark.slow
    def test_most_seeds_succeed(self):
        frame = sweep(scenario_vaccination, range(50))
        assert frame["success"].mean() >= 0.8
        assert (frame.loc[frame["success"], "delta_h"] > 0).all()
        successes = frame.loc[frame["success"]]
        assert (successes["mean_wealth_adv"] > successes["mean_wealth_base"]).all()
        assert (successes["rel_cost_gap"] <= 0.05).all()


class TestShortestPath:
    def test_north_american_roads(self):
        result = scenario_shortest_path(seed=0)
        summary = result.summary
        assert summary["success"]
        assert summary["toll_base"] == pytest.approx(100.0)
        assert summary["co2_base"] == pytest.approx(450.0)
        assert summary["co2_adv"] == pytest.approx(700.0)
        assert summary["shd"] == 12
        assert summary["route_base"][0] == "NY->PIT"
        assert summary["route_adv"][0] == "NY->TOR"
        assert summary["rel_cost_gap"] <= 0.05

    def test_diamond(self, diamond):
        result = scenario_shortest_path(diamond, "s", "t", seed=0)
        assert result.summary["co2_base"] == pytest.approx(2.0)
        assert result.summary["route_base"] == ["s->a", "a->t"]
        assert result.config["n_edges"] == 4

    def test_sweep_columns(self, diamond):
        frame = sweep(scenario_shortest_path, range(2), graph=diamond, s="s", t="t")
        assert list(frame.columns[:len(SWEEP_COLUMNS)]) == SWEEP_COLUMNS
        assert "co2_base" in frame.columns
        assert frame["seed"].tolist() == [0, 1]

    def test_empty_sweep(self):
        frame = sweep(scenario_shortest_path, [])
        assert list(frame.columns) == SWEEP_COLUMNS
        assert frame.empty


class TestEnergy:
    def test_one_day_comparison(self):
        result = scenario_energy(hours=24)
        comparison = result.comparison
        assert list(comparison.columns) == list(COMPARISON_COLUMNS)
        assert comparison["w_PV"].tolist() == [0.005, 0.001]
        assert result.summary["max_balance_residual"] <= 1e-8
        assert result.summary["max_storage_residual"] <= 1e-8
        assert result.summary["cap_pv_non_decreasing"]
        assert result.summary["con_ele_non_increasing"]
        assert result.config["profiles"] == "synthetic"
        assert len(result.summary["reference_rows"]) == 2

    def test_single_variant(self):
        result = scenario_energy(EnergyParams(c_bat=1000.0), hours=24, price_variants=(0.002,))
        assert len(result.comparison) == 1
        assert result.comparison["Cap_Bat"].iloc[0] >= 0.0


class TestPriceMonotonicity:
    def test_flags(self):
        frame = pd.DataFrame({"w_PV": [0.001, 0.005], "Cap_PV": [5.0, 2.0], "Con_Ele": [900.0, 1500.0]})
        assert price_monotonicity(frame) == {"cap_pv_non_decreasing": True,
                                             "con_ele_non_increasing": True}

    def test_violation(self):
        frame = pd.DataFrame({"w_PV": [0.005, 0.001], "Cap_PV": [5.0, 2.0], "Con_Ele": [900.0, 900.0]})
        flags = price_monotonicity(frame)
        assert not flags["cap_pv_non_decreasing"]
        assert flags["con_ele_non_increasing"]
