"""
Tests for JSON/CSV writers, the DOT export and sweep summaries.
"""

import json

import numpy as np
import pandas as pd
import pytest

from src.core.errors import ConfigurationError
from src.data.models import RunManifest
from src.services.reports import (
    atomic_write_text,
    dumps,
    graph_to_dot,
    report_to_dict,
    sweep_summary,
    write_csv,
    write_manifest,
    write_scenario_result,
)
from src.services.scenarios import scenario_energy, scenario_shortest_path


class TestJson:
    def test_dumps_is_sorted_and_null_safe(self):
        text = dumps({"b": np.float64(np.nan), "a": np.int64(3), "c": np.array([1.0, np.inf])})
        assert text.index('"a"') < text.index('"b"')
        assert json.loads(text) == {"a": 3, "b": None, "c": [1.0, None]}
        assert text.endswith("\n")

    def test_report_is_json_ready(self, diamond):
        report = scenario_shortest_path(diamond, "s", "t", seed=0).report
        payload = report_to_dict(report)
        assert payload["config"]["noise"]["sigma"] == 0.25
        assert payload["status_adv"] == "optimal"
        assert len(payload["trace"]) == report.steps_taken
        assert set(payload["candidate_objectives"]) == {"shd", "rel_cost_gap"}
        json.dumps(payload, allow_nan=False)


class TestFiles:
    def test_atomic_write_leaves_only_the_target(self, tmp_path):
        atomic_write_text(tmp_path / "deep" / "note.txt", "hello\n")
        assert [p.name for p in (tmp_path / "deep").iterdir()] == ["note.txt"]
        assert (tmp_path / "deep" / "note.txt").read_text(encoding="utf-8") == "hello\n"

    def test_csv_uses_unix_newlines(self, tmp_path):
        path = write_csv(tmp_path / "t.csv", pd.DataFrame({"a": [1, 2]}))
        assert path.read_bytes() == b"a\n1\n2\n"

    def test_attack_scenario_files(self, tmp_path, diamond):
        result = scenario_shortest_path(diamond, "s", "t", seed=0)
        names = write_scenario_result(result, tmp_path)
        assert names == ["result.json", "skew.csv", "dataset.csv"]
        payload = json.loads((tmp_path / "result.json").read_text(encoding="utf-8"))
        assert payload["scenario"] == "shortest-path"
        assert payload["summary"]["route_base"] == ["s->a", "a->t"]
        skew = pd.read_csv(tmp_path / "skew.csv")
        assert skew["confounder_value"].tolist() == [1.0, 1.0, 3.0, 4.0]

    def test_energy_files(self, tmp_path):
        names = write_scenario_result(scenario_energy(hours=24), tmp_path)
        assert names == ["result.json", "comparison.csv"]

    def test_same_run_writes_identical_bytes(self, tmp_path, diamond):
        first, second = tmp_path / "one", tmp_path / "two"
        write_scenario_result(scenario_shortest_path(diamond, "s", "t", seed=2), first)
        write_scenario_result(scenario_shortest_path(diamond, "s", "t", seed=2), second)
        for name in ("result.json", "skew.csv", "dataset.csv"):
            assert (first / name).read_bytes() == (second / name).read_bytes()

    def test_manifest_lists_sorted_files(self, tmp_path):
        manifest = RunManifest(command="scenario", config_path=None, config={"seed": 0},
                               output_dir=str(tmp_path), versions={"hca": "1.0.0"},
                               wall_clock_seconds=0.5, files=["skew.csv", "manifest.json", "result.json"])
        payload = json.loads(write_manifest(manifest).read_text(encoding="utf-8"))
        assert payload["files"] == ["manifest.json", "result.json", "skew.csv"]
        assert payload["wall_clock_seconds"] == 0.5


class TestDot:
    def test_plain_graph(self, diamond):
        dot = graph_to_dot(diamond, name="diamond")
        assert dot.startswith('digraph "diamond" {')
        assert '"s" -> "a" [label="1"];' in dot
        assert "class=" not in dot

    def test_base_and_adversarial_routes(self, diamond):
        dot = graph_to_dot(diamond, [[1, 1, 0, 0], [0, 0, 1, 1]])
        assert '"s" -> "a" [label="1", class="base"' in dot
        assert '"b" -> "t" [label="1.005", class="adversarial"' in dot

    def test_shared_edges(self, diamond):
        dot = graph_to_dot(diamond, [[1, 1, 0, 0], [1, 1, 0, 0]])
        assert dot.count('class="both"') == 2

    def test_nodes_are_sorted(self, diamond):
        lines = graph_to_dot(diamond).splitlines()
        assert lines[2:6] == ['  "a";', '  "b";', '  "s";', '  "t";']

    def test_solution_length_mismatch(self, diamond):
        with pytest.raises(ConfigurationError):
            graph_to_dot(diamond, [[1, 0]])


class TestSweepSummary:
    def test_rate(self):
        frame = pd.DataFrame({"success": [True, False, True, True]})
        assert sweep_summary(frame) == {"runs": 4, "successes": 3, "success_rate": 0.75}

    def test_empty(self):
        assert sweep_summary(pd.DataFrame({"success": []}))["success_rate"] == 0.0
