"""
Shared fixtures for the test suite.
"""

import sys
from pathlib import Path

import networkx as nx
import numpy as np
import pytest

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT))

from src.core.problems import graph_from_edges  # noqa: E402
from src.core.simplex import SimplexSolver  # noqa: E402
from src.data.models import (  # noqa: E402
    AttackConfig,
    Direction,
    Distribution,
    NoiseSpec,
    NoiseVariable,
    Scm,
    StructuralEquation,
    Term,
)

DATA_DIR = ROOT / "data"


@pytest.fixture
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture
def solver() -> SimplexSolver:
    return SimplexSolver()


@pytest.fixture
def diamond() -> nx.DiGraph:
    """s->a->t costs 2.000 (CO2 2), s->b->t costs 2.005 (CO2 7)."""
    return graph_from_edges([
        ("s", "a", {"cost": 1.0, "confounder_value": 1.0}),
        ("a", "t", {"cost": 1.0, "confounder_value": 1.0}),
        ("s", "b", {"cost": 1.0, "confounder_value": 3.0}),
        ("b", "t", {"cost": 1.005, "confounder_value": 4.0}),
    ])


@pytest.fixture
def confounded_scm() -> Scm:
    """X and Y share the hidden confounder U_C."""
    return Scm(
        name="xy",
        exogenous=(
            NoiseVariable("U_C", Distribution("normal", {"mean": 0.0, "std": 1.0})),
            NoiseVariable("U_X", Distribution("normal", {"mean": 0.0, "std": 0.1})),
            NoiseVariable("U_Y", Distribution("uniform", {"low": -1.0, "high": 1.0})),
        ),
        equations=(
            StructuralEquation("X", 1.0, (Term("U_C", 2.0), Term("U_X", 1.0))),
            StructuralEquation("Y", 0.0, (Term("X", 0.5), Term("U_C", 1.0), Term("U_Y", 1.0))),
        ),
    )


def make_attack_config(epsilon=0.01, steps=50, sigma=0.5, n_samples=15, seed=0,
                       direction=Direction.MAXIMIZE_H, **kwargs) -> AttackConfig:
    return AttackConfig(
        epsilon=epsilon, steps=steps,
        noise=NoiseSpec(sigma=sigma, n_samples=n_samples, seed=seed),
        direction=direction, **kwargs,
    )


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)
