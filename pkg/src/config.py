"""
Runtime configuration for the hidden-confounder-attack toolkit.

Numerical tolerances, brute-force guards and the default attack
hyperparameters live here so every module reads the same values.
"""

import os
from pathlib import Path

from dotenv import load_dotenv

load_dotenv()

# Solver tolerances
TAU_FEAS = 1e-8
TAU_OPT = 1e-8
INTEGRALITY_TOL = 1e-7
PIVOT_TOL = 1e-9
MAX_SIMPLEX_ITERATIONS = 200_000
MAX_TABLEAU_CELLS = 150_000_000

# Oracle guards
MAX_BRUTE_FORCE_N = 8
MAX_SIMPLE_PATHS = 1_000_000

# Perturbed optimizer defaults (vaccination example)
DEFAULT_SIGMA = 0.5
DEFAULT_N_SAMPLES = 15
DEFAULT_EPSILON = 0.01
DEFAULT_ATTACK_STEPS = 50
DEFAULT_COST_GAP_BUDGET = 0.05

# Shortest-path example overrides
SP_SIGMA = 0.25
SP_N_SAMPLES = 20

# Energy horizon: a full year is buildable, the dense solver is sized for weeks
ENERGY_FULL_YEAR_HOURS = 8760
ENERGY_DEFAULT_HOURS = 168

OUTPUT_ROOT_ENV = "HCA_OUTPUT_ROOT"


def get_output_root() -> Path:
    """Default directory for run outputs (``HCA_OUTPUT_ROOT`` or ``./runs``)."""
    return Path(os.getenv(OUTPUT_ROOT_ENV, "./runs"))
