"""
Validation functions for model parameters and numeric inputs.

These checks run when domain objects are constructed so that invalid
configurations fail early with a ConfigurationError that names the field.
"""

from typing import Dict, Optional, Sequence

import numpy as np

from ..config import INTEGRALITY_TOL
from .errors import ConfigurationError, DegenerateSolutionError

DISTRIBUTION_PARAMS = {
    "uniform": ("low", "high"),
    "normal": ("mean", "std"),
    "lognormal": ("mean", "sigma"),
    "constant": ("value",),
}

TRANSFORMS = ("identity", "log", "exp")


def validate_distribution(kind: str, params: Dict[str, float]) -> None:
    """Validate a noise distribution name and its parameters."""
    if kind not in DISTRIBUTION_PARAMS:
        raise ConfigurationError(
            f"Unknown distribution '{kind}'. Expected one of {sorted(DISTRIBUTION_PARAMS)}"
        )
    expected = DISTRIBUTION_PARAMS[kind]
    missing = [p for p in expected if p not in params]
    if missing:
        raise ConfigurationError(f"Distribution '{kind}' is missing parameters {missing}")
    extra = sorted(set(params) - set(expected))
    if extra:
        raise ConfigurationError(f"Distribution '{kind}' got unexpected parameters {extra}")
    for name in expected:
        if not np.isfinite(params[name]):
            raise ConfigurationError(f"Distribution '{kind}' parameter '{name}' must be finite")
    if kind == "uniform" and params["low"] > params["high"]:
        raise ConfigurationError(
            f"Uniform distribution needs low <= high, got low={params['low']} high={params['high']}"
        )
    if kind == "normal" and params["std"] < 0:
        raise ConfigurationError(f"Normal distribution scale must be >= 0, got std={params['std']}")
    if kind == "lognormal" and params["sigma"] < 0:
        raise ConfigurationError(
            f"Log-normal distribution scale must be >= 0, got sigma={params['sigma']}"
        )


def validate_transform(transform: str) -> None:
    """Validate a structural-equation input transform."""
    if transform not in TRANSFORMS:
        raise ConfigurationError(f"Unknown transform '{transform}'. Expected one of {TRANSFORMS}")


def validate_lp_shapes(k: int, A_ub: np.ndarray, b_ub: np.ndarray, A_eq: np.ndarray,
                       b_eq: np.ndarray, bounds: np.ndarray, labels: Sequence[str]) -> None:
    """Check that every LP array agrees with the number of variables k."""
    if k < 1:
        raise ConfigurationError("A linear program needs at least one variable")
    for name, A, b in (("A_ub", A_ub, b_ub), ("A_eq", A_eq, b_eq)):
        if A.ndim != 2 or A.shape[1] != k:
            raise ConfigurationError(f"{name} must have {k} columns, got shape {A.shape}")
        if b.shape != (A.shape[0],):
            raise ConfigurationError(
                f"{name} has {A.shape[0]} rows but its right-hand side has shape {b.shape}"
            )
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise ConfigurationError(f"{name} and its right-hand side must be finite")
    if bounds.shape != (k, 2):
        raise ConfigurationError(f"bounds must have shape ({k}, 2), got {bounds.shape}")
    if np.any(bounds[:, 0] > bounds[:, 1]):
        bad = int(np.flatnonzero(bounds[:, 0] > bounds[:, 1])[0])
        raise ConfigurationError(f"bounds[{bad}] has lower > upper")
    if np.any(~np.isfinite(bounds[:, 0])):
        raise ConfigurationError("Every variable needs a finite lower bound")
    if len(labels) != k:
        raise ConfigurationError(f"Expected {k} labels, got {len(labels)}")


def validate_positive(name: str, value: float, allow_zero: bool = False) -> None:
    """Raise if value is negative (or zero when allow_zero is False)."""
    if not np.isfinite(value) or value < 0 or (value == 0 and not allow_zero):
        bound = ">= 0" if allow_zero else "> 0"
        raise ConfigurationError(f"{name} must be {bound}, got {value}")


def as_binary_code(x: Sequence[float], tol: float = INTEGRALITY_TOL) -> np.ndarray:
    """Round a solution vector to a 0/1 code, refusing fractional entries."""
    arr = np.asarray(x, dtype=float)
    code = np.rint(arr)
    off = np.abs(arr - code)
    if np.any(off > tol) or np.any((code != 0) & (code != 1)):
        worst: Optional[int] = int(np.argmax(np.where((code == 0) | (code == 1), off, np.inf)))
        raise DegenerateSolutionError(
            f"Entry {worst} = {arr[worst]!r} is not within {tol} of 0 or 1"
        )
    return code.astype(np.int8)
