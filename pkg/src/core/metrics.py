"""
Distances and similarity measures between solutions and gradients.
"""

from typing import Sequence

import numpy as np

from ..config import TAU_OPT
from .errors import ConfigurationError
from .validation import as_binary_code

__all__ = ["as_binary_code", "shd", "rel_cost_gap", "cosine_similarity"]


def shd(x1: Sequence[float], x2: Sequence[float]) -> int:
    """Structural Hamming distance: positions where the rounded 0/1 codes differ."""
    a = as_binary_code(x1)
    b = as_binary_code(x2)
    if a.shape != b.shape:
        raise ConfigurationError(f"Codes have different lengths {a.shape[0]} and {b.shape[0]}")
    return int(np.count_nonzero(a != b))


def rel_cost_gap(cost_adv: float, cost_base: float, tau: float = TAU_OPT) -> float:
    """|cost_adv - cost_base| / max(|cost_base|, tau)."""
    return abs(cost_adv - cost_base) / max(abs(cost_base), tau)


def cosine_similarity(a: Sequence[float], b: Sequence[float]) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    denom = np.linalg.norm(a) * np.linalg.norm(b)
    if denom == 0:
        return 0.0
    return float(np.dot(a, b) / denom)
