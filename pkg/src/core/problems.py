"""
LP builders for linear assignment and shortest path, plus exhaustive oracles.

The oracles enumerate permutations or simple paths and are only meant for
small instances; both refuse inputs beyond their guards.
"""

import itertools
import logging
import math
from typing import Any, Dict, Hashable, Iterable, List, Optional, Tuple

import networkx as nx
import numpy as np

from ..config import MAX_BRUTE_FORCE_N, MAX_SIMPLE_PATHS
from ..data.models import LinearProgram, Sense, Solution, SolveStatus
from .errors import ConfigurationError, PreconditionError

logger = logging.getLogger(__name__)

Edge = Tuple[Hashable, Hashable]

EDGE_ORDER = "order"


def graph_from_edges(rows: Iterable[Tuple[Hashable, Hashable, Dict[str, Any]]]) -> nx.DiGraph:
    """
    Directed graph whose edge order is the order of `rows`.

    Each row is (u, v, attributes); the position is stored on the edge under
    EDGE_ORDER so ordered_edges can recover it.
    """
    graph = nx.DiGraph()
    for position, (u, v, data) in enumerate(rows):
        if graph.has_edge(u, v):
            raise ConfigurationError(f"Edge ({u}, {v}) appears twice")
        graph.add_edge(u, v, **data)
        graph.edges[u, v][EDGE_ORDER] = position
    return graph


def ordered_edges(graph: nx.DiGraph) -> List[Edge]:
    """
    Edges in the order they were given.

    networkx lists a DiGraph's edges grouped by source node, so the stored
    position wins; edges without one follow in networkx order.
    """
    edges = list(graph.edges)
    return sorted(edges, key=lambda e: graph.edges[e].get(EDGE_ORDER, math.inf))


def build_assignment_lp(cost, sense: Sense = Sense.MAXIMIZE,
                        doubly_stochastic: bool = True) -> Tuple[LinearProgram, Dict[int, np.ndarray]]:
    """
    Assignment LP over a |A| x |B| suitability matrix, variables in row-major order.

    With doubly_stochastic every worker and every job is matched exactly once,
    which needs a square matrix. Otherwise the smaller side is matched exactly
    once and the larger side at most once.

    Returns:
        The LP and a table mapping worker i to its row of cost indices.
    """
    cost = np.asarray(cost, dtype=float)
    if cost.ndim != 2 or cost.size == 0:
        raise ConfigurationError(f"Cost matrix must be a non-empty 2-D array, got shape {cost.shape}")
    n_a, n_b = cost.shape
    if doubly_stochastic and n_a != n_b:
        raise ConfigurationError(
            f"Doubly-stochastic assignment needs a square matrix, got {n_a}x{n_b}"
        )

    k = n_a * n_b
    rows = np.zeros((n_a, k))
    cols = np.zeros((n_b, k))
    for i in range(n_a):
        rows[i, i * n_b:(i + 1) * n_b] = 1.0
    for j in range(n_b):
        cols[j, j::n_b] = 1.0

    if doubly_stochastic or n_a == n_b:
        A_eq, b_eq = np.vstack([rows, cols]), np.ones(n_a + n_b)
        A_ub, b_ub = None, None
    elif n_a < n_b:
        A_eq, b_eq, A_ub, b_ub = rows, np.ones(n_a), cols, np.ones(n_b)
    else:
        A_eq, b_eq, A_ub, b_ub = cols, np.ones(n_b), rows, np.ones(n_a)

    labels = tuple(f"x[worker={i},job={j}]" for i in range(n_a) for j in range(n_b))
    lp = LinearProgram(
        sense=sense, w=cost.reshape(-1), A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
        bounds=np.column_stack([np.zeros(k), np.ones(k)]), labels=labels,
    )
    table = {i: np.arange(i * n_b, (i + 1) * n_b) for i in range(n_a)}
    return lp, table


def build_shortest_path_lp(graph: nx.DiGraph, s: Hashable, t: Hashable,
                           weight: str = "cost") -> Tuple[LinearProgram, Dict[Edge, int]]:
    """
    Flow formulation of the s-t shortest path: outflow minus inflow is +1 at s,
    -1 at t and 0 elsewhere, one variable per edge in ordered_edges order.
    """
    _check_endpoints(graph, s, t)
    nodes = list(graph.nodes)
    position = {v: i for i, v in enumerate(nodes)}
    edges = ordered_edges(graph)
    w = np.array([_edge_cost(graph, u, v, weight) for u, v in edges], dtype=float)

    A_eq = np.zeros((len(nodes), len(edges)))
    for e, (u, v) in enumerate(edges):
        A_eq[position[u], e] += 1.0
        A_eq[position[v], e] -= 1.0
    b_eq = np.zeros(len(nodes))
    b_eq[position[s]] = 1.0
    b_eq[position[t]] = -1.0

    k = len(edges)
    lp = LinearProgram(
        sense=Sense.MINIMIZE, w=w, A_eq=A_eq, b_eq=b_eq,
        bounds=np.column_stack([np.zeros(k), np.ones(k)]),
        labels=tuple(f"x[edge=({u},{v})]" for u, v in edges),
    )
    return lp, {edge: e for e, edge in enumerate(edges)}


def brute_force_assignment(cost, sense: Sense = Sense.MAXIMIZE) -> Solution:
    """Best permutation by exhaustive enumeration, ties kept in lexicographic order."""
    cost = np.asarray(cost, dtype=float)
    n = _square_size(cost)
    best_perm, best_value = None, None
    for perm, value in _permutation_values(cost):
        if best_value is None or _better(value, best_value, sense):
            best_perm, best_value = perm, value
    x = np.zeros((n, n))
    x[np.arange(n), best_perm] = 1.0
    return Solution(SolveStatus.OPTIMAL, x.reshape(-1), best_value, np.zeros(n * n))


def assignment_margin(cost, sense: Sense = Sense.MAXIMIZE) -> float:
    """Objective gap between the best and second-best permutation (0 when tied)."""
    cost = np.asarray(cost, dtype=float)
    n = _square_size(cost)
    if n == 1:
        return math.inf
    values = sorted((v for _, v in _permutation_values(cost)), reverse=sense is Sense.MAXIMIZE)
    return abs(values[0] - values[1])


def brute_force_paths(graph: nx.DiGraph, s: Hashable, t: Hashable,
                      weight: str = "cost") -> Solution:
    """Cheapest simple s-t path by enumeration, ties broken on the node sequence."""
    _check_endpoints(graph, s, t)
    edges = ordered_edges(graph)
    index = {edge: e for e, edge in enumerate(edges)}
    best_path: Optional[List[Hashable]] = None
    best_value = None
    for count, path in enumerate(nx.all_simple_paths(graph, s, t), start=1):
        if count > MAX_SIMPLE_PATHS:
            raise PreconditionError(
                f"More than {MAX_SIMPLE_PATHS} simple paths from {s} to {t}; refusing to enumerate"
            )
        value = math.fsum(_edge_cost(graph, u, v, weight) for u, v in zip(path, path[1:]))
        if (best_value is None or value < best_value
                or (value == best_value and tuple(path) < tuple(best_path))):
            best_path, best_value = path, value

    k = len(edges)
    if best_path is None:
        return Solution(SolveStatus.INFEASIBLE, np.zeros(k), float("nan"), np.zeros(k))
    x = np.zeros(k)
    for u, v in zip(best_path, best_path[1:]):
        x[index[(u, v)]] = 1.0
    return Solution(SolveStatus.OPTIMAL, x, best_value, np.zeros(k))


def path_edges(graph: nx.DiGraph, x: np.ndarray) -> List[Edge]:
    """Edges whose flow variable is (rounded) one, in edge order."""
    return [edge for edge, value in zip(ordered_edges(graph), np.asarray(x)) if round(float(value)) == 1]


def _permutation_values(cost: np.ndarray):
    n = cost.shape[0]
    rows = range(n)
    for perm in itertools.permutations(range(n)):
        yield perm, math.fsum(cost[i, perm[i]] for i in rows)


def _better(value: float, incumbent: float, sense: Sense) -> bool:
    return value > incumbent if sense is Sense.MAXIMIZE else value < incumbent


def _square_size(cost: np.ndarray) -> int:
    if cost.ndim != 2 or cost.shape[0] != cost.shape[1] or cost.size == 0:
        raise ConfigurationError(f"Permutation oracle needs a square matrix, got shape {cost.shape}")
    n = cost.shape[0]
    if n > MAX_BRUTE_FORCE_N:
        raise PreconditionError(
            f"Permutation oracle limited to n <= {MAX_BRUTE_FORCE_N}, got n={n}"
        )
    return n


def _check_endpoints(graph: nx.DiGraph, s: Hashable, t: Hashable) -> None:
    if s == t:
        raise ConfigurationError("Source and target must differ")
    for name, node in (("source", s), ("target", t)):
        if node not in graph:
            raise ConfigurationError(f"{name.capitalize()} node {node!r} is not in the graph")


def _edge_cost(graph: nx.DiGraph, u: Hashable, v: Hashable, weight: str) -> float:
    data = graph.edges[u, v]
    if weight not in data:
        raise ConfigurationError(f"Edge ({u}, {v}) has no '{weight}' attribute")
    value = float(data[weight])
    if not math.isfinite(value):
        raise ConfigurationError(f"Edge ({u}, {v}) has non-finite {weight} {value}")
    return value
