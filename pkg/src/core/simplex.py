"""
Dense two-phase primal simplex with Bland's anti-cycling rule.

Programs are brought into the internal form  min c'y  s.t.  S y = b, y >= 0
with y = x - lo. Fixed variables are substituted out, finite upper bounds
become slack rows unless an all-nonnegative row already implies them, and
rows with a negative right-hand side are negated. Phase one is cached per
constraint structure, so re-solving with new costs (the perturbed optimizer
does this thousands of times) starts directly from a feasible basis. A
caller holding an optimal solution of the same constraints can pass it as
the phase-two start instead.

Pivoting is fully deterministic: the entering column is the lowest index
with a negative reduced cost, the leaving row is the minimum ratio with ties
broken by the smallest basic column index.
"""

import logging
import threading
from collections import OrderedDict, deque
from dataclasses import dataclass
from typing import Deque, List, Optional, Set, Tuple

import numpy as np

from ..config import (
    MAX_SIMPLEX_ITERATIONS,
    MAX_TABLEAU_CELLS,
    PIVOT_TOL,
    TAU_FEAS,
    TAU_OPT,
)
from ..data.models import LinearProgram, Sense, Solution, SolveStatus
from .errors import PreconditionError, SolverError

logger = logging.getLogger(__name__)

RATIO_TIE_TOL = 1e-12
VERTEX_DECIMALS = 7


@dataclass
class _PhaseOne:
    """Feasible starting tableau for one constraint structure."""
    feasible: bool
    T: Optional[np.ndarray]  # m x (ncols + 1), last column is the rhs
    basis: Optional[np.ndarray]  # tableau column basic in each row
    cols: np.ndarray  # original indices of the non-fixed variables
    labels: np.ndarray  # tableau column -> basis label (var index, or k + slack index)
    lo: np.ndarray
    S: Optional[np.ndarray]  # kept rows of the standard matrix, tableau columns
    b: Optional[np.ndarray]
    S_orig: Optional[np.ndarray]  # kept rows over all k original variables
    iterations: int = 0

    @property
    def m(self) -> int:
        return 0 if self.T is None else self.T.shape[0]

    @property
    def ncols(self) -> int:
        return 0 if self.T is None else self.T.shape[1] - 1


class SimplexSolver:
    """
    Reentrant simplex solver with a small phase-one cache.

    Args:
        max_iterations: pivot limit per phase before a SolverError
        cache_size: number of constraint structures whose phase one is kept
    """

    def __init__(self, max_iterations: int = MAX_SIMPLEX_ITERATIONS, cache_size: int = 64):
        self.max_iterations = max_iterations
        self.cache_size = cache_size
        self._cache: "OrderedDict[int, _PhaseOne]" = OrderedDict()
        self._lock = threading.Lock()

    # ------------------------------------------------------------------
    # public API
    # ------------------------------------------------------------------

    def solve(self, lp: LinearProgram, start: Optional[Solution] = None) -> Solution:
        """
        Solve an LP.

        Args:
            lp: program to solve
            start: optimal solution of a program with the same constraints; phase
                two starts from its basis instead of the phase-one basis when that
                basis is still primal feasible
        """
        p1 = self._phase_one(lp)
        if not p1.feasible:
            return self._infeasible(lp, p1.iterations)
        T, basis, status, iterations = self._phase_two(lp, p1, start)
        return self._extract(lp, p1, T, basis, status, p1.iterations + iterations)

    def optimal_tableau(self, lp: LinearProgram) -> Tuple[_PhaseOne, np.ndarray, np.ndarray]:
        """Solve and return the final tableau, for callers that keep pivoting."""
        p1 = self._phase_one(lp)
        if not p1.feasible:
            raise PreconditionError("Linear program is infeasible")
        T, basis, status, _ = self._phase_two(lp, p1)
        if status is not SolveStatus.OPTIMAL:
            raise PreconditionError(f"Linear program is {status.value}")
        return p1, T, basis

    def solution_from_basis(self, lp: LinearProgram, p1: _PhaseOne, T: np.ndarray,
                            basis: np.ndarray) -> Solution:
        return self._extract(lp, p1, T, basis, SolveStatus.OPTIMAL, 0)

    # ------------------------------------------------------------------
    # phase one
    # ------------------------------------------------------------------

    def _phase_one(self, lp: LinearProgram) -> _PhaseOne:
        with self._lock:
            cached = self._cache.get(lp.structure_id)
            if cached is not None:
                self._cache.move_to_end(lp.structure_id)
                return cached
        p1 = self._build_phase_one(lp)
        with self._lock:
            self._cache[lp.structure_id] = p1
            while len(self._cache) > self.cache_size:
                self._cache.popitem(last=False)
        return p1

    def _build_phase_one(self, lp: LinearProgram) -> _PhaseOne:
        k = lp.k
        lo = lp.bounds[:, 0].copy()
        hi = lp.bounds[:, 1]
        fixed = hi <= lo
        cols = np.flatnonzero(~fixed)
        span = hi - lo

        b_ub = lp.b_ub - lp.A_ub @ lo
        b_eq = lp.b_eq - lp.A_eq @ lo
        cap = np.minimum(
            _implied_caps(lp.A_eq, b_eq, cols, k),
            _implied_caps(lp.A_ub, b_ub, cols, k),
        )
        bounded = np.flatnonzero(~fixed & np.isfinite(span) & (cap > span + TAU_FEAS))

        m_ub, m_bd, m_eq = lp.A_ub.shape[0], bounded.shape[0], lp.A_eq.shape[0]
        n_slack = m_ub + m_bd
        m = m_ub + m_bd + m_eq

        S_orig = np.zeros((m, k))
        S_orig[:m_ub] = lp.A_ub
        S_orig[m_ub + np.arange(m_bd), bounded] = 1.0
        S_orig[m_ub + m_bd:] = lp.A_eq
        slack = np.zeros((m, n_slack))
        slack[np.arange(n_slack), np.arange(n_slack)] = 1.0
        b = np.concatenate([b_ub, span[bounded], b_eq])

        flip = b < 0
        S_orig[flip] *= -1.0
        slack[flip] *= -1.0
        b[flip] *= -1.0

        S = np.hstack([S_orig[:, cols], slack])
        n1 = cols.shape[0]
        labels = np.concatenate([cols, k + np.arange(n_slack)])

        basis = np.full(m, -1, dtype=int)
        slack_rows = np.flatnonzero(~flip[:n_slack])
        basis[slack_rows] = n1 + slack_rows
        art_rows = np.flatnonzero(basis < 0)
        n_art = art_rows.shape[0]
        ncols = S.shape[1]

        cells = (m + 1) * (ncols + n_art + 1)
        if cells > MAX_TABLEAU_CELLS:
            raise SolverError(
                f"Tableau of {m} rows x {ncols + n_art} columns exceeds the dense solver limit "
                f"of {MAX_TABLEAU_CELLS} cells"
            )

        T = np.zeros((m + 1, ncols + n_art + 1))
        T[:m, :ncols] = S
        T[art_rows, ncols + np.arange(n_art)] = 1.0
        T[:m, -1] = b
        basis[art_rows] = ncols + np.arange(n_art)

        iterations = 0
        if n_art:
            # minimize the sum of artificials
            T[m, :] = -T[art_rows, :].sum(axis=0)
            T[m, ncols:ncols + n_art] = 0.0
            status, iterations = self._iterate(T, basis, m, ncols + n_art)
            infeasibility = -T[m, -1]
            if infeasibility > TAU_FEAS * max(1.0, float(np.max(np.abs(b), initial=0.0))):
                logger.debug("Phase one ended with infeasibility %.3e", infeasibility)
                return _PhaseOne(False, None, None, cols, labels, lo, None, None, None, iterations)

            keep = np.ones(m, dtype=bool)
            for r in np.flatnonzero(basis >= ncols):
                candidates = np.flatnonzero(np.abs(T[r, :ncols]) > PIVOT_TOL)
                if candidates.size:
                    _pivot(T, r, int(candidates[0]))
                    basis[r] = int(candidates[0])
                else:
                    keep[r] = False
            if not keep.all():
                logger.debug("Dropping %d redundant rows", int((~keep).sum()))
            T = np.vstack([T[:m][keep], T[m:]])
            basis = basis[keep]
            S, b, S_orig = S[keep], b[keep], S_orig[keep]
            m = int(keep.sum())
            T = np.hstack([T[:, :ncols], T[:, -1:]])
        else:
            T = np.hstack([T[:, :ncols], T[:, -1:]])

        tableau = T[:m].copy()
        tableau.setflags(write=False)
        return _PhaseOne(True, tableau, basis.copy(), cols, labels, lo, S, b, S_orig, iterations)

    # ------------------------------------------------------------------
    # phase two
    # ------------------------------------------------------------------

    def _phase_two(self, lp: LinearProgram, p1: _PhaseOne, start: Optional[Solution] = None):
        m, ncols = p1.m, p1.ncols
        rows, basis = p1.T, p1.basis
        if start is not None and start.is_optimal:
            warm = _basis_tableau(p1, start.basis)
            if warm is not None:
                rows, basis = warm
        c_int = _internal_costs(lp)
        c = np.concatenate([c_int[p1.cols], np.zeros(ncols - p1.cols.shape[0])])
        T = np.empty((m + 1, ncols + 1))
        T[:m] = rows
        basis = basis.copy()
        c_B = c[basis]
        T[m, :ncols] = c - c_B @ rows[:, :ncols]
        T[m, -1] = -c_B @ rows[:, -1]
        status, iterations = self._iterate(T, basis, m, ncols)
        return T, basis, status, iterations

    def _iterate(self, T: np.ndarray, basis: np.ndarray, m: int, ncols: int):
        for it in range(self.max_iterations):
            d = T[m, :ncols]
            negative = np.flatnonzero(d < -TAU_OPT)
            if negative.size == 0:
                return SolveStatus.OPTIMAL, it
            j = int(negative[0])
            r = _leaving_row(T, basis, m, j)
            if r is None:
                return SolveStatus.UNBOUNDED, it
            _pivot(T, r, j)
            basis[r] = j
        raise SolverError(f"Simplex did not terminate within {self.max_iterations} pivots")

    # ------------------------------------------------------------------
    # results
    # ------------------------------------------------------------------

    def _extract(self, lp: LinearProgram, p1: _PhaseOne, T: np.ndarray, basis: np.ndarray,
                 status: SolveStatus, iterations: int) -> Solution:
        k = lp.k
        if status is SolveStatus.UNBOUNDED:
            objective = np.inf if lp.sense is Sense.MAXIMIZE else -np.inf
            return Solution(status, np.zeros(k), objective, np.zeros(k),
                            tuple(sorted(int(p1.labels[j]) for j in basis)), iterations)

        m, ncols = p1.m, p1.ncols
        y = np.zeros(ncols)
        y[basis] = T[:m, -1]
        c_int = _internal_costs(lp)
        c = np.concatenate([c_int[p1.cols], np.zeros(ncols - p1.cols.shape[0])])
        reduced = np.zeros(k)
        if m:
            B = p1.S[:, basis]
            try:
                y[basis] = np.linalg.solve(B, p1.b)
                duals = np.linalg.solve(B.T, c[basis])
                reduced = c_int - p1.S_orig.T @ duals
            except np.linalg.LinAlgError:
                logger.warning("Basis matrix is singular; keeping tableau values")
                reduced = c_int.copy()
                reduced[p1.cols] = T[m, :p1.cols.shape[0]]
        else:
            reduced = c_int.copy()
        y[(y < 0) & (y > -TAU_FEAS)] = 0.0

        x = p1.lo.copy()
        x[p1.cols] += y[:p1.cols.shape[0]]
        if lp.sense is Sense.MAXIMIZE:
            reduced = -reduced
        return Solution(
            status=SolveStatus.OPTIMAL,
            x=x,
            objective=float(lp.w @ x),
            reduced_costs=reduced,
            basis=tuple(sorted(int(p1.labels[j]) for j in basis)),
            iterations=iterations,
        )

    @staticmethod
    def _infeasible(lp: LinearProgram, iterations: int) -> Solution:
        return Solution(SolveStatus.INFEASIBLE, np.zeros(lp.k), float("nan"),
                        np.zeros(lp.k), (), iterations)


def _internal_costs(lp: LinearProgram) -> np.ndarray:
    return lp.w.copy() if lp.sense is Sense.MINIMIZE else -lp.w


def _basis_tableau(p1: _PhaseOne, labels) -> Optional[Tuple[np.ndarray, np.ndarray]]:
    """Tableau rows B^-1 [S | b] of the basis given by labels, or None if it is not a feasible basis."""
    if p1.m == 0 or len(labels) != p1.m:
        return None
    column = {int(label): j for j, label in enumerate(p1.labels)}
    try:
        basis = np.array([column[int(label)] for label in labels], dtype=int)
    except KeyError:
        return None
    try:
        rows = np.linalg.solve(p1.S[:, basis], np.column_stack([p1.S, p1.b]))
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(rows)) or np.min(rows[:, -1]) < -TAU_FEAS:
        return None
    rows[:, -1] = np.maximum(rows[:, -1], 0.0)
    rows[:, basis] = 0.0
    rows[np.arange(p1.m), basis] = 1.0
    return rows, basis


def _implied_caps(A: np.ndarray, b: np.ndarray, cols: np.ndarray, k: int) -> np.ndarray:
    """Upper bounds on y implied by rows whose free-column coefficients are all >= 0."""
    caps = np.full(k, np.inf)
    if A.shape[0] == 0 or cols.size == 0:
        return caps
    sub = A[:, cols]
    rows = np.all(sub >= 0, axis=1)
    if not rows.any():
        return caps
    sub = sub[rows]
    rhs = b[rows]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(sub > 0, rhs[:, None] / np.where(sub > 0, sub, 1.0), np.inf)
    caps[cols] = ratios.min(axis=0)
    return caps


def _leaving_row(T: np.ndarray, basis: np.ndarray, m: int, j: int) -> Optional[int]:
    tied = _tied_rows(T, m, j)
    if tied.size == 0:
        return None
    return int(tied[np.argmin(basis[tied])])


def _tied_rows(T: np.ndarray, m: int, j: int) -> np.ndarray:
    """Rows attaining the minimum ratio for entering column j."""
    col = T[:m, j]
    positive = np.flatnonzero(col > PIVOT_TOL)
    if positive.size == 0:
        return positive
    ratios = np.maximum(T[positive, -1], 0.0) / col[positive]
    best = ratios.min()
    return positive[ratios <= best + RATIO_TIE_TOL * (1.0 + abs(best))]


def _pivot(T: np.ndarray, r: int, j: int) -> None:
    T[r] /= T[r, j]
    col = T[:, j].copy()
    col[r] = 0.0
    # rows with a zero multiplier are left bit-identical by the rank-one update
    T -= np.outer(col, T[r])
    T[:, j] = 0.0
    T[r, j] = 1.0


_DEFAULT_SOLVER = SimplexSolver()


def default_solver() -> SimplexSolver:
    return _DEFAULT_SOLVER


def solve(lp: LinearProgram) -> Solution:
    """Solve an LP with the shared default solver."""
    return _DEFAULT_SOLVER.solve(lp)


def vertex_key(x: np.ndarray) -> Tuple[float, ...]:
    return tuple(np.round(np.asarray(x, dtype=float), VERTEX_DECIMALS) + 0.0)


def enumerate_alternate_optima(lp: LinearProgram, sol: Solution, limit: int = 16,
                               solver: Optional[SimplexSolver] = None,
                               max_bases: Optional[int] = None) -> List[Solution]:
    """
    Distinct optimal vertices reachable by pivoting on zero-reduced-cost columns.

    The search is breadth first over bases, visiting every tied leaving row,
    and stops after `limit` vertices or `max_bases` visited bases. The given
    solution is always first in the returned list.
    """
    if not sol.is_optimal:
        raise PreconditionError("Alternate optima need an optimal solution")
    solver = solver or _DEFAULT_SOLVER
    max_bases = max_bases if max_bases is not None else 200 * max(limit, 1)

    found = [sol]
    seen_vertices: Set[Tuple[float, ...]] = {vertex_key(sol.x)}
    if limit <= 1:
        return found

    p1, T, basis = solver.optimal_tableau(lp)
    m, ncols = p1.m, p1.ncols
    start = solver.solution_from_basis(lp, p1, T, basis)
    if vertex_key(start.x) not in seen_vertices:
        seen_vertices.add(vertex_key(start.x))
        found.append(start)

    visited: Set[frozenset] = {frozenset(basis.tolist())}
    queue: Deque[Tuple[np.ndarray, np.ndarray]] = deque([(T, basis)])
    while queue and len(found) < limit and len(visited) < max_bases:
        T, basis = queue.popleft()
        d = T[m, :ncols]
        nonbasic = np.ones(ncols, dtype=bool)
        nonbasic[basis] = False
        for j in np.flatnonzero(nonbasic & (np.abs(d) <= TAU_OPT)):
            for r in _tied_rows(T, m, int(j)):
                next_basis = basis.copy()
                next_basis[r] = j
                key = frozenset(next_basis.tolist())
                if key in visited:
                    continue
                visited.add(key)
                next_T = T.copy()
                _pivot(next_T, int(r), int(j))
                queue.append((next_T, next_basis))
                candidate = solver.solution_from_basis(lp, p1, next_T, next_basis)
                vkey = vertex_key(candidate.x)
                if vkey not in seen_vertices:
                    seen_vertices.add(vkey)
                    found.append(candidate)
                    if len(found) >= limit:
                        return found
                if len(visited) >= max_bases:
                    logger.warning("Alternate optima search stopped after %d bases", max_bases)
                    return found
    return found
