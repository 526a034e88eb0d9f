"""Geometry of rate regions: halfspace systems, vertices, hull membership.

Every region handled here lives in the nonnegative orthant of R^4 and is an
intersection of halfspaces a . R <= b.  The dimension is tiny and the row
counts are bounded (at most ~14 rows in practice), so vertex enumeration is
done exhaustively over all 4-row subsets — no pivoting heuristics, fully
deterministic output.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from .model import (
    DEDUP_TOL,
    TIGHT_TOL,
    InternalConsistencyError,
    RateTuple,
    ValidationError,
)

Row = Tuple[Tuple[float, float, float, float], float]

# relative determinant cutoff below which a 4-row subset is treated as singular
_SINGULAR_REL_TOL = 1e-12
# reduced-cost / pivot threshold inside the simplex
_PIVOT_TOL = 1e-11
_MAX_SIMPLEX_ITERS = 10_000


@dataclass(frozen=True)
class HalfspaceSystem:
    """An intersection of halfspaces a . R <= b in R^4, R >= 0 implied.

    The four nonnegativity rows -R_i <= 0 are appended automatically and are
    part of the indexed row list (user rows first).  Construction validates
    that the system is bounded above in every coordinate: each R_i must
    appear with a positive coefficient in at least one all-nonnegative row,
    which together with R >= 0 certifies a finite upper bound.
    """

    rows: Tuple[Row, ...]
    n_user_rows: int

    def __init__(self, rows: Iterable[Sequence[float]]) -> None:
        user_rows: List[Row] = []
        for k, entry in enumerate(rows):
            try:
                a, b = entry
                a = tuple(float(v) for v in a)
                b = float(b)
            except (TypeError, ValueError) as exc:
                raise ValidationError(f"rows[{k}] must be ((a1,a2,a3,a4), b): {exc}") from exc
            if len(a) != 4:
                raise ValidationError(f"rows[{k}] coefficient vector must have 4 entries")
            if any(np.isnan(a)) or np.isnan(b) or any(np.isinf(a)) or np.isinf(b):
                raise ValidationError(f"rows[{k}] contains a non-finite value")
            user_rows.append((a, b))

        for i in range(4):
            bounded = any(
                a[i] > 0.0 and all(c >= 0.0 for c in a) for a, _ in user_rows
            )
            if not bounded:
                raise ValidationError(
                    f"system is unbounded in coordinate R{i + 1}: no all-nonnegative "
                    f"row has a positive coefficient there"
                )

        nonneg: List[Row] = []
        for i in range(4):
            a = [0.0, 0.0, 0.0, 0.0]
            a[i] = -1.0
            nonneg.append((tuple(a), 0.0))

        object.__setattr__(self, "rows", tuple(user_rows) + tuple(nonneg))
        object.__setattr__(self, "n_user_rows", len(user_rows))

    def arrays(self) -> Tuple[np.ndarray, np.ndarray]:
        A = np.array([a for a, _ in self.rows], dtype=float)
        b = np.array([b for _, b in self.rows], dtype=float)
        return A, b


@dataclass(frozen=True)
class VertexSet:
    """Vertices of a HalfspaceSystem plus their active-row index sets.

    Vertices are sorted lexicographically; ``tight_sets[k]`` lists the rows
    (indices into the system's full row list) satisfied with equality at
    vertex k.  Every vertex has at least 4 active rows.
    """

    vertices: Tuple[RateTuple, ...]
    tight_sets: Tuple[Tuple[int, ...], ...]

    def __len__(self) -> int:
        return len(self.vertices)


def enumerate_vertices(system: HalfspaceSystem) -> VertexSet:
    """Enumerate all vertices of the polytope by exhausting 4-row subsets.

    Each nonsingular 4x4 subsystem is solved; the solution is kept when it
    satisfies every row within TIGHT_TOL.  Duplicates (L-infinity distance
    <= DEDUP_TOL) collapse to their lexicographically smallest representative.
    """
    A, b = system.arrays()
    m = len(system.rows)

    combos = np.array(list(itertools.combinations(range(m), 4)), dtype=int)
    sub_A = A[combos]  # (K, 4, 4)
    sub_b = b[combos]  # (K, 4)

    dets = np.linalg.det(sub_A)
    row_scale = np.abs(sub_A).max(axis=2)  # (K, 4) per-row inf norms
    scale = np.maximum(np.prod(row_scale, axis=1), 1.0)
    nonsingular = np.abs(dets) > _SINGULAR_REL_TOL * scale
    if not nonsingular.any():
        raise InternalConsistencyError("no nonsingular 4-row subset found")

    sols = np.linalg.solve(sub_A[nonsingular], sub_b[nonsingular][..., None])[..., 0]  # (K', 4)
    feas = (A @ sols.T <= b[:, None] + TIGHT_TOL).all(axis=0)
    cands = sols[feas]
    if cands.size == 0:
        raise InternalConsistencyError("polytope has no vertices (empty system?)")

    order = np.lexsort((cands[:, 3], cands[:, 2], cands[:, 1], cands[:, 0]))
    cands = cands[order]

    kept: List[np.ndarray] = []
    for x in cands:
        if kept and np.max(np.abs(np.array(kept) - x), axis=1).min() <= DEDUP_TOL:
            continue
        kept.append(x)

    vertices: List[RateTuple] = []
    tight_sets: List[Tuple[int, ...]] = []
    for x in kept:
        resid = np.abs(A @ x - b)
        tight = tuple(int(i) for i in np.flatnonzero(resid <= TIGHT_TOL))
        if len(tight) < 4:
            raise InternalConsistencyError(
                f"vertex {tuple(x)} has only {len(tight)} active rows"
            )
        vertices.append(RateTuple(tuple(x)))
        tight_sets.append(tight)

    return VertexSet(vertices=tuple(vertices), tight_sets=tuple(tight_sets))


def maximal_vertices(vs: VertexSet) -> List[RateTuple]:
    """Filter a vertex set down to its componentwise-maximal elements.

    A vertex v is dropped when some other vertex w dominates it: w >= v in
    every coordinate (within TIGHT_TOL) and strictly exceeds it by more than
    TIGHT_TOL in at least one.
    """
    pts = np.array([list(v) for v in vs.vertices], dtype=float)
    keep: List[RateTuple] = []
    for k, v in enumerate(pts):
        others = np.delete(pts, k, axis=0)
        if others.size:
            dominates = ((others >= v - TIGHT_TOL).all(axis=1)
                         & ((others - v) > TIGHT_TOL).any(axis=1))
            if dominates.any():
                continue
        keep.append(vs.vertices[k])
    return keep


def contains(system: HalfspaceSystem, point: Sequence[float], tol: float = TIGHT_TOL) -> bool:
    """True when the point satisfies every row of the system within tol."""
    A, b = system.arrays()
    x = np.array([float(c) for c in point], dtype=float)
    if x.shape != (4,):
        raise ValidationError("point must have exactly 4 coordinates")
    return bool((A @ x <= b + tol).all())


# ---------------------------------------------------------------------------
# Downward-hull membership via a phase-1 simplex with Bland's rule.
#
# target is in the downward hull of {p_1..p_n} iff there is lambda >= 0 with
# sum lambda = 1 and sum lambda_j p_j >= target componentwise.  That is a pure
# feasibility question; we solve it as phase 1 of the simplex method with
# Bland's anti-cycling pivot rule so the run is deterministic and finite.
# ---------------------------------------------------------------------------


def in_downward_hull(
    points: Sequence[Sequence[float]],
    target: Sequence[float],
    tol: float = TIGHT_TOL,
) -> bool:
    """Decide whether target is dominated by a convex combination of points."""
    pts = np.array([[float(c) for c in p] for p in points], dtype=float)
    pts = pts.reshape(0, 4) if pts.size == 0 else pts
    if pts.ndim != 2 or pts.shape[1] != 4:
        raise ValidationError("points must be a sequence of 4-vectors")
    t = np.array([max(0.0, float(c)) for c in target], dtype=float)
    if t.shape != (4,):
        raise ValidationError("target must have exactly 4 coordinates")
    n = len(pts)
    if n == 0:
        return False

    # variables: lambda_1..lambda_n, surplus s_1..s_4  (all >= 0)
    #   sum_j lambda_j p_j[i] - s_i = t_i      (i = 1..4)
    #   sum_j lambda_j              = 1
    A = np.zeros((5, n + 4))
    A[:4, :n] = pts.T
    A[:4, n:] = -np.eye(4)
    A[4, :n] = 1.0
    rhs = np.append(t, 1.0)

    return _phase1_feasible(A, rhs, tol)


def _phase1_feasible(A: np.ndarray, b: np.ndarray, tol: float) -> bool:
    """Phase-1 simplex: is {x >= 0 : A x = b} nonempty?  b must be >= 0."""
    m, n = A.shape
    if (b < 0).any():
        raise InternalConsistencyError("phase-1 right-hand side must be nonnegative")

    # tableau over [original vars | artificials], artificial basis to start
    tab = np.hstack([A.copy(), np.eye(m)])
    rhs = b.astype(float).copy()
    basis = list(range(n, n + m))
    cost = np.concatenate([np.zeros(n), np.ones(m)])

    for _ in range(_MAX_SIMPLEX_ITERS):
        cb = cost[basis]
        reduced = cost - cb @ tab
        entering = -1
        for j in range(n + m):  # Bland: lowest index with negative reduced cost
            if reduced[j] < -_PIVOT_TOL:
                entering = j
                break
        if entering < 0:
            break

        ratios = np.full(m, np.inf)
        col = tab[:, entering]
        positive = col > _PIVOT_TOL
        ratios[positive] = rhs[positive] / col[positive]
        best = ratios.min()
        if not np.isfinite(best):
            # phase-1 objective is bounded below by 0, so an unbounded ray
            # here means numerical trouble, not a real certificate
            raise InternalConsistencyError("phase-1 simplex met an unbounded column")
        # Bland: among tied rows pick the one with the smallest basis variable
        tied = np.flatnonzero(positive & (ratios <= best + 1e-15))
        leaving = min(tied, key=lambda i: basis[i])

        pivot = tab[leaving, entering]
        tab[leaving] /= pivot
        rhs[leaving] /= pivot
        for i in range(m):
            if i != leaving and abs(tab[i, entering]) > 0.0:
                f = tab[i, entering]
                tab[i] -= f * tab[leaving]
                rhs[i] -= f * rhs[leaving]
        basis[leaving] = entering
    else:
        raise InternalConsistencyError("phase-1 simplex exceeded iteration cap")

    objective = float(cost[basis] @ rhs)
    return objective <= tol
