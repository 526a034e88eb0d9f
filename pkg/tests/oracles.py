"""Independent reference implementations used to cross-check the package.

Everything here is deliberately naive and self-contained: exact integer /
rational arithmetic instead of floating point, dense grids instead of linear
programs.  Slow, but with nothing to argue about.
"""

from fractions import Fraction
from itertools import combinations
from typing import List, Sequence, Tuple

import numpy as np

Point = Tuple[float, float, float, float]

# ---------------------------------------------------------------------------
# exact vertex enumeration
#
# Two interchangeable backends solve every 4-row subsystem by Cramer's rule:
#
# * an int64 path for systems whose entries are all multiples of 1/16 in
#   [-16, 16].  Determinants of 4x4 matrices with entries bounded by 256 stay
#   below 2^63 with orders of magnitude to spare, so plain numpy integer
#   arithmetic is exact;
# * a Fraction path for arbitrary float entries (Fraction(float) is exact).
# ---------------------------------------------------------------------------

_SCALE = 16


def _with_nonneg(rows) -> List[Tuple[Tuple[float, ...], float]]:
    out = [(tuple(float(c) for c in a), float(b)) for a, b in rows]
    for i in range(4):
        a = [0.0] * 4
        a[i] = -1.0
        out.append((tuple(a), 0.0))
    return out


def _is_dyadic16(rows) -> bool:
    for a, b in rows:
        for v in (*a, b):
            if not (abs(v) <= _SCALE and v * _SCALE == round(v * _SCALE)):
                return False
    return True


def _det3int(m: np.ndarray) -> np.ndarray:
    return (
        m[..., 0, 0] * (m[..., 1, 1] * m[..., 2, 2] - m[..., 1, 2] * m[..., 2, 1])
        - m[..., 0, 1] * (m[..., 1, 0] * m[..., 2, 2] - m[..., 1, 2] * m[..., 2, 0])
        + m[..., 0, 2] * (m[..., 1, 0] * m[..., 2, 1] - m[..., 1, 1] * m[..., 2, 0])
    )


def _det4int(m: np.ndarray) -> np.ndarray:
    total = np.zeros(m.shape[:-2], dtype=np.int64)
    rest = m[..., 1:, :]
    for j in range(4):
        cols = [c for c in range(4) if c != j]
        term = m[..., 0, j] * _det3int(rest[..., cols])
        total = total + (term if j % 2 == 0 else -term)
    return total


def _exact_vertices_int(rows) -> List[Tuple[Fraction, ...]]:
    A = np.array([[round(c * _SCALE) for c in a] for a, _ in rows], dtype=np.int64)
    b = np.array([round(bb * _SCALE) for _, bb in rows], dtype=np.int64)
    m = len(rows)

    combos = np.array(list(combinations(range(m), 4)), dtype=int)
    subA = A[combos]  # (K, 4, 4)
    subB = b[combos]  # (K, 4)

    D = _det4int(subA)
    keep = D != 0
    subA, subB, D = subA[keep], subB[keep], D[keep]

    # Cramer numerators: replace one column at a time by the rhs
    N = np.empty((len(D), 4), dtype=np.int64)
    for k in range(4):
        Mk = subA.copy()
        Mk[:, :, k] = subB
        N[:, k] = _det4int(Mk)

    # normalize the common denominator positive, then test a.x <= b exactly
    # via a.N <= b*D (all integer)
    sign = np.where(D > 0, 1, -1).astype(np.int64)
    N = N * sign[:, None]
    Dp = D * sign
    feas = (N @ A.T <= b[None, :] * Dp[:, None]).all(axis=1)

    seen = set()
    for num, den in zip(N[feas], Dp[feas]):
        seen.add(tuple(Fraction(int(nk), int(den)) for nk in num))
    return sorted(seen)


def _solve4_fraction(rows):
    """Exact Gaussian elimination on a 4x4 system; None when singular."""
    M = [[Fraction(c) for c in a] + [Fraction(b)] for a, b in rows]
    for col in range(4):
        piv = next((r for r in range(col, 4) if M[r][col] != 0), None)
        if piv is None:
            return None
        M[col], M[piv] = M[piv], M[col]
        inv = M[col][col]
        M[col] = [v / inv for v in M[col]]
        for r in range(4):
            if r != col and M[r][col] != 0:
                f = M[r][col]
                M[r] = [v - f * w for v, w in zip(M[r], M[col])]
    return tuple(M[r][4] for r in range(4))


def _exact_vertices_fraction(rows) -> List[Tuple[Fraction, ...]]:
    frac_rows = [
        (tuple(Fraction(c) for c in a), Fraction(b)) for a, b in rows
    ]
    seen = set()
    for subset in combinations(range(len(frac_rows)), 4):
        sol = _solve4_fraction([rows[i] for i in subset])
        if sol is None:
            continue
        if all(
            sum(ak * xk for ak, xk in zip(a, sol)) <= b for a, b in frac_rows
        ):
            seen.add(sol)
    return sorted(seen)


def exact_vertices(user_rows) -> List[Tuple[Fraction, ...]]:
    """All vertices of {a.x <= b} intersected with the nonnegative orthant.

    ``user_rows`` is a sequence of ((a1, a2, a3, a4), b); the four rows
    -x_i <= 0 are appended automatically, mirroring the package convention.
    Returns exact rational points, sorted.
    """
    rows = _with_nonneg(user_rows)
    if _is_dyadic16(rows):
        return _exact_vertices_int(rows)
    return _exact_vertices_fraction(rows)


def exact_maximal(vertices: Sequence[Tuple[Fraction, ...]]) -> List[Tuple[Fraction, ...]]:
    """Componentwise-maximal elements under exact comparison."""
    out = []
    for v in vertices:
        dominated = any(
            w != v and all(wk >= vk for wk, vk in zip(w, v)) for w in vertices
        )
        if not dominated:
            out.append(v)
    return out


def same_point_sets(first, second, tol: float) -> bool:
    """True when the two collections cover each other within L-infinity tol."""
    A = [tuple(float(c) for c in p) for p in first]
    B = [tuple(float(c) for c in p) for p in second]

    def covered(p, pool):
        return any(max(abs(pc - qc) for pc, qc in zip(p, q)) <= tol for q in pool)

    return all(covered(a, B) for a in A) and all(covered(b, A) for b in B)


# ---------------------------------------------------------------------------
# dense grid downward-hull membership (1 to 3 points)
# ---------------------------------------------------------------------------


def grid_in_downward_hull(points, target, step: float = 1e-3, tol: float = 1e-9) -> bool:
    """Brute-force the convex weights over a dense grid of spacing ``step``."""
    pts = np.asarray(points, dtype=float)
    t = np.maximum(0.0, np.asarray(target, dtype=float))
    lam = np.arange(0.0, 1.0 + step / 2, step)
    if len(pts) == 1:
        return bool((pts[0] >= t - tol).all())
    if len(pts) == 2:
        combo = lam[:, None] * pts[0] + (1.0 - lam)[:, None] * pts[1]
        return bool((combo >= t - tol).all(axis=1).any())
    if len(pts) == 3:
        l1, l2 = np.meshgrid(lam, lam, indexing="ij")
        keep = l1 + l2 <= 1.0 + 1e-12
        l1, l2 = l1[keep], l2[keep]
        combo = (
            l1[:, None] * pts[0]
            + l2[:, None] * pts[1]
            + (1.0 - l1 - l2)[:, None] * pts[2]
        )
        return bool((combo >= t - tol).all(axis=1).any())
    raise ValueError("grid oracle supports 1 to 3 points")


# ---------------------------------------------------------------------------
# random test systems
# ---------------------------------------------------------------------------


def random_dyadic_system(rng: np.random.Generator, n_rows: int):
    """Random bounded halfspace rows with entries on the 1/16 grid.

    Coefficients lie in [0, 4] (about a third forced to exact zero so rows
    touch few coordinates), right-hand sides in [0.5, 4].  Every coordinate
    is guaranteed a positive coefficient somewhere, keeping the system
    bounded.  Entries are exactly representable, so the int64 oracle path
    applies.
    """
    while True:
        A = rng.integers(1, 65, size=(n_rows, 4))
        A[rng.random(size=A.shape) < 0.35] = 0
        if (A.max(axis=0) > 0).all():
            break
    b = rng.integers(8, 65, size=n_rows)
    return [
        (tuple(int(v) / _SCALE for v in row), int(rhs) / _SCALE)
        for row, rhs in zip(A, b)
    ]
