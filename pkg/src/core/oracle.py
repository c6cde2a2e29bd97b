"""
Ground truth for small systems: feasibility of P(A,b), exact sigma(A,b) and
Frobenius numbers.

Everything here is exhaustive and exact. When a work cap is reached the
answer is "unknown"; it is never guessed.
"""

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import List, Optional, Sequence, Tuple

from src.core.exact_linalg import (
    IntegerMatrix,
    IntVector,
    RatVector,
    hnf,
    integer_solutions,
    rank,
    solve_rational,
)

DEFAULT_COLUMN_CAP = 12
DEFAULT_POINT_CAP = 10**7

YES = "yes"
NO = "no"
UNKNOWN = "unknown"


@dataclass(frozen=True)
class FeasibilityResult:
    status: str
    witness: Optional[IntVector] = None
    points_enumerated: int = 0

    @property
    def is_feasible(self) -> bool:
        return self.status == YES


@dataclass(frozen=True)
class SigmaResult:
    """Outcome of the support search.

    value is set only when it is exact: a witness of that support exists and
    every smaller support was proven infeasible.
    """

    value: Optional[int]
    witness: Optional[IntVector]
    work_caps_hit: bool
    infinite: bool = False
    exhaustive: bool = True
    lower_bound: int = 0
    upper_bound: Optional[int] = None

    @property
    def status(self) -> str:
        if self.infinite:
            return "infinite"
        if self.value is not None:
            return "exact"
        if self.work_caps_hit:
            return UNKNOWN
        return "above"

    def describe(self) -> str:
        if self.infinite:
            return "inf"
        if self.value is not None:
            return str(self.value)
        if self.work_caps_hit:
            upper = "?" if self.upper_bound is None else str(self.upper_bound)
            return f"unknown (between {self.lower_bound} and {upper})"
        return f">= {self.lower_bound}"


# ---------- Polytope data ----------

def _vertices(a: IntegerMatrix, b: Sequence[int]) -> List[RatVector]:
    """Vertices of {x >= 0 : a x = b}; each has linearly independent support columns."""
    n = a.cols
    r = rank(a)
    out = []
    for size in range(1, r + 1):
        for subset in itertools.combinations(range(n), size):
            sub = a.select_columns(subset)
            if rank(sub) < size:
                continue
            sol = solve_rational(sub, b)
            if sol is None or any(v < 0 for v in sol):
                continue
            x = [Fraction(0)] * n
            for j, v in zip(subset, sol):
                x[j] = v
            out.append(tuple(x))
    return out


def _extreme_rays(a: IntegerMatrix) -> List[IntVector]:
    """Extreme rays of {r >= 0 : a r = 0}, as minimal-support integer kernel vectors."""
    n = a.cols
    out = []
    for size in range(1, n + 1):
        for subset in itertools.combinations(range(n), size):
            sub = a.select_columns(subset)
            if rank(sub) != size - 1:
                continue
            res = hnf(sub)
            v = res.u.column(size - 1)
            if all(c < 0 for c in v):
                v = tuple(-c for c in v)
            if not all(c > 0 for c in v):
                continue
            r = [0] * n
            for j, c in zip(subset, v):
                r[j] = c
            out.append(tuple(r))
    return out


def _upper_bounds(vertices: Sequence[RatVector], rays: Sequence[IntVector], n: int) -> List[int]:
    # some integer point, if any exists, lies below max vertex + sum of rays
    return [
        math.floor(max(v[j] for v in vertices) + sum(r[j] for r in rays))
        for j in range(n)
    ]


# ---------- Feasibility ----------

class _PointCapReached(Exception):
    pass


def _search(
    x0: IntVector,
    kernel: List[IntVector],
    upper: List[int],
    point_cap: int,
) -> Tuple[Optional[IntVector], int]:
    """Depth-first search of x0 + K y inside [0, upper], K in column echelon form."""
    n = len(x0)
    res = hnf(IntegerMatrix.from_columns(kernel))
    cols = [res.h.column(c) for _, c in res.pivots]
    pivot_rows = [row for row, _ in res.pivots]
    k = len(cols)
    # rows fully determined once y_0..y_l are fixed
    ends = pivot_rows[1:] + [n]
    decided = [range(0 if l == 0 else pivot_rows[l], ends[l]) for l in range(k)]
    counter = [0]

    def descend(level: int, x: List[int]) -> Optional[IntVector]:
        if level == k:
            return tuple(x)
        col = cols[level]
        row = pivot_rows[level]
        piv = col[row]
        lo = -(x[row] // piv)
        hi = (upper[row] - x[row]) // piv
        for y in range(lo, hi + 1):
            counter[0] += 1
            if counter[0] > point_cap:
                raise _PointCapReached()
            nxt = [xi + y * ci for xi, ci in zip(x, col)]
            if all(0 <= nxt[j] <= upper[j] for j in decided[level]):
                found = descend(level + 1, nxt)
                if found is not None:
                    return found
        return None

    return descend(0, list(x0)), counter[0]


def feasible(
    a: IntegerMatrix,
    b: Sequence[int],
    column_cap: int = DEFAULT_COLUMN_CAP,
    point_cap: int = DEFAULT_POINT_CAP,
) -> FeasibilityResult:
    """Decide whether A x = b has a nonnegative integer solution."""
    b = tuple(int(v) for v in b)
    n = a.cols
    if not any(b):
        return FeasibilityResult(YES, (0,) * n)
    sols = integer_solutions(a, b)
    if sols is None:
        return FeasibilityResult(NO)
    x0, kernel = sols
    if not kernel:
        if all(v >= 0 for v in x0):
            return FeasibilityResult(YES, x0)
        return FeasibilityResult(NO)
    if n > column_cap:
        return FeasibilityResult(UNKNOWN)

    vertices = _vertices(a, b)
    if not vertices:
        return FeasibilityResult(NO)
    upper = _upper_bounds(vertices, _extreme_rays(a), n)
    try:
        witness, visited = _search(x0, kernel, upper, point_cap)
    except _PointCapReached:
        return FeasibilityResult(UNKNOWN, points_enumerated=point_cap)
    if witness is None:
        return FeasibilityResult(NO, points_enumerated=visited)
    return FeasibilityResult(YES, witness, visited)


# ---------- Support function ----------

def _scatter(subset: Sequence[int], values: Sequence[int], n: int) -> IntVector:
    x = [0] * n
    for j, v in zip(subset, values):
        x[j] = v
    return tuple(x)


def sigma_exact(
    a: IntegerMatrix,
    b: Sequence[int],
    max_support: Optional[int] = None,
    column_cap: int = DEFAULT_COLUMN_CAP,
    point_cap: int = DEFAULT_POINT_CAP,
) -> SigmaResult:
    """Smallest support of a solution, by support subsets in increasing size.

    With max_support set, the search stops after that size; a result with
    status "above" then means sigma(A,b) > max_support.
    """
    b = tuple(int(v) for v in b)
    n = a.cols
    if not any(b):
        return SigmaResult(value=0, witness=(0,) * n, work_caps_hit=False, upper_bound=0)

    full = feasible(a, b, column_cap, point_cap)
    if full.status == NO:
        return SigmaResult(value=None, witness=None, work_caps_hit=False, infinite=True, lower_bound=n + 1)

    caps_hit = full.status == UNKNOWN
    clean = True
    lower = 1
    top = n if max_support is None else min(n, max_support)
    for size in range(1, top + 1):
        level_unknown = False
        for subset in itertools.combinations(range(n), size):
            r = feasible(a.select_columns(subset), b, column_cap, point_cap)
            if r.status == YES:
                x = _scatter(subset, r.witness, n)
                if clean:
                    return SigmaResult(value=size, witness=x, work_caps_hit=caps_hit, lower_bound=size, upper_bound=size)
                return SigmaResult(
                    value=None, witness=x, work_caps_hit=True, exhaustive=False,
                    lower_bound=lower, upper_bound=size,
                )
            if r.status == UNKNOWN:
                level_unknown = True
        if level_unknown:
            clean = False
            caps_hit = True
        elif clean:
            lower = size + 1

    upper = None
    if full.witness is not None:
        upper = sum(1 for v in full.witness if v)
    return SigmaResult(
        value=None,
        witness=full.witness,
        work_caps_hit=caps_hit,
        exhaustive=clean,
        lower_bound=lower,
        upper_bound=upper,
    )


# ---------- Frobenius numbers ----------

def frobenius_number(coins: Sequence[int]) -> int:
    """Largest integer that is not a nonnegative combination of the coins."""
    coins = sorted(int(c) for c in coins)
    if not coins:
        raise ValueError("frobenius_number needs at least one coin")
    if coins[0] < 2:
        raise ValueError("coins must be >= 2; a coin 1 represents every integer")
    if reduce(math.gcd, coins) != 1:
        raise ValueError(f"coins {coins} have gcd {reduce(math.gcd, coins)} != 1")
    limit = coins[0] * coins[-1]
    reachable = [False] * (limit + 1)
    reachable[0] = True
    for v in range(1, limit + 1):
        reachable[v] = any(v >= c and reachable[v - c] for c in coins)
    return max(v for v in range(limit + 1) if not reachable[v])
