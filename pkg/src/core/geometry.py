"""
Simplicial cones, the Caratheodory cover of cone(W), and overlap translation.

A simplicial cone K = cone(v^1, ..., v^m) is stored with its inner normals
a^i = -(row i of V^{-1}), so that a^i . v^j = 0 for i != j, a^i . v^i = -1 and
K = {x : a^i . x <= 0 for all i}.
"""

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Tuple

from src.core.errors import CapExceededError, RankDeficientError, ShapeError
from src.core.exact_linalg import (
    IntegerMatrix,
    IntVector,
    RatVector,
    det,
    dot,
    inverse_rational,
    rank,
    vec_sub,
)

DEFAULT_COVER_CAP = 200_000


@dataclass(frozen=True)
class SimplicialCone:
    basis: Tuple[IntVector, ...]
    inner_normals: Tuple[RatVector, ...]
    column_indices: Tuple[int, ...] = ()

    @classmethod
    def from_basis(cls, basis: Sequence[Sequence[int]], column_indices: Sequence[int] = ()) -> "SimplicialCone":
        vectors = tuple(tuple(int(x) for x in v) for v in basis)
        inv = inverse_rational(IntegerMatrix.from_columns(vectors))
        normals = tuple(tuple(-x for x in row) for row in inv)
        return cls(basis=vectors, inner_normals=normals, column_indices=tuple(column_indices))

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def matrix(self) -> IntegerMatrix:
        return IntegerMatrix.from_columns(self.basis)

    def coordinates(self, x: Sequence) -> RatVector:
        """Exact basis coordinates lam with sum lam_i v^i = x."""
        if len(x) != self.dim:
            raise ShapeError(f"point of length {len(x)} does not match cone dimension {self.dim}")
        return tuple(-Fraction(dot(a, x)) for a in self.inner_normals)

    def contains(self, x: Sequence) -> bool:
        return all(c >= 0 for c in self.coordinates(x))

    def contains_by_normals(self, x: Sequence) -> bool:
        return all(dot(a, x) <= 0 for a in self.inner_normals)

    def combination(self, coeffs: Sequence[int]) -> IntVector:
        """sum coeffs_i v^i."""
        out = [0] * self.dim
        for c, v in zip(coeffs, self.basis):
            if c:
                out = [o + c * x for o, x in zip(out, v)]
        return tuple(out)


def contains(k: SimplicialCone, x: Sequence) -> bool:
    return k.contains(x)


@dataclass(frozen=True)
class ConeCover:
    """cone(W) as the union of its simplicial subcones, in lexicographic column order."""

    subcones: Tuple[SimplicialCone, ...]
    source: IntegerMatrix

    def locate(self, x: Sequence) -> Optional[int]:
        """Index of the first subcone containing x, or None."""
        for idx, cone in enumerate(self.subcones):
            if cone.contains(x):
                return idx
        return None

    def covers(self, x: Sequence) -> bool:
        return self.locate(x) is not None


def caratheodory_cover(
    w: IntegerMatrix,
    cap: int = DEFAULT_COVER_CAP,
    log_callback: Optional[Callable[[str], None]] = None,
) -> ConeCover:
    m, n = w.shape
    if m > n or rank(w) < m:
        raise RankDeficientError()
    count = math.comb(n, m)
    if count > cap:
        raise CapExceededError("cover subsets", cap, count)
    cols = w.columns()
    subcones = []
    for subset in itertools.combinations(range(n), m):
        if det(w.select_columns(subset)) != 0:
            subcones.append(SimplicialCone.from_basis([cols[j] for j in subset], subset))
    if log_callback:
        log_callback(f"cover: {len(subcones)} simplicial subcones out of {count} column subsets")
    return ConeCover(subcones=tuple(subcones), source=w)


def cone_equal(a: IntegerMatrix, w: IntegerMatrix, cap: int = DEFAULT_COVER_CAP) -> bool:
    """cone(A) == cone(W) for W a column subset of A."""
    if a.rows != w.rows:
        raise ShapeError(f"row counts differ: {a.rows} vs {w.rows}")
    if not set(w.columns()) <= set(a.columns()):
        raise ValueError("W must be a subset of the columns of A")
    cover = caratheodory_cover(w, cap)
    return all(cover.covers(col) for col in a.columns())


# ---------- Overlap translation ----------

def _pair_point(k: SimplicialCone, x: Sequence, y: Sequence) -> RatVector:
    """A point of K, K + x and K + y, with r^j := v^j in the two-translate construction."""
    point = [Fraction(c) for c in x]
    diff = vec_sub(x, y)
    for a, r in zip(k.inner_normals, k.basis):
        ar = dot(a, r)
        ax = dot(a, x)
        axy = dot(a, diff)
        if axy > 0:
            lam = max(-axy / ar, -ax / ar)
        else:
            lam = max(Fraction(0), -ax / ar)
        if lam:
            point = [p + lam * rc for p, rc in zip(point, r)]
    return tuple(point)


def overlap_translate(k: SimplicialCone, xs: Sequence[Sequence[int]]) -> IntVector:
    """Integer z = sum k_i v^i, k_i >= 0, with K + z inside K and every K + x^i.

    Folds the two-translate construction over xs, then rounds the basis
    coordinates up. The result is checked exactly: z in K and z - x^i in K.
    """
    w: RatVector = tuple(Fraction(0) for _ in range(k.dim))
    for x in xs:
        w = _pair_point(k, w, x)
    coeffs = [math.ceil(c) for c in k.coordinates(w)]
    z = k.combination(coeffs)
    if not k.contains(z) or any(not k.contains(vec_sub(z, x)) for x in xs):
        raise ArithmeticError("overlap translation failed its containment check")
    return z


def integer_coordinates(k: SimplicialCone, x: Sequence[int]) -> Optional[Tuple[int, ...]]:
    """Basis coordinates of x when all are integers, else None."""
    coords = k.coordinates(x)
    if any(c.denominator != 1 for c in coords):
        return None
    return tuple(int(c) for c in coords)
