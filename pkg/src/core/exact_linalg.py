"""
Exact integer and rational linear algebra.

Matrices are numpy object arrays holding Python ints, so every product is
carried out with arbitrary precision and nothing passes through machine
floats. Rational work uses fractions.Fraction.
"""

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from src.core.errors import (
    CapExceededError,
    FactorizationIncompleteError,
    RankDeficientError,
    ShapeError,
    SingularMatrixError,
    SparseBoundError,
)

IntVector = Tuple[int, ...]
RatVector = Tuple[Fraction, ...]

DEFAULT_MINOR_CAP = 200_000
DEFAULT_FACTOR_CEILING = 10**9
# Trial divisors up to this bound are always tried before the ceiling applies.
_SMALL_FACTOR_BOUND = 1000


def _as_int(value) -> int:
    if isinstance(value, (bool, np.bool_)) or not isinstance(value, (int, np.integer)):
        raise TypeError(f"expected an integer entry, got {value!r}")
    return int(value)


# ---------- Vector helpers ----------

def vec_add(x: Sequence, y: Sequence) -> tuple:
    return tuple(a + b for a, b in zip(x, y))


def vec_sub(x: Sequence, y: Sequence) -> tuple:
    return tuple(a - b for a, b in zip(x, y))


def vec_scale(c, x: Sequence) -> tuple:
    return tuple(c * a for a in x)


def dot(x: Sequence, y: Sequence):
    return sum((a * b for a, b in zip(x, y)), 0)


# ---------- IntegerMatrix ----------

class IntegerMatrix:
    """Dense matrix of arbitrary-precision integers, row-major."""

    __slots__ = ("entries",)

    def __init__(self, rows: Iterable[Iterable[int]]):
        data = [[_as_int(v) for v in row] for row in rows]
        if not data or not data[0]:
            raise ShapeError("matrix needs at least one row and one column")
        width = len(data[0])
        for i, row in enumerate(data):
            if len(row) != width:
                raise ShapeError(f"row {i} has {len(row)} entries, expected {width}")
        arr = np.empty((len(data), width), dtype=object)
        for i, row in enumerate(data):
            for j, v in enumerate(row):
                arr[i, j] = v
        self.entries = arr

    @classmethod
    def _wrap(cls, arr: np.ndarray) -> "IntegerMatrix":
        obj = cls.__new__(cls)
        obj.entries = arr
        return obj

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[int]]) -> "IntegerMatrix":
        if not columns:
            raise ShapeError("matrix needs at least one column")
        height = len(columns[0])
        return cls([[col[i] for col in columns] for i in range(height)])

    @classmethod
    def identity(cls, n: int) -> "IntegerMatrix":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    @property
    def shape(self) -> Tuple[int, int]:
        return self.rows, self.cols

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def to_rows(self) -> List[List[int]]:
        return [[int(v) for v in row] for row in self.entries]

    def key(self) -> Tuple[IntVector, ...]:
        return tuple(tuple(int(v) for v in row) for row in self.entries)

    def row(self, i: int) -> IntVector:
        return tuple(int(v) for v in self.entries[i, :])

    def column(self, j: int) -> IntVector:
        return tuple(int(v) for v in self.entries[:, j])

    def columns(self) -> List[IntVector]:
        return [self.column(j) for j in range(self.cols)]

    def select_columns(self, indices: Sequence[int]) -> "IntegerMatrix":
        return IntegerMatrix._wrap(self.entries[:, list(indices)].copy())

    def transpose(self) -> "IntegerMatrix":
        return IntegerMatrix._wrap(self.entries.T.copy())

    def hstack(self, other: "IntegerMatrix") -> "IntegerMatrix":
        if other.rows != self.rows:
            raise ShapeError(f"cannot stack {self.shape} with {other.shape}")
        return IntegerMatrix._wrap(np.concatenate([self.entries, other.entries], axis=1))

    def apply(self, vec: Sequence[int]) -> IntVector:
        """Return self * vec for an integer vector."""
        if len(vec) != self.cols:
            raise ShapeError(f"vector of length {len(vec)} does not match {self.cols} columns")
        out = self.entries.dot(np.array(list(vec), dtype=object))
        return tuple(int(v) for v in out)

    def apply_rational(self, vec: Sequence) -> RatVector:
        if len(vec) != self.cols:
            raise ShapeError(f"vector of length {len(vec)} does not match {self.cols} columns")
        return tuple(Fraction(dot(row, vec)) for row in self.entries)

    def __matmul__(self, other: "IntegerMatrix") -> "IntegerMatrix":
        if self.cols != other.rows:
            raise ShapeError(f"cannot multiply {self.shape} by {other.shape}")
        return IntegerMatrix._wrap(self.entries.dot(other.entries))

    def __eq__(self, other) -> bool:
        return isinstance(other, IntegerMatrix) and self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        return f"IntegerMatrix({self.to_rows()!r})"


# ---------- Determinant ----------

def det(m: IntegerMatrix) -> int:
    """Exact determinant by fraction-free (Bareiss) elimination."""
    if not m.is_square:
        raise ShapeError(f"determinant needs a square matrix, got {m.rows}x{m.cols}")
    a = m.to_rows()
    n = len(a)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        pivot = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            row_i, row_k = a[i], a[k]
            for j in range(k + 1, n):
                # exact by Sylvester's identity
                row_i[j] = (row_i[j] * pivot - aik * row_k[j]) // prev
        prev = pivot
    return sign * a[n - 1][n - 1]


def ext_gcd(a: int, b: int) -> Tuple[int, int, int]:
    """Return (g, x, y) with x*a + y*b = g = gcd(a, b) >= 0."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r != 0:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


# ---------- Hermite normal form ----------

@dataclass(frozen=True)
class HnfResult:
    """Column Hermite normal form: original * u = h.

    h is lower echelon; each pivot is positive and the entries to its left in
    the pivot row lie in [0, pivot).
    """

    h: IntegerMatrix
    u: IntegerMatrix
    pivots: Tuple[Tuple[int, int], ...]

    @property
    def rank(self) -> int:
        return len(self.pivots)


def hnf(m: IntegerMatrix) -> HnfResult:
    rows, n = m.shape
    hc = [list(c) for c in m.columns()]
    uc = [[1 if i == j else 0 for i in range(n)] for j in range(n)]

    def combine(j: int, k: int, a: int, b: int, c: int, d: int) -> None:
        # (col_j, col_k) <- (a*col_j + b*col_k, c*col_j + d*col_k), ad - bc = 1
        for cols in (hc, uc):
            cj, ck = cols[j], cols[k]
            cols[j] = [a * x + b * y for x, y in zip(cj, ck)]
            cols[k] = [c * x + d * y for x, y in zip(cj, ck)]

    pivots: List[Tuple[int, int]] = []
    r = 0
    for i in range(rows):
        if r >= n:
            break
        for j in range(r + 1, n):
            b = hc[j][i]
            if b == 0:
                continue
            a = hc[r][i]
            g, x, y = ext_gcd(a, b)
            combine(r, j, x, y, -b // g, a // g)
        p = hc[r][i]
        if p == 0:
            continue
        if p < 0:
            hc[r] = [-v for v in hc[r]]
            uc[r] = [-v for v in uc[r]]
            p = -p
        for c in range(r):
            q = hc[c][i] // p
            if q:
                hc[c] = [x - q * y for x, y in zip(hc[c], hc[r])]
                uc[c] = [x - q * y for x, y in zip(uc[c], uc[r])]
        pivots.append((i, r))
        r += 1

    return HnfResult(
        h=IntegerMatrix.from_columns(hc),
        u=IntegerMatrix.from_columns(uc),
        pivots=tuple(pivots),
    )


def rank(m: IntegerMatrix) -> int:
    return hnf(m).rank


def solve_integer(m: IntegerMatrix, b: Sequence[int]) -> Optional[IntVector]:
    """Return an integer x with m*x = b, or None when b is outside the column lattice."""
    if len(b) != m.rows:
        raise ShapeError(f"right-hand side has length {len(b)}, expected {m.rows}")
    return _solve_with(hnf(m), m, b)


def integer_solutions(m: IntegerMatrix, b: Sequence[int]) -> Optional[Tuple[IntVector, List[IntVector]]]:
    """All integer solutions of m*x = b as (particular, kernel basis), or None."""
    if len(b) != m.rows:
        raise ShapeError(f"right-hand side has length {len(b)}, expected {m.rows}")
    res = hnf(m)
    x0 = _solve_with(res, m, b)
    if x0 is None:
        return None
    return x0, [res.u.column(j) for j in range(res.rank, m.cols)]


def _solve_with(res: HnfResult, m: IntegerMatrix, b: Sequence[int]) -> Optional[IntVector]:
    h = res.h.entries
    pivot_col = dict(res.pivots)
    y = [0] * m.cols
    for i in range(m.rows):
        s = int(b[i]) - sum(int(h[i, c]) * y[c] for c in range(m.cols) if y[c])
        if i in pivot_col:
            c = pivot_col[i]
            q, rem = divmod(s, int(h[i, c]))
            if rem:
                return None
            y[c] = q
        elif s != 0:
            return None
    return res.u.apply(y)


def integer_kernel(m: IntegerMatrix) -> List[IntVector]:
    """Lattice basis of {x in Z^n : m*x = 0}."""
    res = hnf(m)
    return [res.u.column(j) for j in range(res.rank, m.cols)]


def lattice_basis(m: IntegerMatrix) -> IntegerMatrix:
    """Canonical HNF basis of the lattice spanned by the columns of m."""
    res = hnf(m)
    if res.rank == 0:
        raise RankDeficientError("columns span the zero lattice")
    return IntegerMatrix.from_columns([res.h.column(j) for j in range(res.rank)])


def in_lattice(columns: Sequence[Sequence[int]], v: Sequence[int]) -> bool:
    if not columns:
        return all(x == 0 for x in v)
    return solve_integer(IntegerMatrix.from_columns(columns), v) is not None


# ---------- Smith normal form ----------

@dataclass(frozen=True)
class SnfResult:
    """u * m * v = diag(diagonal); u, v unimodular, diagonal[i] | diagonal[i+1]."""

    diagonal: Tuple[int, ...]
    u: IntegerMatrix
    v: IntegerMatrix


def snf(m: IntegerMatrix) -> SnfResult:
    rows, cols = m.shape
    a = m.to_rows()
    u = [[1 if i == j else 0 for j in range(rows)] for i in range(rows)]
    v = [[1 if i == j else 0 for j in range(cols)] for i in range(cols)]

    def row_op(i: int, k: int, p: int, q: int, r: int, s: int) -> None:
        # (row_i, row_k) <- (p*row_i + q*row_k, r*row_i + s*row_k)
        for mat in (a, u):
            ri, rk = mat[i], mat[k]
            mat[i] = [p * x + q * y for x, y in zip(ri, rk)]
            mat[k] = [r * x + s * y for x, y in zip(ri, rk)]

    def col_op(j: int, k: int, p: int, q: int, r: int, s: int) -> None:
        for mat in (a, v):
            for row in mat:
                x, y = row[j], row[k]
                row[j] = p * x + q * y
                row[k] = r * x + s * y

    diag: List[int] = []
    for t in range(min(rows, cols)):
        nonzero = [(i, j) for i in range(t, rows) for j in range(t, cols) if a[i][j] != 0]
        if not nonzero:
            break
        i0, j0 = min(nonzero, key=lambda ij: abs(a[ij[0]][ij[1]]))
        if i0 != t:
            row_op(t, i0, 0, 1, 1, 0)
        if j0 != t:
            col_op(t, j0, 0, 1, 1, 0)
        while True:
            # gcd steps strictly shrink |pivot|; exact-quotient steps leave the pivot row/column alone
            changed = False
            for i in range(t + 1, rows):
                if a[i][t] == 0:
                    continue
                if a[i][t] % a[t][t] == 0:
                    row_op(i, t, 1, -(a[i][t] // a[t][t]), 0, 1)
                else:
                    g, x, y = ext_gcd(a[t][t], a[i][t])
                    p, q = a[t][t] // g, a[i][t] // g
                    row_op(t, i, x, y, -q, p)
                    changed = True
            for j in range(t + 1, cols):
                if a[t][j] == 0:
                    continue
                if a[t][j] % a[t][t] == 0:
                    col_op(j, t, 1, -(a[t][j] // a[t][t]), 0, 1)
                else:
                    g, x, y = ext_gcd(a[t][t], a[t][j])
                    p, q = a[t][t] // g, a[t][j] // g
                    col_op(t, j, x, y, -q, p)
                    changed = True
            if changed:
                continue
            # enforce divisibility of the remaining block by the pivot
            bad = next(
                ((i, j) for i in range(t + 1, rows) for j in range(t + 1, cols)
                 if a[i][j] % a[t][t] != 0),
                None,
            )
            if bad is None:
                break
            row_op(t, bad[0], 1, 1, 0, 1)
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            u[t] = [-x for x in u[t]]
        diag.append(a[t][t])

    return SnfResult(diagonal=tuple(diag), u=IntegerMatrix(u), v=IntegerMatrix(v))


# ---------- Rational solving ----------

def _gauss_jordan(aug: List[List[Fraction]], cols: int) -> List[int]:
    """Reduce aug in place over its first `cols` columns; return pivot columns."""
    rows = len(aug)
    pivot_cols: List[int] = []
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if aug[i][c] != 0), None)
        if piv is None:
            continue
        aug[r], aug[piv] = aug[piv], aug[r]
        inv = 1 / aug[r][c]
        aug[r] = [x * inv for x in aug[r]]
        for i in range(rows):
            if i != r and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[r])]
        pivot_cols.append(c)
        r += 1
        if r == rows:
            break
    return pivot_cols


def solve_rational(m: IntegerMatrix, b: Sequence) -> Optional[RatVector]:
    """Exact rational x with m*x = b (free variables set to 0), or None if inconsistent."""
    rows, cols = m.shape
    if len(b) != rows:
        raise ShapeError(f"right-hand side has length {len(b)}, expected {rows}")
    aug = [[Fraction(v) for v in row] + [Fraction(bi)] for row, bi in zip(m.to_rows(), b)]
    pivot_cols = _gauss_jordan(aug, cols)
    for i in range(len(pivot_cols), rows):
        if aug[i][cols] != 0:
            return None
    x = [Fraction(0)] * cols
    for i, c in enumerate(pivot_cols):
        x[c] = aug[i][cols]
    return tuple(x)


def inverse_rational(m: IntegerMatrix) -> List[List[Fraction]]:
    if not m.is_square:
        raise ShapeError(f"inverse needs a square matrix, got {m.rows}x{m.cols}")
    n = m.rows
    aug = [
        [Fraction(v) for v in row] + [Fraction(1 if i == j else 0) for j in range(n)]
        for i, row in enumerate(m.to_rows())
    ]
    if len(_gauss_jordan(aug, n)) < n:
        raise SingularMatrixError("matrix is singular")
    return [row[n:] for row in aug]


# ---------- Prime factor counts ----------

def prime_factors(n: int, ceiling: int = DEFAULT_FACTOR_CEILING) -> List[int]:
    """Prime factors of n with multiplicity, by trial division.

    Factors below the small-factor bound are always pulled; beyond that the
    remaining cofactor must not exceed `ceiling`.
    """
    if isinstance(n, bool) or n < 1:
        raise ValueError(f"prime factorization needs n >= 1, got {n}")
    factors: List[int] = []
    rest = n
    p = 2
    while p * p <= rest:
        if p > _SMALL_FACTOR_BOUND and rest > ceiling:
            raise FactorizationIncompleteError(n, rest, ceiling)
        while rest % p == 0:
            factors.append(p)
            rest //= p
        p += 1 if p == 2 else 2
    if rest > 1:
        factors.append(rest)
    return factors


def omega(n: int, ceiling: int = DEFAULT_FACTOR_CEILING) -> int:
    """Number of prime factors of n counted with multiplicity; omega(1) = 0."""
    return len(prime_factors(n, ceiling))


# ---------- Minor statistics ----------

@dataclass(frozen=True)
class MinorStats:
    m: int
    n: int
    delta_set: FrozenSet[int]
    phi_set: FrozenSet[int]
    delta_max: int
    delta_min: int
    phi_max: int
    phi_min: int
    minor_gcd: int
    gram_det: int
    # |det| -> number of m-subsets of columns with that value
    multiplicity: Dict[int, int] = field(default_factory=dict, compare=False)
    phi_of: Dict[int, int] = field(default_factory=dict, compare=False)
    subsets_checked: int = 0
    minor_cap: int = DEFAULT_MINOR_CAP


def minor_stats(
    w: IntegerMatrix,
    cap: int = DEFAULT_MINOR_CAP,
    factor_ceiling: int = DEFAULT_FACTOR_CEILING,
    log_callback: Optional[Callable[[str], None]] = None,
) -> MinorStats:
    """Exhaustive m x m minor statistics of a full-row-rank matrix."""
    m, n = w.shape
    if m > n or rank(w) < m:
        raise RankDeficientError()
    count = math.comb(n, m)
    if count > cap:
        raise CapExceededError("minor enumeration", cap, count)

    multiplicity: Dict[int, int] = {}
    sum_squares = 0
    for cols in itertools.combinations(range(n), m):
        d = abs(det(w.select_columns(cols)))
        sum_squares += d * d
        if d:
            multiplicity[d] = multiplicity.get(d, 0) + 1

    gram = det(w @ w.transpose())
    if gram != sum_squares:
        raise SparseBoundError(f"Cauchy-Binet check failed: det(WW^T)={gram}, sum of squares={sum_squares}")

    deltas = frozenset(multiplicity)
    phi_of = {d: omega(d, factor_ceiling) for d in deltas}
    phis = frozenset(phi_of.values())
    if log_callback:
        log_callback(f"minor_stats: {count} column subsets, {len(deltas)} distinct nonzero minors")
    return MinorStats(
        m=m,
        n=n,
        delta_set=deltas,
        phi_set=phis,
        delta_max=max(deltas),
        delta_min=min(deltas),
        phi_max=max(phis),
        phi_min=min(phis),
        minor_gcd=reduce(math.gcd, deltas),
        gram_det=gram,
        multiplicity=multiplicity,
        phi_of=phi_of,
        subsets_checked=count,
        minor_cap=cap,
    )
