"""
Certified sparse solutions of A x = b, x >= 0 integer.

For every simplicial subcone K^i = cone(W^i) of cone(W) a plan stores
  - generators: at most phi(W^i) columns of A generating G_{W^i}(A),
  - a coset table g -> x^g, a nonnegative combination of A-columns with
    x^g - g in the lattice of W^i,
  - a shift z^i with K^i + z^i inside K^i and every K^i + x^g.
A right-hand side b in the lattice and in K^i + z^i is then written as
x^g plus a nonnegative integer combination of W^i, which bounds its support.
"""

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

from src.core.errors import ConeMismatchError, RankDeficientError, ShapeError, SparseBoundError
from src.core.exact_linalg import (
    DEFAULT_FACTOR_CEILING,
    IntegerMatrix,
    IntVector,
    MinorStats,
    det,
    lattice_basis,
    omega,
    rank,
    solve_integer,
    vec_add,
    vec_scale,
    vec_sub,
)
from src.core.geometry import (
    DEFAULT_COVER_CAP,
    SimplicialCone,
    caratheodory_cover,
    integer_coordinates,
    overlap_translate,
)
from src.core.residue_group import DEFAULT_GROUP_CAP, ResidueGroup

_MAX_RELOCATION_DOUBLINGS = 64


class Mode(str, Enum):
    I = "i"
    II = "ii"


# ---------- Plan data ----------

@dataclass(frozen=True)
class CosetEntry:
    """Representative x^g of one coset g of G_{W^i}(A)."""

    rep: IntVector
    # (column of A, coefficient) pairs with A * expansion = rep, coefficients > 0
    expansion: Tuple[Tuple[int, int], ...]
    # W^i coordinates of rep - g
    tau: Tuple[int, ...]
    # coefficients on the plan generators; empty once relocated
    p: Tuple[int, ...] = ()


@dataclass
class SubconePlan:
    index: int
    cone: SimplicialCone
    group: ResidueGroup
    phi_i: int
    generators: Tuple[int, ...]
    coset_table: Dict[IntVector, CosetEntry]
    shift: IntVector
    relocated: bool = False

    @property
    def column_indices(self) -> Tuple[int, ...]:
        return self.cone.column_indices


@dataclass(frozen=True)
class FeasibilityLattice:
    """Lattice spanned by the columns of A; b outside it has no solution.

    basis is the column HNF, so a full-rank lattice has a lower-triangular
    basis and membership is forward substitution.
    """

    basis: IntegerMatrix

    def contains(self, b: Sequence[int]) -> bool:
        if len(b) != self.basis.rows:
            raise ShapeError(f"vector of length {len(b)} does not match lattice dimension {self.basis.rows}")
        if not self.basis.is_square:
            return solve_integer(self.basis, b) is not None
        rows = self.basis.to_rows()
        y: List[int] = []
        for i, row in enumerate(rows):
            s = int(b[i]) - sum(row[j] * y[j] for j in range(i))
            q, r = divmod(s, row[i])
            if r:
                return False
            y.append(q)
        return True


@dataclass
class SolverPlan:
    a: IntegerMatrix
    w_indices: Tuple[int, ...]
    mode: Mode
    lattice: FeasibilityLattice
    plans: List[SubconePlan]
    base_index: int = 0
    phi_min: int = 0
    phi_max: int = 0

    @property
    def m(self) -> int:
        return self.a.rows

    @property
    def n(self) -> int:
        return self.a.cols

    def bound_for(self, plan: SubconePlan) -> int:
        if self.mode is Mode.II:
            return 2 * self.m + self.phi_min
        return self.m + plan.phi_i


# ---------- Outcomes ----------

@dataclass(frozen=True)
class SparseCertificate:
    b: IntVector
    x: IntVector
    support: Tuple[int, ...]
    bound_claimed: int
    mode: Mode
    subcone_index: int


@dataclass(frozen=True)
class Infeasible:
    b: IntVector
    reason: str  # "lattice" or "cone"


@dataclass(frozen=True)
class Uncovered:
    b: IntVector


SolveOutcome = Union[SparseCertificate, Infeasible, Uncovered]


# ---------- Building ----------

def _combine(columns: Sequence[IntVector], pairs: Sequence[Tuple[int, int]], m: int) -> IntVector:
    out = (0,) * m
    for j, c in pairs:
        out = vec_add(out, vec_scale(c, columns[j]))
    return out


def _plan_subcone(
    index: int,
    cone: SimplicialCone,
    columns: Sequence[IntVector],
    group_cap: int,
    factor_ceiling: int,
) -> SubconePlan:
    group = ResidueGroup(cone.matrix, cap=group_cap, factor_ceiling=factor_ceiling)
    gen_idx = group.select_generator_indices(columns)
    gens = [columns[j] for j in gen_idx]
    table: Dict[IntVector, CosetEntry] = {}
    for g, p in group.nonneg_reach(gens).items():
        expansion = tuple((gen_idx[l], c) for l, c in enumerate(p) if c)
        rep = _combine(columns, expansion, group.m)
        tau = integer_coordinates(cone, vec_sub(rep, g.vec))
        if tau is None:
            raise ArithmeticError(f"representative {rep} is not congruent to {g.vec}")
        table[g.vec] = CosetEntry(rep=rep, expansion=expansion, tau=tau, p=tuple(p))
    shift = overlap_translate(cone, [e.rep for e in table.values()])
    return SubconePlan(
        index=index,
        cone=cone,
        group=group,
        phi_i=group.phi,
        generators=tuple(gen_idx),
        coset_table=table,
        shift=shift,
    )


def _move_into(cone: SimplicialCone, base: SubconePlan, x: IntVector) -> IntVector:
    """x + W^i k (k integer) lying in K^1 + z^1.

    Aims at anchors z^1 + r * (v^1 + ... + v^m) for r = 1, 2, 4, ... and rounds
    to the nearest point of x + lattice(W^i); the rounding error is bounded, so
    a large enough anchor always lands inside.
    """
    direction = (0,) * cone.dim
    for v in base.cone.basis:
        direction = vec_add(direction, v)
    for step in range(_MAX_RELOCATION_DOUBLINGS):
        anchor = vec_add(base.shift, vec_scale(2 ** step, direction))
        lam = cone.coordinates(vec_sub(anchor, x))
        k = [math.floor(c + Fraction(1, 2)) for c in lam]
        cand = vec_add(x, cone.combination(k))
        if base.cone.contains(vec_sub(cand, base.shift)):
            return cand
    raise ArithmeticError(f"could not relocate {x} into the base subcone")


def _certify(
    plan: SubconePlan,
    b: IntVector,
    n: int,
    mode: Mode,
    bound: int,
) -> Optional[SparseCertificate]:
    if not plan.cone.contains(vec_sub(b, plan.shift)):
        return None
    g = plan.group.residue(b)
    entry = plan.coset_table.get(g.vec)
    if entry is None:
        return None
    coeffs = integer_coordinates(plan.cone, vec_sub(b, entry.rep))
    if coeffs is None or any(c < 0 for c in coeffs):
        raise ArithmeticError(f"b={b} in a translated subcone but not above its representative")
    x = [0] * n
    for j, c in entry.expansion:
        x[j] += c
    for j, c in zip(plan.column_indices, coeffs):
        x[j] += c
    support = tuple(j for j, v in enumerate(x) if v)
    return SparseCertificate(
        b=tuple(b),
        x=tuple(x),
        support=support,
        bound_claimed=bound,
        mode=mode,
        subcone_index=plan.index,
    )


def _relocate(plan: SubconePlan, base: SubconePlan, m: int, n: int, base_bound: int) -> SubconePlan:
    table: Dict[IntVector, CosetEntry] = {}
    for gvec, entry in plan.coset_table.items():
        rep = _move_into(plan.cone, base, entry.rep)
        cert = _certify(base, rep, n, Mode.I, base_bound)
        if cert is None:
            raise ArithmeticError(f"relocated representative {rep} not certified by the base subcone")
        tau = integer_coordinates(plan.cone, vec_sub(rep, gvec))
        expansion = tuple((j, v) for j, v in enumerate(cert.x) if v)
        table[gvec] = CosetEntry(rep=rep, expansion=expansion, tau=tau)
    shift = overlap_translate(plan.cone, [e.rep for e in table.values()])
    return replace(plan, coset_table=table, shift=shift, relocated=True)


def subcone_lattice(plan: SubconePlan) -> IntegerMatrix:
    """HNF basis of the lattice spanned by the coset representatives and W^i."""
    vectors = [e.rep for e in plan.coset_table.values()] + list(plan.cone.basis)
    return lattice_basis(IntegerMatrix.from_columns(vectors))


def build_plan(
    a: IntegerMatrix,
    w_indices: Optional[Sequence[int]] = None,
    mode: Mode = Mode.I,
    group_cap: int = DEFAULT_GROUP_CAP,
    cover_cap: int = DEFAULT_COVER_CAP,
    factor_ceiling: int = DEFAULT_FACTOR_CEILING,
    log_callback: Optional[Callable[[str], None]] = None,
) -> SolverPlan:
    mode = Mode(mode)
    m, n = a.shape
    if m > n or rank(a) < m:
        raise RankDeficientError()
    w_idx = tuple(range(n)) if w_indices is None else tuple(sorted(set(w_indices)))
    if not w_idx or any(j < 0 or j >= n for j in w_idx):
        raise ShapeError(f"W column indices {w_indices} out of range for {n} columns")

    w = a.select_columns(w_idx)
    cover = caratheodory_cover(w, cover_cap, log_callback=log_callback)
    columns = a.columns()
    if not all(cover.covers(c) for c in columns):
        raise ConeMismatchError("cone(A) != cone(W) for the chosen columns")

    plans: List[SubconePlan] = []
    for idx, cone in enumerate(cover.subcones):
        cone = replace(cone, column_indices=tuple(w_idx[j] for j in cone.column_indices))
        plans.append(_plan_subcone(idx, cone, columns, group_cap, factor_ceiling))
        if log_callback:
            p = plans[-1]
            log_callback(
                f"  subcone {idx} cols={p.column_indices} |det|={p.group.order} "
                f"phi={p.phi_i} generators={p.generators} shift={p.shift}"
            )

    lattice = lattice_basis(a)
    for p in plans:
        if subcone_lattice(p) != lattice:
            raise SparseBoundError(f"lattice built from subcone {p.index} differs from lattice(A)")

    phis = [p.phi_i for p in plans]
    base_index = min(range(len(plans)), key=lambda i: (phis[i], i))
    if mode is Mode.II:
        base = plans[base_index]
        base_bound = m + base.phi_i
        for i in range(len(plans)):
            if i != base_index:
                plans[i] = _relocate(plans[i], base, m, n, base_bound)
        if log_callback:
            log_callback(f"  mode ii: base subcone {base_index} (phi={base.phi_i}), others relocated")

    return SolverPlan(
        a=a,
        w_indices=w_idx,
        mode=mode,
        lattice=FeasibilityLattice(lattice),
        plans=plans,
        base_index=base_index,
        phi_min=min(phis),
        phi_max=max(phis),
    )


# ---------- Solving ----------

def solve_sparse(plan: SolverPlan, b: Sequence[int]) -> SolveOutcome:
    if len(b) != plan.m:
        raise ShapeError(f"right-hand side has length {len(b)}, expected {plan.m}")
    b = tuple(int(v) for v in b)
    if not plan.lattice.contains(b):
        return Infeasible(b, "lattice")
    if not any(p.cone.contains(b) for p in plan.plans):
        return Infeasible(b, "cone")
    for p in plan.plans:
        cert = _certify(p, b, plan.n, plan.mode, plan.bound_for(p))
        if cert is not None:
            return cert
    return Uncovered(b)


def verify_certificate(a: IntegerMatrix, b: Sequence[int], cert: SparseCertificate) -> bool:
    """Independent re-check of a certificate against A and b."""
    x = cert.x
    if len(x) != a.cols or len(b) != a.rows:
        return False
    if tuple(cert.b) != tuple(b):
        return False
    for v in x:
        if isinstance(v, bool) or not isinstance(v, int) or v < 0:
            return False
    if a.apply(x) != tuple(b):
        return False
    support = {j for j, v in enumerate(x) if v}
    if support != set(cert.support):
        return False
    return len(support) <= cert.bound_claimed


# ---------- Bounds ----------

@dataclass(frozen=True)
class Log2Bracket:
    """Exact rational interval [lo, hi] containing a base-2 logarithm."""

    lo: Fraction
    hi: Fraction

    def shifted(self, k) -> "Log2Bracket":
        return Log2Bracket(self.lo + k, self.hi + k)

    def __str__(self) -> str:
        return f"[{self.lo}, {self.hi}]"


def _floor_log2(value: Fraction) -> int:
    a = value.numerator.bit_length() - value.denominator.bit_length()
    if Fraction(2) ** a > value:
        a -= 1
    return a


def log2_bracket(value, bits: int = 8) -> Log2Bracket:
    """log2(value) within [a/2^bits, (a+1)/2^bits], no floating point involved."""
    value = Fraction(value)
    if value <= 0:
        raise ValueError(f"log2 needs a positive value, got {value}")
    scale = 2 ** bits
    a = _floor_log2(value ** scale)
    return Log2Bracket(Fraction(a, scale), Fraction(a + 1, scale))


@dataclass(frozen=True)
class BoundReport:
    m: int
    bound_i: int
    bound_ii: int
    phi_max_within_log: bool
    phi_min_within_log: bool
    relaxed_bound_i: Log2Bracket
    relaxed_bound_ii: Log2Bracket
    det_bound: Log2Bracket
    g_divided_bound_i: Log2Bracket
    g_divided_bound_ii: Log2Bracket
    hilbert_basis_bound: Optional[int] = None
    notes: Tuple[str, ...] = field(default_factory=tuple)


def theorem_bounds(stats: MinorStats, m: Optional[int] = None, hilbert_basis: bool = False) -> BoundReport:
    m = stats.m if m is None else m
    g = stats.minor_gcd
    half = Fraction(1, 2)
    gram_bracket = log2_bracket(Fraction(stats.gram_det, g * g))
    det_bound = Log2Bracket(gram_bracket.lo * half, gram_bracket.hi * half).shifted(m)
    notes = [
        "g-divided bounds are informational: the refined analysis is not carried out",
        "mode (ii) can be bounded from any single invertible m x m submatrix",
    ]
    if hilbert_basis:
        notes.append("Hilbert basis bound rests on the user's assertion that the columns form a Hilbert basis")
    return BoundReport(
        m=m,
        bound_i=m + stats.phi_max,
        bound_ii=2 * m + stats.phi_min,
        phi_max_within_log=2 ** stats.phi_max <= stats.delta_max,
        phi_min_within_log=2 ** stats.phi_min <= stats.delta_min,
        relaxed_bound_i=log2_bracket(stats.delta_max).shifted(m),
        relaxed_bound_ii=log2_bracket(stats.delta_min).shifted(2 * m),
        det_bound=det_bound,
        g_divided_bound_i=log2_bracket(Fraction(stats.delta_max, g)).shifted(m),
        g_divided_bound_ii=log2_bracket(Fraction(stats.delta_min, g)).shifted(2 * m),
        hilbert_basis_bound=m + stats.phi_max if hilbert_basis else None,
        notes=tuple(notes),
    )


def sampled_bound_ii(a: IntegerMatrix, columns: Sequence[int], factor_ceiling: int = DEFAULT_FACTOR_CEILING) -> int:
    """2m + phi of one invertible m x m submatrix, an upper bound for 2m + phi_min."""
    d = abs(det(a.select_columns(columns)))
    if d == 0:
        raise ValueError(f"columns {tuple(columns)} are not linearly independent")
    return 2 * a.rows + omega(d, factor_ceiling)
