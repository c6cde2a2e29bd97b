"""
Average-case sparsity over right-hand-side boxes {-t..t}^m.

density_sweep counts, per box radius t, how many feasible b admit a solution
of support at most k, both from certificates and from the exact oracle.
The module also holds lattice-point counting for dilated parallelepipeds,
the translated-subcone density ratio, and generators for primorial instances.
"""

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import partial
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.core.errors import CapExceededError, ShapeError, SparseBoundError
from src.core.exact_linalg import (
    IntegerMatrix,
    IntVector,
    inverse_rational,
    lattice_basis as hnf_lattice_basis,
    prime_factors,
    rank,
    solve_rational,
)
from src.core.geometry import SimplicialCone
from src.core.oracle import DEFAULT_COLUMN_CAP, DEFAULT_POINT_CAP, frobenius_number
from src.core.processor import process_rhs
from src.core.sparse_solver import FeasibilityLattice, SolverPlan

DEFAULT_BOX_CAP = 2_000_000
DEFAULT_SAMPLE_SIZE = 10_000
DEFAULT_EPSILON = Fraction(1, 100)

EXHAUSTIVE = "exhaustive"
SAMPLED = "sampled"


# ---------- Sweeps ----------

@dataclass
class SweepRow:
    t: int
    mode: str
    n_box: int
    n_feasible: int = 0
    n_covered: int = 0
    # oracle-exact: b known to satisfy sigma(A,b) <= k
    n_sigma_le: Dict[int, int] = field(default_factory=dict)
    # certificate-based: b whose certificate has support <= k
    n_cert_le: Dict[int, int] = field(default_factory=dict)
    n_unknown: int = 0
    sample_size: Optional[int] = None
    seed: Optional[int] = None
    solve_mode: str = "i"

    def ratio(self, k: int) -> Optional[Fraction]:
        if not self.n_feasible:
            return None
        return Fraction(self.n_sigma_le.get(k, 0), self.n_feasible)


def box_size(m: int, t: int) -> int:
    return (2 * t + 1) ** m


def box_points(m: int, t: int) -> List[IntVector]:
    return list(itertools.product(range(-t, t + 1), repeat=m))


def sample_points(m: int, t: int, sample_size: int, seed: int) -> List[IntVector]:
    """Uniform sample of the box, reproducible from (seed, t)."""
    rng = np.random.default_rng([seed, t])
    raw = rng.integers(-t, t + 1, size=(sample_size, m))
    return [tuple(int(v) for v in row) for row in raw]


def _validate_schedule(t_schedule: Sequence[int]) -> List[int]:
    ts = [int(t) for t in t_schedule]
    if not ts:
        raise ValueError("t schedule is empty")
    if any(t < 0 for t in ts) or any(b <= a for a, b in zip(ts, ts[1:])):
        raise ValueError(f"t schedule must be nonnegative and strictly increasing, got {ts}")
    return ts


def density_sweep(
    plan: SolverPlan,
    t_schedule: Sequence[int],
    k_list: Optional[Sequence[int]] = None,
    cap_box: int = DEFAULT_BOX_CAP,
    sample_size: int = DEFAULT_SAMPLE_SIZE,
    seed: int = 0,
    column_cap: int = DEFAULT_COLUMN_CAP,
    point_cap: int = DEFAULT_POINT_CAP,
    threads: Optional[int] = None,
    log_callback: Optional[Callable[[str], None]] = None,
) -> List[SweepRow]:
    ts = _validate_schedule(t_schedule)
    ks = sorted(set(k_list)) if k_list else list(range(1, plan.n + 1))
    m = plan.m
    rows: List[SweepRow] = []

    worker = partial(process_rhs, plan=plan, k_list=ks, column_cap=column_cap, point_cap=point_cap)
    with ThreadPoolExecutor(max_workers=threads) as executor:
        for t in ts:
            if box_size(m, t) <= cap_box:
                points = box_points(m, t)
                row = SweepRow(t=t, mode=EXHAUSTIVE, n_box=len(points), solve_mode=plan.mode.value)
            else:
                points = sample_points(m, t, sample_size, seed)
                row = SweepRow(
                    t=t, mode=SAMPLED, n_box=len(points),
                    sample_size=sample_size, seed=seed, solve_mode=plan.mode.value,
                )
            row.n_sigma_le = {k: 0 for k in ks}
            row.n_cert_le = {k: 0 for k in ks}

            failures = []
            for result in executor.map(worker, points):
                if result["status"] == "failed":
                    failures.extend(result["logs"])
                    continue
                if result["feasible"]:
                    row.n_feasible += 1
                if result["covered"]:
                    row.n_covered += 1
                if result["unknown"]:
                    row.n_unknown += 1
                for k in result["sigma_le"]:
                    row.n_sigma_le[k] += 1
                support = result["cert_support"]
                if support is not None:
                    for k in ks:
                        if support <= k:
                            row.n_cert_le[k] += 1
            if failures:
                raise SparseBoundError(f"sweep failed at t={t}: {failures[0]}")

            if log_callback:
                log_callback(
                    f"  t={t} {row.mode}: box={row.n_box} feasible={row.n_feasible} "
                    f"covered={row.n_covered} unknown={row.n_unknown}"
                )
            rows.append(row)
    return rows


@dataclass(frozen=True)
class SigmaAsyEstimate:
    """Finite-t surrogate for the asymptotic support. An estimate, never a proof."""

    k_hat: Optional[int]
    epsilon: Fraction
    ratios: Dict[int, Tuple[Optional[Fraction], ...]]
    diagnostics: Tuple[str, ...]


def sigma_asy_estimate(rows: Sequence[SweepRow], epsilon=DEFAULT_EPSILON) -> SigmaAsyEstimate:
    if len(rows) < 2:
        raise ValueError("sigma_asy_estimate needs at least two sweep rows")
    epsilon = Fraction(epsilon)
    ks = sorted(rows[-1].n_sigma_le)
    diagnostics = ["estimate from finite boxes; the provable statement is the certificate bound"]
    for row in rows:
        if row.mode == SAMPLED:
            diagnostics.append(f"t={row.t}: sampled ({row.sample_size} points, seed {row.seed})")
        if row.n_unknown:
            diagnostics.append(f"t={row.t}: {row.n_unknown} right-hand sides left unknown by the oracle")

    ratios: Dict[int, Tuple[Optional[Fraction], ...]] = {}
    k_hat = None
    for k in ks:
        series = tuple(row.ratio(k) for row in rows)
        ratios[k] = series
        known = [r for r in series if r is not None]
        monotone = all(b >= a for a, b in zip(known, known[1:]))
        if not monotone:
            diagnostics.append(f"k={k}: ratio not monotone over the schedule")
        final = series[-1]
        if k_hat is None and monotone and final is not None and final >= 1 - epsilon:
            k_hat = k
    return SigmaAsyEstimate(k_hat=k_hat, epsilon=epsilon, ratios=ratios, diagnostics=tuple(diagnostics))


# ---------- Lattice points ----------

def ehrhart_count(
    lattice_basis: IntegerMatrix,
    generators: Sequence[Sequence[int]],
    t: int,
    cap: int = DEFAULT_BOX_CAP,
) -> int:
    """Lattice points in t * {sum lam_w w : lam_w in [0,1]} for independent generators."""
    if t < 0:
        raise ValueError(f"dilation factor must be >= 0, got {t}")
    gens = [tuple(int(x) for x in g) for g in generators]
    m = lattice_basis.rows
    if not gens:
        return 1
    if any(len(g) != m for g in gens):
        raise ShapeError("generator dimension does not match the lattice")
    g_mat = IntegerMatrix.from_columns(gens)
    if rank(g_mat) < len(gens):
        raise ValueError("parallelepiped generators must be linearly independent")

    lattice = FeasibilityLattice(hnf_lattice_basis(lattice_basis))
    lo = [sum(min(0, t * g[i]) for g in gens) for i in range(m)]
    hi = [sum(max(0, t * g[i]) for g in gens) for i in range(m)]
    total = math.prod(h - l + 1 for l, h in zip(lo, hi))
    if total > cap:
        raise CapExceededError("box points", cap, total)

    inverse = inverse_rational(g_mat) if g_mat.is_square else None
    count = 0
    for x in itertools.product(*(range(l, h + 1) for l, h in zip(lo, hi))):
        if inverse is not None:
            lam = [sum((row[j] * x[j] for j in range(m)), Fraction(0)) for row in inverse]
        else:
            lam = solve_rational(g_mat, x)
            if lam is None:
                continue
        if all(0 <= c <= t for c in lam) and lattice.contains(x):
            count += 1
    return count


Interval = Tuple[int, int]


def lemma4_lines(m: int, t: int) -> int:
    """Lines of the box {-t..t}^m swept by lemma4_counts."""
    return (2 * t + 1) ** (m - 1)


def _line_interval(cone: SimplicialCone, shift: Sequence[int], prefix: Sequence[int], t: int) -> Optional[Interval]:
    """Last coordinates y with prefix + (y,) in cone + shift, clipped to [-t, t]."""
    last = len(prefix)
    lo, hi = -t, t
    for a in cone.inner_normals:
        # a . (x - shift) <= 0, linear in y
        c = sum((a[j] * (prefix[j] - shift[j]) for j in range(last)), Fraction(0)) - a[last] * shift[last]
        if a[last] > 0:
            hi = min(hi, math.floor(-c / a[last]))
        elif a[last] < 0:
            lo = max(lo, math.ceil(-c / a[last]))
        elif c > 0:
            return None
        if lo > hi:
            return None
    return lo, hi


def _merge(intervals: List[Interval]) -> List[Interval]:
    merged: List[Interval] = []
    for lo, hi in sorted(intervals):
        if merged and lo <= merged[-1][1] + 1:
            merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
        else:
            merged.append((lo, hi))
    return merged


def _line_union(plan: SolverPlan, prefix: Sequence[int], t: int, shifts: Sequence[Sequence[int]]) -> List[Interval]:
    intervals = []
    for p, shift in zip(plan.plans, shifts):
        interval = _line_interval(p.cone, shift, prefix, t)
        if interval is not None:
            intervals.append(interval)
    return _merge(intervals)


def _intersect(xs: List[Interval], ys: List[Interval]) -> List[Interval]:
    out = []
    for a_lo, a_hi in xs:
        for b_lo, b_hi in ys:
            lo, hi = max(a_lo, b_lo), min(a_hi, b_hi)
            if lo <= hi:
                out.append((lo, hi))
    return out


def _line_progression(lattice: FeasibilityLattice, prefix: Sequence[int]) -> Optional[Tuple[int, int]]:
    """(residue, modulus) of the y with prefix + (y,) in the lattice, or None if there is none."""
    rows = lattice.basis.to_rows()
    y: List[int] = []
    for i, row in enumerate(rows[:-1]):
        q, r = divmod(int(prefix[i]) - sum(row[j] * y[j] for j in range(i)), row[i])
        if r:
            return None
        y.append(q)
    last = rows[-1]
    d = abs(last[len(rows) - 1])
    return sum(last[j] * y[j] for j in range(len(y))) % d, d


def _count_progression(intervals: List[Interval], residue: int, modulus: int) -> int:
    return sum((hi - residue) // modulus - (lo - 1 - residue) // modulus for lo, hi in intervals)


def _count_members(lattice: FeasibilityLattice, prefix: Sequence[int], intervals: List[Interval]) -> int:
    prefix = tuple(prefix)
    return sum(1 for lo, hi in intervals for y in range(lo, hi + 1) if lattice.contains(prefix + (y,)))


def lemma4_counts(plan: SolverPlan, t: int, cap: int = DEFAULT_BOX_CAP) -> Tuple[int, int]:
    """(points of Lambda in the translated subcones, points of Lambda in the subcones) in the box.

    Sweeps the box one line at a time along the last coordinate: every cone
    meets a line in an interval and Lambda meets it in an arithmetic
    progression, so each line is counted exactly without visiting its points.
    cap bounds the number of lines.
    """
    m = plan.m
    lines = lemma4_lines(m, t)
    if lines > cap:
        raise CapExceededError("box lines", cap, lines)
    square = plan.lattice.basis.is_square
    zero = (0,) * m
    num = den = 0
    for prefix in itertools.product(range(-t, t + 1), repeat=m - 1):
        covered = _line_union(plan, prefix, t, [zero] * len(plan.plans))
        if not covered:
            continue
        shifted = _line_union(plan, prefix, t, [p.shift for p in plan.plans])
        shifted = _intersect(shifted, covered)
        if square:
            progression = _line_progression(plan.lattice, prefix)
            if progression is None:
                continue
            den += _count_progression(covered, *progression)
            num += _count_progression(shifted, *progression)
        else:
            den += _count_members(plan.lattice, prefix, covered)
            num += _count_members(plan.lattice, prefix, shifted)
    return num, den


def lemma4_ratio(plan: SolverPlan, t: int, cap: int = DEFAULT_BOX_CAP) -> Fraction:
    """Share of box lattice points of cone(A) that fall into some K^i + z^i."""
    num, den = lemma4_counts(plan, t, cap)
    return Fraction(num, den)


# ---------- Primorial instances ----------

KIND_ATILDE = "Atilde"
KIND_A = "A"
KIND_B = "B"
KINDS = (KIND_ATILDE, KIND_A, KIND_B)


@dataclass(frozen=True)
class PrimorialInstance:
    kind: str
    m: int
    d: int
    primes: Tuple[int, ...]
    q: Tuple[int, ...]
    delta: int
    frobenius: Optional[int]
    matrix: IntegerMatrix


def _check_primes(d: int, primes: Sequence[int]) -> Tuple[int, ...]:
    ps = tuple(int(p) for p in primes)
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    if len(ps) != d:
        raise ValueError(f"expected {d} primes, got {len(ps)}")
    if len(set(ps)) != d:
        raise ValueError(f"primes must be distinct, got {ps}")
    for p in ps:
        if p < 2 or prime_factors(p) != [p]:
            raise ValueError(f"{p} is not prime")
    return tuple(sorted(ps))


def gen_primorial(kind: str, m: int, d: int, primes: Sequence[int]) -> PrimorialInstance:
    if kind not in KINDS:
        raise ValueError(f"unknown instance kind {kind!r}; expected one of {KINDS}")
    ps = _check_primes(d, primes)
    delta = math.prod(ps)
    q = tuple(delta // p for p in ps)
    atilde_row = list(q) + [-delta]

    if kind == KIND_ATILDE:
        m = 1
        rows = [atilde_row]
    else:
        if m < 1:
            raise ValueError(f"m must be >= 1, got {m}")
        # [[I^{m-1}, 0], [0, Atilde]]
        width = m + d
        rows = []
        for i in range(m - 1):
            rows.append([1 if j == i else 0 for j in range(width)])
        rows.append([0] * (m - 1) + atilde_row)
        if kind == KIND_B:
            if d < m + 3:
                raise ValueError(f"kind B needs d >= m + 3, got d={d}, m={m}")
            # [[U, A], [1..1, 0..0]] with U = [I^m | 0]
            u_block = [[1 if j == i else 0 for j in range(m + 1)] for i in range(m)]
            rows = [u + r for u, r in zip(u_block, rows)]
            rows.append([1] * (m + 1) + [0] * width)

    frob = frobenius_number(q) if d >= 2 else None
    return PrimorialInstance(
        kind=kind, m=m, d=d, primes=ps, q=q, delta=delta,
        frobenius=frob, matrix=IntegerMatrix(rows),
    )


def primorial_witnesses(instance: PrimorialInstance, t: int) -> List[IntVector]:
    """Right-hand sides in the box whose support function equals m + d.

    Positive leading coordinates, and a negative last A-row coordinate
    congruent to 1 mod delta; kind B appends a 0 for the all-ones row.
    """
    m = instance.m
    lasts = [v for v in range(-t, 0) if v % instance.delta == 1]
    heads = itertools.product(range(1, t + 1), repeat=m - 1)
    out = [tuple(h) + (v,) for h in heads for v in lasts]
    if instance.kind == KIND_B:
        out = [b + (0,) for b in out]
    return out


def primorial_density_bound(m: int, delta: int, t: int) -> Fraction:
    """Upper bound on the share of feasible b in {-t*delta..t*delta}^m with support <= m + d - 1."""
    side = t * delta + 1
    full = (2 * t * delta + 1) * side ** (m - 1)
    return Fraction(full - t * side ** (m - 1), full)
