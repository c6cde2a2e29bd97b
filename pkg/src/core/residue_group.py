"""
Finite residue group of a fundamental parallelepiped.

For an invertible W, every integer vector b has a unique representative g in
Pi(W) = {W*lam : lam in [0,1)^m} with b - g in the column lattice of W. These
representatives form a group of order |det W| under "add, then reduce".
"""

import itertools
import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from src.core.errors import CapExceededError, ShapeError, SingularMatrixError
from src.core.exact_linalg import (
    DEFAULT_FACTOR_CEILING,
    IntegerMatrix,
    IntVector,
    det,
    in_lattice,
    inverse_rational,
    omega,
    snf,
    vec_add,
)

DEFAULT_GROUP_CAP = 1_000_000


@dataclass(frozen=True)
class GroupElement:
    """A residue: its canonical lift in Pi(W) and its Smith coordinates."""

    vec: IntVector
    coords: Tuple[int, ...]
    group_key: Tuple[IntVector, ...]

    @property
    def is_zero(self) -> bool:
        return not any(self.vec)


class ResidueGroup:
    """The group G_W(Z^m) for an invertible integer matrix W."""

    def __init__(
        self,
        w: IntegerMatrix,
        cap: int = DEFAULT_GROUP_CAP,
        factor_ceiling: int = DEFAULT_FACTOR_CEILING,
    ):
        if not w.is_square:
            raise ShapeError(f"residue group needs a square matrix, got {w.rows}x{w.cols}")
        d = det(w)
        if d == 0:
            raise SingularMatrixError("residue group needs an invertible matrix")
        self.w = w
        self.m = w.rows
        self.order = abs(d)
        self.cap = cap
        self.factor_ceiling = factor_ceiling
        self.key = w.key()
        self._inverse = inverse_rational(w)
        smith = snf(w)
        self.snf_diag: Tuple[int, ...] = smith.diagonal
        self._snf_u = smith.u
        self._phi: Optional[int] = None

    # ------------------------------------------------------------------
    # Residues
    # ------------------------------------------------------------------

    @property
    def phi(self) -> int:
        """Number of prime factors of the group order (raises if not factorizable)."""
        if self._phi is None:
            self._phi = omega(self.order, self.factor_ceiling)
        return self._phi

    def coordinates(self, b: Sequence[int]) -> Tuple[Fraction, ...]:
        """Exact lam with W*lam = b."""
        return tuple(sum((row[j] * b[j] for j in range(self.m)), Fraction(0)) for row in self._inverse)

    def snf_coords(self, b: Sequence[int]) -> Tuple[int, ...]:
        ub = self._snf_u.apply(b)
        return tuple(x % d for x, d in zip(ub, self.snf_diag))

    def residue(self, b: Sequence[int]) -> GroupElement:
        if len(b) != self.m:
            raise ShapeError(f"vector of length {len(b)} does not match dimension {self.m}")
        lam = self.coordinates(b)
        frac = [x - math.floor(x) for x in lam]
        g = self.w.apply_rational(frac)
        vec = tuple(int(x) for x in g)
        return GroupElement(vec=vec, coords=self.snf_coords(vec), group_key=self.key)

    @property
    def zero(self) -> GroupElement:
        return GroupElement(vec=(0,) * self.m, coords=(0,) * len(self.snf_diag), group_key=self.key)

    def _check(self, *elements: GroupElement) -> None:
        for e in elements:
            if e.group_key != self.key:
                raise ValueError("group element belongs to a different residue group")

    def group_add(self, g: GroupElement, h: GroupElement) -> GroupElement:
        self._check(g, h)
        return self.residue(vec_add(g.vec, h.vec))

    def in_lattice(self, b: Sequence[int]) -> bool:
        """True iff b lies in the column lattice of W."""
        return self.residue(b).is_zero

    # ------------------------------------------------------------------
    # Enumeration and subgroups
    # ------------------------------------------------------------------

    def _require_cap(self) -> None:
        if self.order > self.cap:
            raise CapExceededError("group enumeration", self.cap, self.order)

    def enumerate_group(self) -> List[GroupElement]:
        """All |det W| elements, one per Smith coordinate tuple."""
        self._require_cap()
        u_inv = inverse_rational(self._snf_u)
        elements = []
        for coords in itertools.product(*(range(d) for d in self.snf_diag)):
            lift = [int(sum((row[j] * coords[j] for j in range(self.m)), Fraction(0))) for row in u_inv]
            elements.append(self.residue(lift))
        return elements

    def subgroup_contains(self, generators: Sequence[Sequence[int]], g: GroupElement) -> bool:
        """Membership of g in G_W(generators), decided by lattice membership."""
        self._check(g)
        for gen in generators:
            if len(gen) != self.m:
                raise ShapeError(f"generator of length {len(gen)} does not match dimension {self.m}")
        if not generators:
            return g.is_zero
        return in_lattice(list(generators) + self.w.columns(), g.vec)

    def nonneg_reach(self, generators: Sequence[Sequence[int]]) -> Dict[GroupElement, Tuple[int, ...]]:
        """Map each element of G_W(generators) to nonnegative coefficients reaching it.

        Breadth-first over the Cayley graph from 0, so coefficient sums are minimal
        and the traversal order is deterministic.
        """
        self._require_cap()
        k = len(generators)
        steps = [self.residue(gen) for gen in generators]
        start = self.zero
        reached: Dict[GroupElement, Tuple[int, ...]] = {start: (0,) * k}
        queue = deque([start])
        while queue:
            cur = queue.popleft()
            coeffs = reached[cur]
            for idx, step in enumerate(steps):
                nxt = self.group_add(cur, step)
                if nxt not in reached:
                    reached[nxt] = coeffs[:idx] + (coeffs[idx] + 1,) + coeffs[idx + 1:]
                    queue.append(nxt)
        return reached

    def select_generators(self, candidates: Sequence[Sequence[int]]) -> List[IntVector]:
        """Greedy strictly increasing subgroup chain; at most phi(W) picks."""
        return [tuple(candidates[i]) for i in self.select_generator_indices(candidates)]

    def select_generator_indices(self, candidates: Sequence[Sequence[int]]) -> List[int]:
        """Positions in `candidates` of the greedy chain, scanned in input order."""
        chosen: List[IntVector] = []
        picked: List[int] = []
        for idx, cand in enumerate(candidates):
            if not self.subgroup_contains(chosen, self.residue(cand)):
                chosen.append(tuple(cand))
                picked.append(idx)
        if len(picked) > self.phi:
            raise ArithmeticError(f"generator chain of length {len(picked)} exceeds phi={self.phi}")
        return picked
