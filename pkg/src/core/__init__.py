"""Core exact arithmetic, geometry, solver and oracle."""

from src.core.errors import (
    CapExceededError,
    ConeMismatchError,
    FactorizationIncompleteError,
    ParseError,
    RankDeficientError,
    ShapeError,
    SingularMatrixError,
    SparseBoundError,
)
from src.core.exact_linalg import IntegerMatrix, MinorStats, det, hnf, minor_stats, omega, snf, solve_rational
from src.core.residue_group import GroupElement, ResidueGroup
from src.core.geometry import ConeCover, SimplicialCone, caratheodory_cover, cone_equal, overlap_translate
from src.core.sparse_solver import (
    Mode,
    SolverPlan,
    SparseCertificate,
    build_plan,
    solve_sparse,
    theorem_bounds,
    verify_certificate,
)
from src.core.oracle import feasible, frobenius_number, sigma_exact

__all__ = [
    "CapExceededError",
    "ConeMismatchError",
    "FactorizationIncompleteError",
    "ParseError",
    "RankDeficientError",
    "ShapeError",
    "SingularMatrixError",
    "SparseBoundError",
    "IntegerMatrix",
    "MinorStats",
    "det",
    "hnf",
    "minor_stats",
    "omega",
    "snf",
    "solve_rational",
    "GroupElement",
    "ResidueGroup",
    "ConeCover",
    "SimplicialCone",
    "caratheodory_cover",
    "cone_equal",
    "overlap_translate",
    "Mode",
    "SolverPlan",
    "SparseCertificate",
    "build_plan",
    "solve_sparse",
    "theorem_bounds",
    "verify_certificate",
    "feasible",
    "frobenius_number",
    "sigma_exact",
]
