"""Per right-hand-side processing, shared by sweeps and the CLI."""

from typing import Dict, List, Sequence

from src.core.oracle import DEFAULT_COLUMN_CAP, DEFAULT_POINT_CAP, sigma_exact
from src.core.sparse_solver import Infeasible, SolverPlan, SparseCertificate, solve_sparse


def process_rhs(
    b: Sequence[int],
    plan: SolverPlan,
    k_list: Sequence[int],
    column_cap: int = DEFAULT_COLUMN_CAP,
    point_cap: int = DEFAULT_POINT_CAP,
) -> Dict:
    """
    Classify one right-hand side against a plan.
    Returns {"status": "infeasible"|"certified"|"oracle"|"unknown"|"failed", "logs": [...],
             "feasible": bool, "covered": bool, "cert_support": int|None,
             "sigma_le": [k, ...], "unknown": bool}
    The oracle runs only for the k a certificate cannot settle.
    """
    logs: List[str] = []
    result = {
        "status": "failed",
        "logs": logs,
        "feasible": False,
        "covered": False,
        "cert_support": None,
        "sigma_le": [],
        "unknown": False,
    }
    b = tuple(b)

    try:
        outcome = solve_sparse(plan, b)

        if isinstance(outcome, Infeasible):
            result["status"] = "infeasible"
            return result

        if isinstance(outcome, SparseCertificate):
            support = len(outcome.support)
            result.update(feasible=True, covered=True, cert_support=support, status="certified")
            below = [k for k in k_list if k < support]
            if not below:
                result["sigma_le"] = list(k_list)
                return result
            sigma = sigma_exact(plan.a, b, max_support=max(below), column_cap=column_cap, point_cap=point_cap)
            if sigma.status == "unknown":
                result.update(unknown=True, status="unknown")
                # the certificate still settles every k >= support
                result["sigma_le"] = [k for k in k_list if k >= support]
                return result
            result["status"] = "oracle"
            floor = sigma.value if sigma.value is not None else support
            result["sigma_le"] = [k for k in k_list if k >= floor]
            return result

        # Uncovered: only the oracle can tell
        sigma = sigma_exact(plan.a, b, max_support=max(k_list), column_cap=column_cap, point_cap=point_cap)
        if sigma.status == "unknown":
            result.update(unknown=True, status="unknown")
            return result
        if sigma.infinite:
            result["status"] = "infeasible"
            return result
        result.update(feasible=True, status="oracle")
        if sigma.value is not None:
            result["sigma_le"] = [k for k in k_list if k >= sigma.value]
        logs.append(f"b={b} uncovered, oracle sigma {sigma.describe()}")

    except Exception as e:
        logs.append(f"Error processing b={b}: {str(e)}")
        result["status"] = "failed"
        return result

    return result
