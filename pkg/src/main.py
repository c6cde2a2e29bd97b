"""Command handlers for the sparsebound CLI.

stdout carries the report payload; progress, timing and errors go to stderr.
"""

import itertools
import os
import pickle
import sys
import time
from typing import Dict, List, Optional, Sequence, Tuple

from src.config.manager import (
    RunConfig,
    SparseBoundConfigManager,
    _get_project_root,
    check_config_name,
    resolve_run_config,
)
from src.core.errors import SparseBoundError
from src.core.exact_linalg import IntegerMatrix, det, minor_stats
from src.core.geometry import cone_equal
from src.core.utils import atomic_output, atomic_write_text, file_sha256, parse_int_list

EXIT_OK = 0
EXIT_INFEASIBLE = 1
EXIT_UNCOVERED = 2
EXIT_LIBRARY_ERROR = 3
EXIT_UNEXPECTED = 4


def log(message: str) -> None:
    print(message, file=sys.stderr)


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        atomic_write_text(out, text)
        log(f"Wrote: {out}")
    else:
        sys.stdout.write(text)


def _header(cfg: RunConfig, **extra) -> str:
    from src.io.report import format_header

    return format_header(cfg.command, cfg.seed, cfg.caps(), mode=cfg.mode, **extra)


def _w_cols(args) -> Optional[List[int]]:
    cols = parse_int_list(getattr(args, "w_cols", None), name="W columns")
    return cols or None


def _print_timing(breakdown: Sequence[Tuple[str, float]]) -> None:
    total = sum(t for _, t in breakdown)
    log("[TIMING] Breakdown:")
    for label, sec in breakdown:
        pct = (100 * sec / total) if total else 0
        log(f"  {label}: {sec:.2f}s ({pct:.0f}%)")


# ---------- Plan cache ----------

_PLAN_CACHE: Dict[str, object] = {}


def _cache_dir(cfg: RunConfig) -> str:
    if os.path.isabs(cfg.plan_cache_dir):
        return cfg.plan_cache_dir
    return os.path.join(_get_project_root(), cfg.plan_cache_dir)


def load_plan(matrix_path: str, matrix: IntegerMatrix, mode: str, w_cols: Optional[List[int]], cfg: RunConfig):
    """Build a solver plan, or reuse one cached in-process or on disk.

    Cache key: SHA-256 of the matrix file, mode, and the W column selection.
    """
    from src.core.sparse_solver import build_plan

    w_tag = "all" if w_cols is None else "-".join(str(c) for c in sorted(set(w_cols)))
    key = f"{file_sha256(matrix_path)}_{mode}_{w_tag}"
    if key in _PLAN_CACHE:
        return _PLAN_CACHE[key]

    disk_path = os.path.join(_cache_dir(cfg), f"{key}.pkl")
    if os.path.exists(disk_path):
        try:
            with open(disk_path, "rb") as f:
                plan = pickle.load(f)
            if plan.a == matrix:
                log(f"Plan cache hit: {disk_path}")
                _PLAN_CACHE[key] = plan
                return plan
        except Exception as e:
            log(f"Plan cache unreadable, rebuilding: {e}")

    log(f"Building plan (mode {mode})")
    plan = build_plan(
        matrix,
        w_cols,
        mode=mode,
        group_cap=cfg.cap_group,
        cover_cap=cfg.cap_minors,
        factor_ceiling=cfg.factor_ceiling,
        log_callback=log,
    )
    try:
        with atomic_output(disk_path) as tmp:
            with open(tmp, "wb") as f:
                pickle.dump(plan, f, protocol=pickle.HIGHEST_PROTOCOL)
    except OSError as e:
        log(f"WARNING: Could not write plan cache: {e}")
    _PLAN_CACHE[key] = plan
    return plan


# ---------- Commands ----------

def cmd_analyze(args, cfg: RunConfig) -> int:
    from src.core.sparse_solver import sampled_bound_ii, theorem_bounds
    from src.io.loader import load_matrix

    a = load_matrix(cfg.matrix_path, log_callback=log)
    w_cols = _w_cols(args)
    w = a.select_columns(w_cols) if w_cols else a
    stats = minor_stats(w, cap=cfg.cap_minors, factor_ceiling=cfg.factor_ceiling, log_callback=log)
    report = theorem_bounds(stats, hilbert_basis=getattr(args, "hilbert_basis", False))
    # the Gram determinant bound is a statement about A, whatever W is
    if w_cols:
        a_stats = minor_stats(a, cap=cfg.cap_minors, factor_ceiling=cfg.factor_ceiling, log_callback=log)
        a_report = theorem_bounds(a_stats)
    else:
        a_stats, a_report = stats, report
    first = next(c for c in itertools.combinations(range(w.cols), w.rows) if det(w.select_columns(c)) != 0)
    of_w = "W " if w_cols else ""

    lines = [
        _header(cfg),
        f"m: {stats.m}",
        f"n: {a.cols}",
        "W columns: " + ("all" if not w_cols else " ".join(str(c) for c in w_cols)),
    ]
    if w_cols:
        lines.append(f"cone(A) == cone(W): {str(cone_equal(a, w, cfg.cap_minors)).lower()}")
    lines += [
        f"{of_w}Delta: " + " ".join(str(d) for d in sorted(stats.delta_set)),
        f"{of_w}Phi: " + " ".join(str(p) for p in sorted(stats.phi_set)),
        f"{of_w}delta_max: {stats.delta_max}",
        f"{of_w}delta_min: {stats.delta_min}",
        f"{of_w}phi_max: {stats.phi_max}",
        f"{of_w}phi_min: {stats.phi_min}",
    ]
    if w_cols:
        lines += [f"W g: {stats.minor_gcd}", f"W gram_det: {stats.gram_det}"]
    lines += [
        f"g: {a_stats.minor_gcd}",
        f"gram_det: {a_stats.gram_det}",
        f"{of_w}minor subsets checked: {stats.subsets_checked} (cap {stats.minor_cap})",
        f"bound (i) m+phi_max: {report.bound_i}",
        f"bound (ii) 2m+phi_min: {report.bound_ii}",
        f"2^phi_max <= delta_max: {str(report.phi_max_within_log).lower()}",
        f"2^phi_min <= delta_min: {str(report.phi_min_within_log).lower()}",
        f"m+log2(delta_max) in {report.relaxed_bound_i}",
        f"2m+log2(delta_min) in {report.relaxed_bound_ii}",
        f"m+log2(sqrt(gram_det)/g) in {a_report.det_bound}",
        f"informational m+log2(delta_max/g) in {report.g_divided_bound_i}",
        f"informational 2m+log2(delta_min/g) in {report.g_divided_bound_ii}",
        f"bound (ii) from columns {' '.join(str(c) for c in first)}: "
        f"{sampled_bound_ii(w, first, cfg.factor_ceiling)}",
    ]
    if report.hilbert_basis_bound is not None:
        lines.append(f"Hilbert basis bound m+phi_max: {report.hilbert_basis_bound}")
    lines += [f"note: {n}" for n in report.notes]
    _emit("\n".join(lines) + "\n", cfg.out)
    return EXIT_OK


def cmd_solve(args, cfg: RunConfig) -> int:
    from src.core.sparse_solver import Infeasible, SparseCertificate, solve_sparse, verify_certificate
    from src.io.loader import load_matrix
    from src.io.report import format_outcome

    t0 = time.perf_counter()
    a = load_matrix(cfg.matrix_path, log_callback=log)
    b = parse_int_list(args.b, name="b")
    plan = load_plan(cfg.matrix_path, a, cfg.mode, _w_cols(args), cfg)
    t_plan = time.perf_counter() - t0

    t0 = time.perf_counter()
    outcome = solve_sparse(plan, b)
    if isinstance(outcome, SparseCertificate) and not verify_certificate(a, b, outcome):
        raise SparseBoundError(f"certificate for b={tuple(b)} failed its own verification")
    t_solve = time.perf_counter() - t0

    _emit(_header(cfg) + "\n" + format_outcome(outcome), cfg.out)
    _print_timing([("load + plan", t_plan), ("solve + verify", t_solve)])
    if isinstance(outcome, SparseCertificate):
        return EXIT_OK
    if isinstance(outcome, Infeasible):
        return EXIT_INFEASIBLE
    return EXIT_UNCOVERED


def cmd_sigma(args, cfg: RunConfig) -> int:
    from src.core.oracle import sigma_exact
    from src.io.loader import load_matrix

    a = load_matrix(cfg.matrix_path, log_callback=log)
    b = parse_int_list(args.b, name="b")
    result = sigma_exact(a, b, column_cap=cfg.cap_oracle_columns, point_cap=cfg.cap_oracle_points)
    lines = [
        _header(cfg),
        "b: " + " ".join(str(v) for v in b),
        f"sigma: {result.describe()}",
        f"status: {result.status}",
        f"exhaustive: {str(result.exhaustive).lower()}",
        f"caps_hit: {str(result.work_caps_hit).lower()}",
    ]
    if result.witness is not None:
        lines.append("x: " + " ".join(f"{j}:{v}" for j, v in enumerate(result.witness) if v))
    _emit("\n".join(lines) + "\n", cfg.out)
    if result.infinite:
        return EXIT_INFEASIBLE
    return EXIT_OK if result.value is not None else EXIT_UNCOVERED


def cmd_sweep(args, cfg: RunConfig) -> int:
    from src.core.asymptotics import density_sweep, lemma4_counts, lemma4_lines, sigma_asy_estimate
    from src.io.loader import load_matrix
    from src.io.report import sweep_csv, sweep_records, write_sweep_workbook

    if cfg.fmt == "xlsx" and not cfg.out:
        raise ValueError("--format xlsx needs --out")

    timing = []
    t0 = time.perf_counter()
    a = load_matrix(cfg.matrix_path, log_callback=log)
    plan = load_plan(cfg.matrix_path, a, cfg.mode, _w_cols(args), cfg)
    timing.append(("load + plan", time.perf_counter() - t0))

    t0 = time.perf_counter()
    log(f"Sweeping t in {cfg.t_schedule}")
    rows = density_sweep(
        plan,
        cfg.t_schedule,
        k_list=cfg.k_list or None,
        cap_box=cfg.cap_box,
        sample_size=cfg.sample_size,
        seed=cfg.seed,
        column_cap=cfg.cap_oracle_columns,
        point_cap=cfg.cap_oracle_points,
        threads=cfg.threads,
        log_callback=log,
    )
    timing.append(("density sweep", time.perf_counter() - t0))

    bound = plan.m + plan.phi_max if cfg.mode == "i" else 2 * plan.m + plan.phi_min
    notes = [f"# certificate bound (mode {cfg.mode}): {bound}"]
    estimate = None
    if len(rows) >= 2:
        estimate = sigma_asy_estimate(rows, cfg.epsilon)
        notes.append(f"# sigma_asy estimate (not a proof): k_hat={estimate.k_hat} epsilon={estimate.epsilon}")
        notes += [f"# diagnostic: {d}" for d in estimate.diagnostics]
    header = "\n".join([_header(cfg)] + notes)

    t0 = time.perf_counter()
    if cfg.fmt == "xlsx":
        series = []
        for t in cfg.t_schedule:
            if lemma4_lines(plan.m, t) <= cfg.cap_box:
                series.append((t,) + lemma4_counts(plan, t, cfg.cap_box))
        if write_sweep_workbook(cfg.out, rows, series, cfg.as_dict(), estimate.k_hat if estimate else None):
            log(f"Wrote: {cfg.out}")
        else:
            log("WARNING: openpyxl not available, workbook not written")
            return EXIT_LIBRARY_ERROR
    elif cfg.fmt == "records":
        _emit(sweep_records(rows, header), cfg.out)
    else:
        _emit(sweep_csv(rows, header), cfg.out)
    timing.append(("write report", time.perf_counter() - t0))
    _print_timing(timing)
    return EXIT_OK


def cmd_lemma4(args, cfg: RunConfig) -> int:
    from src.core.asymptotics import lemma4_counts
    from src.io.loader import load_matrix
    from src.io.report import lemma4_csv

    a = load_matrix(cfg.matrix_path, log_callback=log)
    plan = load_plan(cfg.matrix_path, a, cfg.mode, _w_cols(args), cfg)
    series = [(t,) + lemma4_counts(plan, t, cfg.cap_box) for t in cfg.t_schedule]
    _emit(lemma4_csv(series, _header(cfg)), cfg.out)
    return EXIT_OK


def cmd_gen(args, cfg: RunConfig) -> int:
    from src.core.asymptotics import KIND_B, gen_primorial, primorial_density_bound, primorial_witnesses
    from src.io.report import format_matrix

    primes = parse_int_list(args.primes, name="primes")
    inst = gen_primorial(args.kind, args.m, args.d, primes)
    comments = [
        _header(cfg, kind=inst.kind, d=inst.d)[2:],
        "primes: " + " ".join(str(p) for p in inst.primes),
        "q: " + " ".join(str(q) for q in inst.q),
        f"delta: {inst.delta}",
        f"frobenius: {inst.frobenius if inst.frobenius is not None else 'none'}",
    ]
    if inst.kind != KIND_B:
        for t in cfg.t_schedule:
            if t >= 1:
                comments.append(
                    f"density bound k={inst.m + inst.d - 1} box radius {t * inst.delta}: "
                    f"{primorial_density_bound(inst.m, inst.delta, t)}"
                )
    if getattr(args, "witnesses", None) is not None:
        witnesses = primorial_witnesses(inst, args.witnesses)
        comments.append(f"witnesses with sigma = m+d in box radius {args.witnesses}: {len(witnesses)}")
        comments += ["b: " + " ".join(str(v) for v in w) for w in witnesses]
    _emit(format_matrix(inst.matrix, comments), cfg.out)
    return EXIT_OK


def cmd_verify(args, cfg: RunConfig) -> int:
    from src.core.sparse_solver import verify_certificate
    from src.io.loader import load_certificates, load_matrix

    a = load_matrix(cfg.matrix_path, log_callback=log)
    certs = load_certificates(args.certificate, a.cols)
    failed = 0
    lines = [_header(cfg)]
    for idx, cert in enumerate(certs):
        ok = verify_certificate(a, cert.b, cert)
        failed += 0 if ok else 1
        lines.append(f"record {idx}: {'ok' if ok else 'FAIL'}")
    lines.append(f"verified: {len(certs) - failed}/{len(certs)}")
    _emit("\n".join(lines) + "\n", cfg.out)
    return EXIT_OK if not failed else EXIT_INFEASIBLE


COMMANDS = {
    "analyze": cmd_analyze,
    "solve": cmd_solve,
    "sigma": cmd_sigma,
    "sweep": cmd_sweep,
    "lemma4": cmd_lemma4,
    "gen": cmd_gen,
    "verify": cmd_verify,
}


def headless_main(args) -> int:
    """Run one subcommand. Returns the exit code."""
    try:
        config_name = getattr(args, "config", None)
        if config_name:
            check_config_name(config_name)
        manager = SparseBoundConfigManager(config_name=config_name)
        cfg = resolve_run_config(args, manager)
        code = COMMANDS[args.command](args, cfg)
        if config_name:
            manager.activate()
        if cfg.matrix_path:
            manager.set("last_matrix_path", os.path.abspath(cfg.matrix_path))
        return code
    except (SparseBoundError, ValueError) as e:
        log(f"ERROR: {e}")
        return EXIT_LIBRARY_ERROR
    except Exception as e:
        log(f"ERROR: unexpected {type(e).__name__}: {e}")
        return EXIT_UNEXPECTED
