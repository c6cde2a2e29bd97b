"""Report formatting: certificate records, sweep CSV/records, and the sweep workbook."""

import csv
import io
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from src import __version__
from src.core.exact_linalg import IntegerMatrix
from src.core.sparse_solver import Infeasible, SolveOutcome, SparseCertificate, Uncovered
from src.core.utils import atomic_output

try:
    from openpyxl import Workbook
    from openpyxl.styles import PatternFill
    from openpyxl.utils import get_column_letter
    from openpyxl.worksheet.table import Table, TableStyleInfo
    OPENPYXL_AVAILABLE = True
except ImportError:
    OPENPYXL_AVAILABLE = False

SWEEP_HEADERS = [
    "t", "mode", "n_box", "n_feasible", "n_covered", "k",
    "n_sigma_le_k", "ratio_num", "ratio_den", "n_cert_le_k", "n_unknown",
]
LEMMA4_HEADERS = ["t", "num", "den", "nondecreasing"]


def format_header(command: str, seed: Optional[int], caps: Dict[str, int], **extra) -> str:
    """Reproducibility header echoed at the top of every report."""
    cap_text = ",".join(f"{k}={v}" for k, v in sorted(caps.items()))
    parts = [f"# sparsebound {__version__}", f"command={command}", f"seed={seed}", f"caps={cap_text}"]
    parts += [f"{k}={v}" for k, v in extra.items() if v is not None]
    return " ".join(parts)


def format_matrix(matrix: IntegerMatrix, comments: Sequence[str] = ()) -> str:
    lines = [f"# {c}" for c in comments]
    lines.append(f"{matrix.rows} {matrix.cols}")
    lines += [" ".join(str(v) for v in row) for row in matrix.to_rows()]
    return "\n".join(lines) + "\n"


# ---------- Certificates ----------

def format_certificate(cert: SparseCertificate) -> str:
    lines = [
        "status: certificate",
        "b: " + " ".join(str(v) for v in cert.b),
        "x: " + " ".join(f"{j}:{v}" for j, v in enumerate(cert.x) if v),
        "support: " + " ".join(str(j) for j in cert.support),
        f"bound: {cert.bound_claimed}",
        f"mode: {cert.mode.value}",
        f"subcone: {cert.subcone_index}",
    ]
    return "\n".join(lines) + "\n"


def format_outcome(outcome: SolveOutcome) -> str:
    if isinstance(outcome, SparseCertificate):
        return format_certificate(outcome)
    b_text = "b: " + " ".join(str(v) for v in outcome.b)
    if isinstance(outcome, Infeasible):
        return f"status: infeasible\n{b_text}\nreason: {outcome.reason}\n"
    if isinstance(outcome, Uncovered):
        return f"status: uncovered\n{b_text}\n"
    raise TypeError(f"unknown outcome {outcome!r}")


# ---------- Sweeps ----------

def _ratio_cells(num: int, den: int) -> Tuple[str, str]:
    if not den:
        return "", ""
    r = Fraction(num, den)
    return str(r.numerator), str(r.denominator)


def sweep_table(rows) -> List[Dict]:
    """One dict per (t, k), with exact integer counts."""
    out = []
    for row in rows:
        for k in sorted(row.n_sigma_le):
            num, den = _ratio_cells(row.n_sigma_le[k], row.n_feasible)
            out.append({
                "t": row.t,
                "mode": row.mode,
                "n_box": row.n_box,
                "n_feasible": row.n_feasible,
                "n_covered": row.n_covered,
                "k": k,
                "n_sigma_le_k": row.n_sigma_le[k],
                "ratio_num": num,
                "ratio_den": den,
                "n_cert_le_k": row.n_cert_le.get(k, 0),
                "n_unknown": row.n_unknown,
            })
    return out


def sweep_csv(rows, header: str = "") -> str:
    buf = io.StringIO()
    if header:
        buf.write(header + "\n")
    writer = csv.DictWriter(buf, fieldnames=SWEEP_HEADERS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(sweep_table(rows))
    return buf.getvalue()


def sweep_records(rows, header: str = "") -> str:
    blocks = [header] if header else []
    for row in rows:
        lines = [
            f"t: {row.t}",
            f"mode: {row.mode}",
            f"n_box: {row.n_box}",
            f"n_feasible: {row.n_feasible}",
            f"n_covered: {row.n_covered}",
            f"n_unknown: {row.n_unknown}",
        ]
        if row.sample_size is not None:
            lines.append(f"sample: {row.sample_size} seed={row.seed}")
        for k in sorted(row.n_sigma_le):
            ratio = row.ratio(k)
            lines.append(
                f"k={k}: sigma_le={row.n_sigma_le[k]} cert_le={row.n_cert_le.get(k, 0)} "
                f"ratio={'' if ratio is None else ratio}"
            )
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


def lemma4_csv(series: Sequence[Tuple[int, int, int]], header: str = "") -> str:
    buf = io.StringIO()
    if header:
        buf.write(header + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(LEMMA4_HEADERS)
    prev = None
    for t, num, den in series:
        r = Fraction(num, den)
        writer.writerow([t, num, den, "" if prev is None else str(r >= prev).lower()])
        prev = r
    return buf.getvalue()


# ---------- Workbook ----------

def _col_width(ws, col_idx: int, max_width: int = 60) -> float:
    """Estimate column width from the longest cell value in the column."""
    best = 0
    for row in ws.iter_rows(min_col=col_idx, max_col=col_idx):
        for cell in row:
            if cell.value is not None:
                best = max(best, len(str(cell.value)))
    return min(best + 4, max_width)


def _apply_table(ws, name: str) -> None:
    """Wrap the worksheet data in an Excel table with header filters."""
    ref = f"A1:{get_column_letter(ws.max_column)}{ws.max_row}"
    table = Table(displayName=name, ref=ref)
    table.tableStyleInfo = TableStyleInfo(
        name="TableStyleMedium9",
        showFirstColumn=False,
        showLastColumn=False,
        showRowStripes=True,
        showColumnStripes=False,
    )
    ws.add_table(table)


def _autofit(ws) -> None:
    for col_idx in range(1, ws.max_column + 1):
        ws.column_dimensions[get_column_letter(col_idx)].width = _col_width(ws, col_idx)


def write_sweep_workbook(
    path: str,
    rows,
    lemma4_series: Optional[Sequence[Tuple[int, int, int]]] = None,
    run_config: Optional[Dict] = None,
    k_hat: Optional[int] = None,
) -> bool:
    """
    Write the sweep xlsx with Sweep, Lemma4 and RunConfig sheets.
    Ratios are kept as exact integer pairs; cells with ratio 1 are marked green
    and the rows of the estimated k are marked yellow.
    Returns False if openpyxl is unavailable.
    """
    if not OPENPYXL_AVAILABLE:
        return False

    wb = Workbook()
    wb.remove(wb.active)
    full_fill = PatternFill(start_color="C6EFCE", end_color="C6EFCE", fill_type="solid")  # Light green
    short_fill = PatternFill(start_color="FFC7CE", end_color="FFC7CE", fill_type="solid")  # Light red
    khat_fill = PatternFill(start_color="FFEB9C", end_color="FFEB9C", fill_type="solid")  # Yellow

    # --- Sweep sheet ---
    ws = wb.create_sheet("Sweep", 0)
    for col, h in enumerate(SWEEP_HEADERS, 1):
        ws.cell(row=1, column=col, value=h)
    num_col = SWEEP_HEADERS.index("ratio_num") + 1
    for row_idx, rec in enumerate(sweep_table(rows), start=2):
        for col, h in enumerate(SWEEP_HEADERS, 1):
            val = rec[h]
            if h in ("ratio_num", "ratio_den") and val != "":
                val = int(val)
            ws.cell(row=row_idx, column=col, value=val)
        if rec["ratio_den"] != "":
            fill = full_fill if rec["ratio_num"] == rec["ratio_den"] else short_fill
            ws.cell(row=row_idx, column=num_col).fill = fill
        if k_hat is not None and rec["k"] == k_hat:
            ws.cell(row=row_idx, column=SWEEP_HEADERS.index("k") + 1).fill = khat_fill
    if ws.max_row > 1:
        _apply_table(ws, "SweepData")
    _autofit(ws)

    # --- Lemma4 sheet ---
    ws4 = wb.create_sheet("Lemma4", 1)
    for col, h in enumerate(LEMMA4_HEADERS, 1):
        ws4.cell(row=1, column=col, value=h)
    prev = None
    for row_idx, (t, num, den) in enumerate(lemma4_series or [], start=2):
        r = Fraction(num, den)
        ws4.cell(row=row_idx, column=1, value=t)
        ws4.cell(row=row_idx, column=2, value=num)
        ws4.cell(row=row_idx, column=3, value=den)
        if prev is not None:
            ok = r >= prev
            cell = ws4.cell(row=row_idx, column=4, value="PASS" if ok else "FAIL")
            cell.fill = full_fill if ok else short_fill
        prev = r
    if ws4.max_row > 1:
        _apply_table(ws4, "DensityRatio")
    _autofit(ws4)

    # --- RunConfig sheet ---
    wsc = wb.create_sheet("RunConfig", 2)
    wsc.cell(row=1, column=1, value="key")
    wsc.cell(row=1, column=2, value="value")
    for row_idx, (key, value) in enumerate(sorted((run_config or {}).items()), start=2):
        wsc.cell(row=row_idx, column=1, value=key)
        wsc.cell(row=row_idx, column=2, value=str(value))
    _autofit(wsc)

    with atomic_output(path) as tmp:
        wb.save(tmp)
    return True
