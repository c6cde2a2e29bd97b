"""Matrix and certificate file loading."""

import os
from typing import Callable, Dict, List, Optional, Tuple

from src.core.errors import ParseError, ShapeError
from src.core.exact_linalg import IntegerMatrix
from src.core.sparse_solver import Mode, SparseCertificate

try:
    import openpyxl
    EXCEL_AVAILABLE = True
except ImportError:
    EXCEL_AVAILABLE = False


def _strip_comment(line: str) -> str:
    return line.split("#", 1)[0].strip()


def _ints(path: str, lineno: int, text: str) -> List[int]:
    try:
        return [int(tok) for tok in text.split()]
    except ValueError:
        raise ParseError(path, lineno, f"expected integers, got {text!r}") from None


def parse_matrix_text(text: str, path: str = "<string>") -> IntegerMatrix:
    """
    Parse the matrix text format: a line `m n`, then m lines of n integers.
    Anything after `#` on a line is a comment; blank lines are ignored.
    """
    lines = [(i, _strip_comment(raw)) for i, raw in enumerate(text.splitlines(), start=1)]
    lines = [(i, s) for i, s in lines if s]
    if not lines:
        raise ParseError(path, None, "empty matrix file")

    head_line, head = lines[0]
    dims = _ints(path, head_line, head)
    if len(dims) != 2:
        raise ParseError(path, head_line, f"header must be `m n`, got {head!r}")
    m, n = dims
    if m < 1 or n < 1:
        raise ParseError(path, head_line, f"dimensions must be positive, got {m} x {n}")

    body = lines[1:]
    if len(body) != m:
        where = body[m][0] if len(body) > m else (body[-1][0] if body else head_line)
        raise ParseError(path, where, f"expected {m} matrix rows, found {len(body)}")
    rows = []
    for lineno, s in body:
        row = _ints(path, lineno, s)
        if len(row) != n:
            raise ParseError(path, lineno, f"expected {n} entries, found {len(row)}")
        rows.append(row)
    return IntegerMatrix(rows)


def load_matrix_xlsx(path: str, sheet: Optional[str] = None) -> IntegerMatrix:
    """Read integer cells of a worksheet (first sheet by default), one matrix row per sheet row."""
    if not EXCEL_AVAILABLE:
        raise ParseError(path, None, "openpyxl library not available for .xlsx input")
    workbook = openpyxl.load_workbook(path, read_only=True, data_only=True)
    try:
        ws = workbook[sheet] if sheet else workbook.worksheets[0]
        rows = []
        for r_idx, row in enumerate(ws.iter_rows(values_only=True), start=1):
            values = [v for v in row if v is not None]
            if not values:
                continue
            for v in values:
                if isinstance(v, bool) or not isinstance(v, int):
                    if isinstance(v, float) and v.is_integer():
                        continue
                    raise ParseError(path, r_idx, f"non-integer cell {v!r}")
            rows.append([int(v) for v in values])
    finally:
        workbook.close()
    if not rows:
        raise ParseError(path, None, "worksheet holds no matrix rows")
    try:
        return IntegerMatrix(rows)
    except ShapeError as e:
        raise ParseError(path, None, str(e)) from None


def load_matrix(
    path: str,
    log_callback: Optional[Callable[[str], None]] = None,
) -> IntegerMatrix:
    """Load a matrix from the text format, or from an .xlsx worksheet."""
    if not path or not os.path.exists(path):
        raise ParseError(str(path), None, "file not found")
    if path.lower().endswith(".xlsx"):
        matrix = load_matrix_xlsx(path)
    else:
        with open(path, "r", encoding="utf-8") as f:
            matrix = parse_matrix_text(f.read(), path)
    if log_callback:
        log_callback(f"Matrix loaded: {path} ({matrix.rows} x {matrix.cols})")
    return matrix


# ---------- Certificates ----------

_CERT_KEYS = ("b", "x", "support", "bound", "mode", "subcone")


def _split_records(text: str) -> List[List[Tuple[int, str]]]:
    records: List[List[Tuple[int, str]]] = []
    current: List[Tuple[int, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        s = _strip_comment(raw)
        if not raw.strip():
            if current:
                records.append(current)
                current = []
            continue
        if s:
            current.append((lineno, s))
    if current:
        records.append(current)
    return records


def _parse_certificate(path: str, record: List[Tuple[int, str]], n: int) -> SparseCertificate:
    fields: Dict[str, Tuple[int, str]] = {}
    for lineno, s in record:
        key, sep, value = s.partition(":")
        if not sep:
            raise ParseError(path, lineno, f"expected `key: value`, got {s!r}")
        fields[key.strip()] = (lineno, value.strip())

    first = record[0][0]
    status = fields.get("status", (first, "certificate"))
    if status[1] != "certificate":
        raise ParseError(path, status[0], f"record is not a certificate (status {status[1]})")
    missing = [k for k in _CERT_KEYS if k not in fields]
    if missing:
        raise ParseError(path, first, f"certificate record missing fields {missing}")

    b = tuple(_ints(path, *fields["b"]))
    x = [0] * n
    x_line, x_text = fields["x"]
    for tok in x_text.split():
        idx, sep, val = tok.partition(":")
        try:
            j, v = int(idx), int(val)
        except ValueError:
            raise ParseError(path, x_line, f"expected index:value, got {tok!r}") from None
        if not sep or j < 0 or j >= n:
            raise ParseError(path, x_line, f"bad entry {tok!r} for {n} columns")
        x[j] = v
    support = tuple(_ints(path, *fields["support"]))
    bound = _ints(path, *fields["bound"])
    subcone = _ints(path, *fields["subcone"])
    if len(bound) != 1 or len(subcone) != 1:
        raise ParseError(path, first, "bound and subcone take one integer each")
    mode_line, mode_text = fields["mode"]
    try:
        mode = Mode(mode_text)
    except ValueError:
        raise ParseError(path, mode_line, f"mode must be i or ii, got {mode_text!r}") from None
    return SparseCertificate(
        b=b, x=tuple(x), support=support, bound_claimed=bound[0], mode=mode, subcone_index=subcone[0],
    )


def load_certificates(path: str, n: int) -> List[SparseCertificate]:
    """Read every certificate record of a file, for a matrix with n columns."""
    if not path or not os.path.exists(path):
        raise ParseError(str(path), None, "file not found")
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    records = _split_records(text)
    if not records:
        raise ParseError(path, None, "no certificate records")
    return [_parse_certificate(path, rec, n) for rec in records]
