import pytest

from src.core.errors import ParseError
from src.core.exact_linalg import IntegerMatrix
from src.core.sparse_solver import Infeasible, Mode, SparseCertificate, Uncovered, build_plan, solve_sparse
from src.core.utils import atomic_write_text, parse_fraction, parse_int_list
from src.io.loader import load_certificates, load_matrix, parse_matrix_text
from src.io.report import (
    SWEEP_HEADERS,
    format_certificate,
    format_header,
    format_matrix,
    format_outcome,
    lemma4_csv,
    write_sweep_workbook,
)

openpyxl = pytest.importorskip("openpyxl")


# ---------- Matrix text format ----------

def test_parse_matrix_with_comments():
    text = "# stacked instance\n2 4\n\n1 0 0 0   # first row\n0 3 2 -6\n"
    assert parse_matrix_text(text) == IntegerMatrix([[1, 0, 0, 0], [0, 3, 2, -6]])


@pytest.mark.parametrize("text,line", [
    ("2 2\n1 0\n1 x\n", 3),
    ("2\n1 0\n", 1),
    ("2 2\n1 0\n1 2 3\n", 3),
    ("2 2\n1 0\n", 2),
])
def test_parse_matrix_errors_name_the_line(text, line):
    with pytest.raises(ParseError) as info:
        parse_matrix_text(text, "m.txt")
    assert info.value.line == line
    assert f"m.txt:{line}:" in str(info.value)


def test_parse_matrix_empty():
    with pytest.raises(ParseError):
        parse_matrix_text("# nothing here\n")


def test_format_matrix_roundtrip():
    m = IntegerMatrix([[3, 2, -6]])
    assert parse_matrix_text(format_matrix(m, ["Atilde"])) == m


def test_load_matrix_missing(tmp_path):
    with pytest.raises(ParseError):
        load_matrix(str(tmp_path / "absent.txt"))


def test_load_matrix_xlsx(tmp_path):
    path = tmp_path / "a.xlsx"
    wb = openpyxl.Workbook()
    ws = wb.active
    ws.append([1, 0, 0, 0])
    ws.append([0, 3, 2, -6])
    wb.save(path)
    assert load_matrix(str(path)) == IntegerMatrix([[1, 0, 0, 0], [0, 3, 2, -6]])


def test_load_matrix_xlsx_rejects_text(tmp_path):
    path = tmp_path / "bad.xlsx"
    wb = openpyxl.Workbook()
    wb.active.append([1, "two"])
    wb.save(path)
    with pytest.raises(ParseError):
        load_matrix(str(path))


# ---------- Certificates ----------

def test_certificate_file_roundtrip(tmp_path, stacked_a):
    cert = solve_sparse(build_plan(stacked_a), (5, 12))
    path = tmp_path / "cert.txt"
    path.write_text("# header\n" + format_certificate(cert), encoding="utf-8")
    loaded = load_certificates(str(path), stacked_a.cols)
    assert loaded == [cert]


def test_certificate_records_are_separated_by_blank_lines(tmp_path):
    cert = SparseCertificate(b=(3, 7), x=(3, 7), support=(0, 1), bound_claimed=2, mode=Mode.I, subcone_index=0)
    path = tmp_path / "certs.txt"
    path.write_text(format_certificate(cert) + "\n" + format_certificate(cert), encoding="utf-8")
    assert len(load_certificates(str(path), 2)) == 2


def test_infeasible_record_is_not_a_certificate(tmp_path):
    path = tmp_path / "inf.txt"
    path.write_text(format_outcome(Infeasible((1, 2), "lattice")), encoding="utf-8")
    with pytest.raises(ParseError, match="not a certificate"):
        load_certificates(str(path), 3)


def test_certificate_missing_fields(tmp_path):
    path = tmp_path / "partial.txt"
    path.write_text("b: 1 2\nx: 0:1\n", encoding="utf-8")
    with pytest.raises(ParseError, match="missing fields"):
        load_certificates(str(path), 2)


def test_certificate_bad_index(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("b: 1\nx: 7:1\nsupport: 7\nbound: 1\nmode: i\nsubcone: 0\n", encoding="utf-8")
    with pytest.raises(ParseError):
        load_certificates(str(path), 2)


def test_format_outcomes():
    assert format_outcome(Uncovered((0, 3))) == "status: uncovered\nb: 0 3\n"
    assert "reason: cone" in format_outcome(Infeasible((-1, 0), "cone"))


# ---------- Reports ----------

def test_format_header():
    header = format_header("sweep", 7, {"group": 10, "box": 5}, mode="ii", w=None)
    assert header.startswith("# sparsebound ")
    assert "command=sweep seed=7 caps=box=5,group=10 mode=ii" in header
    assert "w=" not in header


def test_lemma4_csv():
    text = lemma4_csv([(1, 4, 4), (2, 8, 9), (3, 15, 16)])
    lines = text.splitlines()
    assert lines[0] == "t,num,den,nondecreasing"
    assert lines[1] == "1,4,4,"
    assert lines[2] == "2,8,9,false"
    assert lines[3] == "3,15,16,true"


def test_write_sweep_workbook(tmp_path, identity2):
    from src.core.asymptotics import density_sweep

    rows = density_sweep(build_plan(identity2), [1, 2])
    path = tmp_path / "sweep.xlsx"
    assert write_sweep_workbook(str(path), rows, [(1, 4, 4), (2, 9, 9)], {"seed": 0}, k_hat=2)
    wb = openpyxl.load_workbook(path)
    assert wb.sheetnames == ["Sweep", "Lemma4", "RunConfig"]
    header = [c.value for c in wb["Sweep"][1]]
    assert header == SWEEP_HEADERS
    assert wb["Lemma4"]["D3"].value == "PASS"


# ---------- Utils ----------

def test_parse_int_list():
    assert parse_int_list("6, 12,24,") == [6, 12, 24]
    assert parse_int_list([1, "2"]) == [1, 2]
    assert parse_int_list(None) == []
    with pytest.raises(ValueError, match="t schedule"):
        parse_int_list("6,x", name="t schedule")


def test_parse_fraction():
    assert parse_fraction("1/100") == parse_fraction("0.01")
    with pytest.raises(ValueError):
        parse_fraction("1/0")


def test_atomic_write_text(tmp_path):
    path = tmp_path / "out" / "report.csv"
    atomic_write_text(str(path), "a,b\n")
    assert path.read_text(encoding="utf-8") == "a,b\n"
    assert [p.name for p in path.parent.iterdir()] == ["report.csv"]
