import pytest

from app import EXIT_USAGE, run
from src.config.manager import SparseBoundConfigManager
from src.core.exact_linalg import IntegerMatrix
from src.io.loader import parse_matrix_text
from src.main import EXIT_INFEASIBLE, EXIT_LIBRARY_ERROR, EXIT_OK, EXIT_UNCOVERED

STACKED = [[1, 0, 0, 0], [0, 3, 2, -6]]


@pytest.fixture
def cli(project_root, capsys):
    def _run(*argv):
        code = run(list(argv))
        captured = capsys.readouterr()
        return code, captured.out, captured.err

    return _run


# ---------- analyze ----------

def test_analyze_identity(cli, write_matrix):
    code, out, _ = cli("analyze", write_matrix([[1, 0], [0, 1]]))
    assert code == EXIT_OK
    assert "bound (i) m+phi_max: 2" in out
    assert "bound (ii) 2m+phi_min: 4" in out


def test_analyze_stacked(cli, write_matrix):
    code, out, _ = cli("analyze", write_matrix(STACKED))
    assert code == EXIT_OK
    assert "Delta: 2 3 6" in out
    assert "gram_det: 49" in out
    assert "bound (i) m+phi_max: 4" in out
    assert "bound (ii) 2m+phi_min: 5" in out
    assert out.startswith("# sparsebound ")


def test_analyze_w_subset(cli, write_matrix):
    code, out, _ = cli("analyze", write_matrix([[1, 0, 1], [0, 1, 1]]), "--w-cols", "0,1")
    assert code == EXIT_OK
    assert "cone(A) == cone(W): true" in out


def test_analyze_rank_deficient(cli, write_matrix):
    code, _, err = cli("analyze", write_matrix([[1, 2], [2, 4]]))
    assert code == EXIT_LIBRARY_ERROR
    assert "matrix not full row rank" in err


def test_analyze_w_subset_reports_gram_bound_of_a(cli, write_matrix):
    code, out, _ = cli("analyze", write_matrix([[1, 0, 1], [0, 1, 1]]), "--w-cols", "0,1")
    assert code == EXIT_OK
    lines = out.splitlines()
    # det(A A^T) = 3 while the chosen W is the identity
    assert "gram_det: 3" in lines
    assert "W gram_det: 1" in lines
    assert "W Delta: 1" in lines
    assert "m+log2(sqrt(gram_det)/g) in [1429/512, 715/256]" in lines


def test_analyze_writes_out(cli, write_matrix, tmp_path):
    out_path = tmp_path / "analyze.txt"
    code, out, _ = cli("analyze", write_matrix(STACKED), "--out", str(out_path))
    assert code == EXIT_OK
    assert "gram_det" not in out
    assert "gram_det: 49" in out_path.read_text(encoding="utf-8")


def test_parse_error_names_line(cli, tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("2 2\n1 0\n1 x\n", encoding="utf-8")
    code, _, err = cli("analyze", str(path))
    assert code == EXIT_LIBRARY_ERROR
    assert f"{path}:3:" in err


# ---------- solve / verify ----------

def test_solve_identity(cli, write_matrix):
    code, out, err = cli("solve", write_matrix([[1, 0], [0, 1]]), "--b=3,7")
    assert code == EXIT_OK
    assert "status: certificate" in out
    assert "x: 0:3 1:7" in out
    assert "[TIMING]" in err


def test_solve_negative_b_after_flag(cli, write_matrix):
    code, out, _ = cli("solve", write_matrix(STACKED), "--b", "-1,5")
    assert code == EXIT_INFEASIBLE
    assert "status: infeasible" in out
    assert "b: -1 5" in out


def test_usage_error_is_not_an_outcome(cli, write_matrix):
    code, _, err = cli("solve", write_matrix(STACKED))
    assert code == EXIT_USAGE
    assert code > EXIT_UNCOVERED
    assert "--b" in err


def test_solve_infeasible(cli, write_matrix):
    code, out, _ = cli("solve", write_matrix([[2, 0, 2], [0, 2, 2]]), "--b=1,2")
    assert code == EXIT_INFEASIBLE
    assert "reason: lattice" in out


def test_solve_uncovered(cli, write_matrix):
    code, out, _ = cli("solve", write_matrix(STACKED), "--b=0,3")
    assert code == EXIT_UNCOVERED
    assert "status: uncovered" in out


def test_solve_mode_ii(cli, write_matrix):
    code, out, _ = cli("solve", write_matrix(STACKED), "--b=5,12", "--mode", "ii")
    assert code == EXIT_OK
    assert "mode: ii" in out
    assert "bound: 5" in out


def test_plan_cache_reused(cli, write_matrix):
    import src.main as main

    path = write_matrix(STACKED)
    cli("solve", path, "--b=5,12")
    main._PLAN_CACHE.clear()
    code, _, err = cli("solve", path, "--b=5,12")
    assert code == EXIT_OK
    assert "Plan cache hit" in err


def test_solve_then_verify(cli, write_matrix, tmp_path):
    matrix = write_matrix(STACKED)
    cert = tmp_path / "cert.txt"
    assert cli("solve", matrix, "--b=5,12", "--out", str(cert))[0] == EXIT_OK
    code, out, _ = cli("verify", matrix, str(cert))
    assert code == EXIT_OK
    assert "verified: 1/1" in out

    cert.write_text(cert.read_text(encoding="utf-8").replace("bound: 3", "bound: 1"), encoding="utf-8")
    code, out, _ = cli("verify", matrix, str(cert))
    assert code == EXIT_INFEASIBLE
    assert "record 0: FAIL" in out


def test_verify_writes_out(cli, write_matrix, tmp_path):
    matrix = write_matrix(STACKED)
    cert = tmp_path / "cert.txt"
    report = tmp_path / "verify.txt"
    cli("solve", matrix, "--b=5,12", "--out", str(cert))
    code, out, _ = cli("verify", matrix, str(cert), "--out", str(report))
    assert code == EXIT_OK
    assert "verified" not in out
    assert "verified: 1/1" in report.read_text(encoding="utf-8")


# ---------- sigma ----------

def test_sigma_atilde(cli, write_matrix):
    code, out, _ = cli("sigma", write_matrix([[3, 2, -6]]), "--b=-5")
    assert code == EXIT_OK
    assert "sigma: 3" in out
    assert "status: exact" in out


def test_sigma_negative_b_after_flag(cli, write_matrix):
    code, out, _ = cli("sigma", write_matrix([[3, 2, -6]]), "--b", "-5")
    assert code == EXIT_OK
    assert "sigma: 3" in out


def test_sigma_infinite(cli, write_matrix):
    code, out, _ = cli("sigma", write_matrix([[2]]), "--b=3")
    assert code == EXIT_INFEASIBLE
    assert "sigma: inf" in out


def test_sigma_unknown_on_cap(cli, write_matrix):
    code, out, _ = cli("sigma", write_matrix([[3, 2, -6]]), "--b=-5", "--cap-oracle", "1")
    assert code == EXIT_UNCOVERED
    assert "status: unknown" in out
    assert "sigma: unknown (between 3 and ?)" in out


# ---------- gen ----------

def test_gen_atilde(cli, tmp_path):
    out_path = tmp_path / "atilde.txt"
    code, _, _ = cli("gen", "Atilde", "--d", "2", "--primes", "2,3", "--out", str(out_path))
    assert code == EXIT_OK
    text = out_path.read_text(encoding="utf-8")
    assert parse_matrix_text(text) == IntegerMatrix([[3, 2, -6]])
    assert "# frobenius: 1" in text
    assert "density bound k=2" in text


def test_gen_b_witnesses(cli):
    code, out, _ = cli("gen", "B", "--m", "1", "--d", "4", "--primes", "2,3,5,7", "--witnesses", "209")
    assert code == EXIT_OK
    assert "1 0 105 70 42 30 -210" in out
    assert "# b: -209 0" in out


def test_gen_invalid(cli):
    code, _, err = cli("gen", "B", "--d", "3", "--primes", "2,3,5")
    assert code == EXIT_LIBRARY_ERROR
    assert "d >= m + 3" in err


# ---------- sweep / lemma4 ----------

def test_sweep_csv(cli, write_matrix):
    code, out, _ = cli("sweep", write_matrix([[1, 0], [0, 1]]), "--t-schedule", "1,2,3")
    assert code == EXIT_OK
    lines = out.splitlines()
    assert "t,mode,n_box,n_feasible,n_covered,k,n_sigma_le_k,ratio_num,ratio_den,n_cert_le_k,n_unknown" in lines
    assert "3,exhaustive,49,16,16,2,16,1,1,16,0" in lines
    assert "3,exhaustive,49,16,16,1,7,7,16,7,0" in lines
    assert any(line.startswith("# sigma_asy estimate (not a proof): k_hat=2") for line in lines)


def test_sweep_records(cli, write_matrix):
    code, out, _ = cli("sweep", write_matrix([[1, 0], [0, 1]]), "--t-schedule", "1,2", "--format", "records")
    assert code == EXIT_OK
    assert "n_feasible: 9" in out


def test_sweep_xlsx(cli, write_matrix, tmp_path):
    openpyxl = pytest.importorskip("openpyxl")
    out_path = tmp_path / "sweep.xlsx"
    code, _, _ = cli(
        "sweep", write_matrix([[1, 0], [0, 1]]), "--t-schedule", "1,2",
        "--format", "xlsx", "--out", str(out_path),
    )
    assert code == EXIT_OK
    assert openpyxl.load_workbook(out_path).sheetnames == ["Sweep", "Lemma4", "RunConfig"]


def test_sweep_xlsx_needs_out(cli, write_matrix):
    code, _, err = cli("sweep", write_matrix([[1, 0], [0, 1]]), "--format", "xlsx")
    assert code == EXIT_LIBRARY_ERROR
    assert "--out" in err


def test_lemma4(cli, write_matrix):
    code, out, _ = cli("lemma4", write_matrix([[1, 0], [0, 1]]), "--t-schedule", "1,2")
    assert code == EXIT_OK
    lines = out.splitlines()
    assert "1,4,4," in lines
    assert "2,9,9,true" in lines


# ---------- profiles ----------

def test_unknown_profile_rejected(cli, write_matrix):
    code, _, err = cli("--config", "nosuch", "analyze", write_matrix([[1, 0], [0, 1]]))
    assert code == EXIT_LIBRARY_ERROR
    assert "unknown config profile 'nosuch'" in err


def test_profile_is_remembered(cli, write_matrix, project_root):
    config_dir = project_root / "config"
    config_dir.mkdir(exist_ok=True)
    (config_dir / "desk.json").write_text('{"cap_box": 5000}', encoding="utf-8")
    code, out, _ = cli("--config", "desk", "analyze", write_matrix([[1, 0], [0, 1]]))
    assert code == EXIT_OK
    assert "box=5000" in out
    assert SparseBoundConfigManager().config_name == "desk"
