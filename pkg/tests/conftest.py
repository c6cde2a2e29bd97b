"""Shared fixtures: the small primorial matrices and seeded random suites."""

import numpy as np
import pytest

from src.core.exact_linalg import IntegerMatrix, det, rank

STACKED_A = [[1, 0, 0, 0], [0, 3, 2, -6]]
ATILDE = [[3, 2, -6]]


@pytest.fixture
def stacked_a() -> IntegerMatrix:
    return IntegerMatrix(STACKED_A)


@pytest.fixture
def atilde() -> IntegerMatrix:
    return IntegerMatrix(ATILDE)


@pytest.fixture
def identity2() -> IntegerMatrix:
    return IntegerMatrix.identity(2)


@pytest.fixture
def rng():
    return np.random.default_rng(20240517)


def _random_full_rank(rng, m: int, n: int, bound: int = 5) -> IntegerMatrix:
    while True:
        a = IntegerMatrix(rng.integers(-bound, bound + 1, size=(m, n)).tolist())
        if rank(a) == m:
            return a


def _random_invertible(rng, m: int, max_det: int, bound: int = 5) -> IntegerMatrix:
    while True:
        w = IntegerMatrix(rng.integers(-bound, bound + 1, size=(m, m)).tolist())
        if 0 < abs(det(w)) <= max_det:
            return w


@pytest.fixture
def full_rank_suite(rng):
    """25 full-row-rank matrices, m in {1,2,3}, n <= 6, entries in [-5, 5]."""
    suite = []
    for i in range(25):
        m = 1 + i % 3
        n = int(rng.integers(m + 1, 7))
        suite.append(_random_full_rank(rng, m, n))
    return suite


@pytest.fixture
def invertible_suite(rng):
    """100 invertible W with |det W| <= 200."""
    return [_random_invertible(rng, 1 + i % 3, 200) for i in range(100)]


@pytest.fixture
def project_root(tmp_path, monkeypatch):
    """Point config, state and plan cache at a temporary project root."""
    import src.config.manager as manager
    import src.main as main

    monkeypatch.setattr(manager, "_get_project_root", lambda: str(tmp_path))
    monkeypatch.setattr(main, "_get_project_root", lambda: str(tmp_path))
    monkeypatch.delenv("SPARSEBOUND_THREADS", raising=False)
    main._PLAN_CACHE.clear()
    return tmp_path


@pytest.fixture
def write_matrix(tmp_path):
    """Write rows in the matrix text format and return the path."""

    def _write(rows, name: str = "matrix.txt") -> str:
        path = tmp_path / name
        lines = [f"{len(rows)} {len(rows[0])}"] + [" ".join(str(v) for v in r) for r in rows]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return str(path)

    return _write
