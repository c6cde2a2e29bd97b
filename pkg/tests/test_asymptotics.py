from dataclasses import replace
from fractions import Fraction

import pytest

from src.core.asymptotics import (
    EXHAUSTIVE,
    SAMPLED,
    box_points,
    density_sweep,
    ehrhart_count,
    gen_primorial,
    lemma4_counts,
    lemma4_lines,
    lemma4_ratio,
    primorial_density_bound,
    primorial_witnesses,
    sample_points,
    sigma_asy_estimate,
)
from src.core.errors import CapExceededError
from src.core.exact_linalg import IntegerMatrix, minor_stats, vec_sub
from src.core.sparse_solver import build_plan


# ---------- Sweeps ----------

def test_identity_sweep_counts(identity2):
    rows = density_sweep(build_plan(identity2), [3], k_list=[1, 2])
    row = rows[0]
    assert row.mode == EXHAUSTIVE
    assert row.n_box == 49
    assert row.n_feasible == 16
    assert row.n_covered == 16
    assert row.n_sigma_le == {1: 7, 2: 16}
    assert row.n_cert_le == {1: 7, 2: 16}
    assert row.ratio(2) == 1
    assert row.n_unknown == 0


def test_identity_sweep_estimate(identity2):
    rows = density_sweep(build_plan(identity2), [2, 3])
    estimate = sigma_asy_estimate(rows)
    assert estimate.k_hat == 2
    assert estimate.ratios[2] == (Fraction(1), Fraction(1))


def test_atilde_sweep_estimate(atilde):
    rows = density_sweep(build_plan(atilde), [6, 12])
    estimate = sigma_asy_estimate(rows)
    assert estimate.k_hat is not None and estimate.k_hat <= 3
    assert all(row.n_feasible == row.n_box for row in rows)


def test_sampled_sweep_is_reproducible(atilde):
    plan = build_plan(atilde)
    first = density_sweep(plan, [5, 30], cap_box=20, sample_size=40, seed=7)
    second = density_sweep(plan, [5, 30], cap_box=20, sample_size=40, seed=7, threads=2)
    assert [r.mode for r in first] == [EXHAUSTIVE, SAMPLED]
    assert first == second
    assert first[1].sample_size == 40 and first[1].seed == 7


def test_sample_points_depend_on_seed_and_t():
    a = sample_points(2, 10, 50, seed=1)
    assert a == sample_points(2, 10, 50, seed=1)
    assert a != sample_points(2, 10, 50, seed=2)
    assert all(-10 <= v <= 10 for b in a for v in b)


def test_sweep_rejects_bad_schedule(identity2):
    plan = build_plan(identity2)
    with pytest.raises(ValueError):
        density_sweep(plan, [3, 2])
    with pytest.raises(ValueError):
        density_sweep(plan, [])


def test_estimate_needs_two_rows(identity2):
    rows = density_sweep(build_plan(identity2), [2])
    with pytest.raises(ValueError):
        sigma_asy_estimate(rows)


def test_box_points_size():
    assert len(box_points(2, 3)) == 49
    assert box_points(1, 1) == [(-1,), (0,), (1,)]


# ---------- Lattice points ----------

@pytest.mark.parametrize("basis,generators,t,expected", [
    ([[1, 0], [0, 1]], [(1, 0), (0, 1)], 3, 16),
    ([[1, 0], [0, 1]], [(1, 0)], 5, 6),
    ([[2, 0], [0, 1]], [(2, 0), (0, 1)], 2, 9),
])
def test_ehrhart_examples(basis, generators, t, expected):
    assert ehrhart_count(IntegerMatrix(basis), generators, t) == expected


@pytest.mark.parametrize("m", [1, 2, 3])
@pytest.mark.parametrize("t", [0, 7, 20])
def test_ehrhart_unit_cube(m, t):
    identity = IntegerMatrix.identity(m)
    assert ehrhart_count(identity, identity.columns(), t) == (t + 1) ** m


def test_ehrhart_errors():
    with pytest.raises(CapExceededError):
        ehrhart_count(IntegerMatrix.identity(2), [(1, 0), (0, 1)], 100, cap=1000)
    with pytest.raises(ValueError):
        ehrhart_count(IntegerMatrix.identity(2), [(1, 1), (2, 2)], 3)


# ---------- Translated-subcone density ----------

def test_lemma4_identity(identity2):
    plan = build_plan(identity2)
    for t in (1, 5, 10):
        assert lemma4_ratio(plan, t) == 1


def test_lemma4_shifted_orthant(identity2):
    plan = build_plan(identity2)
    plan.plans[0] = replace(plan.plans[0], shift=(1, 1))
    assert lemma4_counts(plan, 10) == (100, 121)
    assert lemma4_ratio(plan, 10) == Fraction(100, 121)


def test_lemma4_stacked_increasing(stacked_a):
    plan = build_plan(stacked_a)
    ratios = [lemma4_ratio(plan, t) for t in (6, 12, 24)]
    # the strip 1 <= b_2 <= 3 is the only part of cone(A) left out
    assert ratios == [Fraction(2 * t - 2, 2 * t + 1) for t in (6, 12, 24)]
    assert ratios[0] < ratios[1] < ratios[2] <= 1


def test_lemma4_cap(identity2):
    with pytest.raises(CapExceededError):
        lemma4_ratio(build_plan(identity2), 50, cap=100)


def _scan_counts(plan, t):
    num = den = 0
    for b in box_points(plan.m, t):
        if not plan.lattice.contains(b) or not any(p.cone.contains(b) for p in plan.plans):
            continue
        den += 1
        if any(p.cone.contains(vec_sub(b, p.shift)) for p in plan.plans):
            num += 1
    return num, den


def test_lemma4_counts_match_point_scan(full_rank_suite):
    radius = {1: 40, 2: 12, 3: 4}
    suite = full_rank_suite[:9] + [IntegerMatrix([[2, 0, 2], [0, 2, 2]]), IntegerMatrix([[4, 6, -2]])]
    for a in suite:
        plan = build_plan(a)
        t = radius[a.rows]
        assert lemma4_counts(plan, t) == _scan_counts(plan, t)


def test_lemma4_lines():
    assert lemma4_lines(1, 100) == 1
    assert lemma4_lines(2, 3) == 7
    assert lemma4_lines(3, 3) == 49
    # one line per first coordinate, so a wide plane box stays cheap
    assert lemma4_counts(build_plan(IntegerMatrix.identity(2)), 5000, cap=10_001) == (5001 ** 2, 5001 ** 2)


# ---------- Primorial instances ----------

def test_gen_atilde():
    inst = gen_primorial("Atilde", 1, 2, (2, 3))
    assert inst.matrix == IntegerMatrix([[3, 2, -6]])
    assert inst.frobenius == 1
    assert inst.q == (3, 2)
    assert inst.delta == 6


def test_gen_stacked():
    inst = gen_primorial("A", 2, 2, (3, 2))
    assert inst.matrix == IntegerMatrix([[1, 0, 0, 0], [0, 3, 2, -6]])
    assert minor_stats(inst.matrix).phi_max == 2


def test_gen_b():
    inst = gen_primorial("B", 1, 4, (2, 3, 5, 7))
    assert inst.matrix == IntegerMatrix([
        [1, 0, 105, 70, 42, 30, -210],
        [1, 1, 0, 0, 0, 0, 0],
    ])
    assert minor_stats(inst.matrix).phi_min == 0


def test_gen_shapes():
    inst = gen_primorial("B", 2, 5, (2, 3, 5, 7, 11))
    assert inst.matrix.shape == (3, 2 * 2 + 1 + 5)
    inst = gen_primorial("A", 3, 2, (2, 3))
    assert inst.matrix.shape == (3, 5)


@pytest.mark.parametrize("kind,m,d,primes", [
    ("B", 1, 3, (2, 3, 5)),
    ("A", 1, 2, (2, 2)),
    ("A", 1, 2, (2, 4)),
    ("A", 1, 3, (2, 3)),
    ("C", 1, 2, (2, 3)),
])
def test_gen_rejects(kind, m, d, primes):
    with pytest.raises(ValueError):
        gen_primorial(kind, m, d, primes)


def test_primorial_witnesses():
    atilde = gen_primorial("Atilde", 1, 2, (2, 3))
    assert primorial_witnesses(atilde, 12) == [(-11,), (-5,)]
    stacked = gen_primorial("A", 2, 2, (2, 3))
    assert primorial_witnesses(stacked, 5) == [(h, -5) for h in range(1, 6)]
    b_inst = gen_primorial("B", 1, 4, (2, 3, 5, 7))
    assert primorial_witnesses(b_inst, 209) == [(-209, 0)]


def test_primorial_density_bound():
    assert primorial_density_bound(1, 6, 1) == Fraction(12, 13)
    assert primorial_density_bound(2, 6, 1) == Fraction(12, 13)
    assert primorial_density_bound(1, 6, 4) < 1
