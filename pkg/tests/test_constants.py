from fractions import Fraction

import pytest

from cyclodiff.errors import InsufficientPrecision
from cyclodiff.tower import CyclotomicTower, TowerParams
from cyclodiff.constants import (
    cell_rng,
    different_drift,
    estimate_constants,
    galois_defect_cell,
    int_smith_valuations,
    kernel_shift,
    norm_cells,
    norm_congruence_cell,
    norm_witness_value,
    one_minus_galois_matrix,
    perp_basis_indices,
    trace_bound_cell,
)


@pytest.fixture(scope="module")
def t3():
    return CyclotomicTower(TowerParams(p=3, s=1, max_level=3, prec=24))


@pytest.fixture(scope="module")
def t2():
    return CyclotomicTower(TowerParams(p=2, s=2, max_level=3, prec=24))


@pytest.fixture(scope="module")
def rep3(t3):
    return estimate_constants(t3, seed=0, samples=40)


@pytest.fixture(scope="module")
def rep2(t2):
    return estimate_constants(t2, seed=0, samples=40)


def test_different_drift_is_zero(t3, t2):
    for tower in (t3, t2):
        a, b, drifts = different_drift(tower)
        assert a == 0 and b == 0
        assert all(d == 0 for d in drifts)


def test_norm_congruence_witness(t3, t2):
    assert norm_witness_value(t3) == Fraction(2, 3)
    assert norm_witness_value(t2) == Fraction(3, 4)


def test_norm_congruence_cells_frozen(rep3):
    values = dict(rep3.c_norm_cells)
    assert values[(0, 1)] == Fraction(2, 3)
    assert values[(1, 1)] == Fraction(8, 9)
    assert values[(2, 1)] == Fraction(26, 27)
    # deeper norms never drop below the one-step floor
    assert values[(0, 2)] == Fraction(2, 3)
    assert values[(0, 3)] == Fraction(2, 3)


def test_report_values_p3(rep3):
    assert rep3.a == 0 and rep3.b == 0
    assert rep3.c_norm == Fraction(2, 3)
    assert rep3.c_norm_witness == Fraction(2, 3)
    assert rep3.m_c == 0
    assert rep3.c2_star == 0
    assert rep3.c3_star == 1
    assert rep3.n_0 == 0
    assert rep3.n_1 == 2
    assert rep3.nopdiv_bound() == 2


def test_report_values_p2(rep2):
    assert rep2.c_norm == Fraction(3, 4)
    assert rep2.m_c == 1
    assert rep2.c2_star == 0
    assert rep2.c3_star == 1
    assert rep2.n_0 == 0
    assert rep2.n_1 == 3


def test_reports_are_deterministic(t3, rep3):
    again = estimate_constants(t3, seed=0, samples=40)
    assert again == rep3
    # a different seed still measures the same exact constants here, but the
    # cells are re-sampled; the invariant worth pinning is reproducibility
    assert cell_rng(0, "fonemb", 1, 1).random() == cell_rng(0, "fonemb", 1, 1).random()
    assert cell_rng(0, "fonemb", 1, 1).random() != cell_rng(1, "fonemb", 1, 1).random()


def test_norm_cells_enumeration(t3):
    cells = norm_cells(t3)
    assert (0, 3) in cells and (2, 1) in cells
    assert all(n + k <= 3 and k >= 1 for n, k in cells)


def test_trace_bound_cells_are_zero(t3):
    assert trace_bound_cell(t3, 0, 1) == 0
    assert trace_bound_cell(t3, 1, 2) == 0


def test_perp_basis_indices(t3, t2):
    assert perp_basis_indices(t3, 1) == [1, 2, 4, 5]
    assert perp_basis_indices(t2, 1) == [1, 3]


def test_one_minus_galois_matrix_frozen(t3):
    indices, cols = one_minus_galois_matrix(t3, 0, 1)
    assert indices == [1, 2, 4, 5]
    divs = int_smith_valuations(3, 4, cols, 20, "test")
    assert sorted(divs) == [0, 0, 1, 1]  # determinant valuation 2
    assert galois_defect_cell(t3, 0, 1) == 1


def test_int_smith_valuations_examples():
    assert int_smith_valuations(3, 2, [[3, 1], [0, 3]], 10, "t") == [0, 2]
    assert sorted(int_smith_valuations(3, 2, [[9, 0], [0, 3]], 10, "t")) == [1, 2]
    with pytest.raises(InsufficientPrecision):
        int_smith_valuations(3, 1, [[3 ** 12]], 4, "t")


def test_kernel_shift_zero(t3, t2):
    assert kernel_shift(t3) == 0
    assert kernel_shift(t2) == 0


def test_norm_congruence_cell_direct(t3):
    assert norm_congruence_cell(t3, 0, 1, seed=5, samples=10) == Fraction(2, 3)
