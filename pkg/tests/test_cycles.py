#
# SPDX-License-Identifier: GPL-2.0-only
#

import numpy as np
import pytest

from iwc import DataError, NumericError
from iwc import cycles
from iwc.cycles import CycleMatrix
from iwc.signal_model import Signal, sample_wsf
from iwc.warping import WarpMap, WarpedSignal


def identity_warped(samples, per_cycle):
    n = len(samples)
    tau = np.arange(n) / per_cycle
    return WarpedSignal(Signal(samples, per_cycle), WarpMap(tau, 1.0 / per_cycle))


def shifted_rows(L, shifts):
    base = sample_wsf((1.0, 0.6, 0.0, 0.3), L) + 0.4 * np.sin(2 * np.pi * np.arange(L) / L)
    rows = np.stack([np.roll(base, s) for s in shifts])
    return CycleMatrix(rows, np.column_stack((np.arange(len(shifts)),
                                              np.arange(1, len(shifts) + 1))), L)


def test_segment_rows_and_spans():
    warped = identity_warped(np.arange(55, dtype=float), 10)
    matrix = cycles.segment(warped)
    assert matrix.P == 5
    assert matrix.L == 10
    assert np.array_equal(matrix.rows[1], np.arange(10, 20))
    assert np.allclose(matrix.row_spans, np.column_stack((np.arange(5), np.arange(1, 6))))


def test_segment_errors():
    warped = identity_warped(np.zeros(55), 10)
    with pytest.raises(DataError):
        cycles.segment(warped, 12)
    with pytest.raises(DataError):
        cycles.segment(identity_warped(np.zeros(15), 10))


def test_trim_edges_keeps_two_rows():
    matrix = CycleMatrix(np.eye(6), np.column_stack((np.arange(6), np.arange(1, 7))), 6)
    assert cycles.trim_edges(matrix, 2).P == 2
    assert cycles.trim_edges(matrix, 1).P == 4
    assert cycles.trim_edges(matrix, 5).P == 2
    assert cycles.trim_edges(matrix, 0) is matrix


def test_svd_entropy():
    assert cycles.svd_entropy(np.outer(np.arange(1, 5), np.ones(8))) == pytest.approx(0.0)
    assert cycles.svd_entropy(np.eye(4)) == pytest.approx(np.log(4))
    assert cycles.svd_entropy(np.diag([3.0, 1.0])) == pytest.approx(0.5623, abs=1e-4)
    with pytest.raises(NumericError):
        cycles.svd_entropy(np.zeros((3, 3)))
    with pytest.raises(NumericError):
        cycles.svd_entropy(np.array([[1.0, np.nan], [0.0, 1.0]]))


def test_best_cyclic_shift():
    a = sample_wsf((1.0, 0.5, 0.2), 40) + 0.3 * np.sin(2 * np.pi * np.arange(40) / 40)
    shift, residual = cycles.best_cyclic_shift(a, np.roll(a, 7))
    assert shift == 7
    assert residual == pytest.approx(0.0, abs=1e-9)
    shift, _ = cycles.best_cyclic_shift(a, np.roll(a, -3))
    assert shift == 37


def test_best_cyclic_shift_ties_prefer_zero():
    shift, residual = cycles.best_cyclic_shift(np.ones(10), np.ones(10))
    assert shift == 0
    assert residual == pytest.approx(0.0)


def test_synchronize_recovers_shifts():
    shifts = [0, 5, 17, 3, 49, 22, 30, 11, 8, 40, 2, 26]
    matrix = shifted_rows(50, shifts)
    aligned, assignment = cycles.synchronize(matrix)
    expected = (np.array(shifts) - shifts[0]) % 50
    assert np.array_equal(assignment.shifts, expected)
    assert assignment.reference_row == 0
    assert np.allclose(aligned.rows, matrix.rows[0])
    assert np.array_equal(aligned.row_spans, matrix.row_spans)


def test_synchronize_other_reference():
    shifts = [4, 9, 0, 13]
    matrix = shifted_rows(20, shifts)
    aligned, assignment = cycles.synchronize(matrix, reference_row=2)
    assert np.array_equal(assignment.shifts, np.array(shifts) % 20)
    assert np.allclose(aligned.rows, matrix.rows[2])


def test_synchronize_sparse_graph():
    rng = np.random.default_rng(0)
    shifts = rng.integers(0, 20, size=600)
    matrix = shifted_rows(20, shifts)
    aligned, assignment = cycles.synchronize(matrix, seed=3)
    assert np.array_equal(assignment.shifts, (shifts - shifts[0]) % 20)
    assert np.allclose(aligned.rows, matrix.rows[0])


def test_synchronize_lowers_entropy():
    rng = np.random.default_rng(1)
    matrix = shifted_rows(64, rng.integers(0, 64, size=30))
    noisy = CycleMatrix(matrix.rows + 0.05 * rng.standard_normal(matrix.rows.shape),
                        matrix.row_spans, 64)
    aligned, _ = cycles.synchronize(noisy)
    assert cycles.svd_entropy(aligned.rows) < cycles.svd_entropy(noisy.rows)


def test_cycle_matrix_validation():
    with pytest.raises(DataError):
        CycleMatrix(np.zeros((1, 4)), np.zeros((1, 2)), 4)
    with pytest.raises(DataError):
        CycleMatrix(np.zeros((3, 4)), np.zeros((3, 2)), 5)


def test_fractional_roll():
    row = sample_wsf((1.0, 0.5, 0.2), 40)
    assert np.allclose(cycles.fractional_roll(row, 7), np.roll(row, 7))
    t = np.arange(40) / 40
    half = cycles.fractional_roll(np.cos(2 * np.pi * t), 0.5)
    assert np.allclose(half, np.cos(2 * np.pi * (t - 0.5 / 40)))


def test_synchronization_recovers_random_ensembles():
    rng = np.random.default_rng(2024)
    for _ in range(200):
        P = int(rng.integers(5, 51))
        L = int(rng.integers(50, 401))
        t = np.arange(L) / L
        # a generic shape without cyclic symmetry
        base = sum(rng.standard_normal() * np.cos(2 * np.pi * k * t + rng.uniform(0, 2 * np.pi))
                   for k in range(1, 6))
        shifts = rng.integers(0, L, size=P)
        matrix = CycleMatrix(np.stack([np.roll(base, s) for s in shifts]),
                             np.column_stack((np.arange(P), np.arange(1, P + 1))), L)
        aligned, assignment = cycles.synchronize(matrix)
        assert np.array_equal(assignment.shifts, (shifts - shifts[0]) % L)
        assert cycles.svd_entropy(aligned.rows) < 1e-8
