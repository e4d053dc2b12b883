#
# SPDX-License-Identifier: GPL-2.0-only
#
# DESCRIPTION
# Cycle matrix of a warped signal, its SVD entropy, and angular
# synchronization of the cycles under cyclic shifts.
#
# Shift convention: shift l of row a relative to row b means
# np.roll(a, l) is closest to b.  A shift l is the rotation by
# 2 pi l / L in SO(2).
#

import logging

from dataclasses import dataclass

import numpy as np

from scipy import fft as sp_fft
from scipy import linalg

from iwc import DataError, NumericError

logger = logging.getLogger('iwc')

# above this many rows only a sparse random pair graph is compared
DENSE_PAIR_LIMIT = 500


@dataclass
class CycleMatrix:
    rows: np.ndarray
    row_spans: np.ndarray
    L: int

    def __post_init__(self):
        self.rows = np.asarray(self.rows, dtype=float)
        self.row_spans = np.asarray(self.row_spans, dtype=float)
        if self.rows.ndim != 2 or self.rows.shape[0] < 2:
            raise DataError("A cycle matrix needs at least 2 cycles, got %d" %
                            (self.rows.shape[0] if self.rows.ndim == 2 else 0))
        if self.rows.shape[1] != self.L:
            raise DataError("Cycle matrix rows have %d samples, expected %d" %
                            (self.rows.shape[1], self.L))
        if self.row_spans.shape != (self.rows.shape[0], 2):
            raise DataError("Need one (start, end) span per cycle")
        if not np.all(np.isfinite(self.rows)):
            raise DataError("Cycle matrix contains non-finite values")

    @property
    def P(self):
        return self.rows.shape[0]

    def select(self, index):
        return CycleMatrix(self.rows[index], self.row_spans[index], self.L)


@dataclass
class ShiftAssignment:
    shifts: np.ndarray
    reference_row: int = 0


def segment(warped, L=None):
    """
    Cut a warped signal into P = floor(len / L) unit-period rows; row
    spans are the original-time images of [k, k + 1).
    """
    fs = warped.signal.fs
    if L is None:
        L = int(round(fs))
    if abs(fs - L) > 1e-9 * L:
        raise DataError("%d samples per cycle does not match the warped grid "
                        "(%g samples per unit)" % (L, fs))
    n = len(warped.signal)
    if n < 2 * L:
        raise DataError("Warped signal of %d samples holds fewer than 2 cycles of %d" %
                        (n, L))
    P = n // L
    rows = warped.signal.samples[:P * L].reshape(P, L)
    bounds = warped.map.to_original(warped.signal.t0 + np.arange(P + 1))
    spans = np.column_stack((bounds[:-1], bounds[1:]))
    return CycleMatrix(rows, spans, L)


def trim_edges(matrix, edge_cycles):
    """Drop up to edge_cycles rows at each end, keeping at least 2."""
    edge = min(edge_cycles, (matrix.P - 2) // 2)
    if edge <= 0:
        return matrix
    return matrix.select(slice(edge, matrix.P - edge))


def svd_entropy(matrix):
    """Shannon entropy (nats) of the normalized singular values."""
    matrix = np.asarray(matrix, dtype=float)
    try:
        s = linalg.svdvals(matrix)
    except (linalg.LinAlgError, ValueError) as err:
        raise NumericError("SVD of the cycle matrix failed: %s" % err)
    if s.size == 0 or not np.isfinite(s[0]) or s[0] == 0:
        raise NumericError("SVD entropy of an all-zero matrix is undefined")
    s = s[s > max(matrix.shape) * np.finfo(float).eps * s[0]]
    p = s / s.sum()
    return float(-np.sum(p * np.log(p)))


def _best_shifts(a, b):
    """Row-wise best cyclic shift of a onto b; a and b are (n, L)."""
    L = a.shape[1]
    corr = sp_fft.irfft(np.conj(sp_fft.rfft(a, axis=1)) * sp_fft.rfft(b, axis=1),
                        n=L, axis=1)
    energy = np.sum(a ** 2, axis=1) + np.sum(b ** 2, axis=1)
    resid2 = energy[:, None] - 2 * corr
    tol = 1e-9 * energy[:, None] + 1e-12
    ties = resid2 <= resid2.min(axis=1, keepdims=True) + tol
    lags = np.arange(L)
    angle = np.minimum(lags, L - lags)
    # smallest angle first, then smaller lag
    rank = np.where(ties, angle * L + lags, np.iinfo(np.int64).max)
    return np.argmin(rank, axis=1)


def best_cyclic_shift(a, b):
    """
    Shift l in [0, L) minimizing |roll(a, l) - b|, with the residual.
    Ties go to the smallest angle min(l, L - l), then the smaller l.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise DataError("Cyclic shift needs two vectors of equal length")
    shift = int(_best_shifts(a[None, :], b[None, :])[0])
    return shift, float(np.linalg.norm(np.roll(a, shift) - b))


def fractional_roll(row, shift):
    """
    np.roll for a real shift in samples, by a phase ramp on the DFT;
    the Nyquist term of an even length keeps only its cosine part.
    """
    row = np.asarray(row, dtype=float)
    L = row.size
    spectrum = sp_fft.rfft(row)
    k = np.arange(spectrum.size)
    spectrum = spectrum * np.exp(-2j * np.pi * k * shift / L)
    if L % 2 == 0:
        spectrum[-1] = spectrum[-1].real
    return sp_fft.irfft(spectrum, n=L)


def _rotation(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def _pair_graph(P, seed):
    """All pairs, or chain edges plus ~P log P random pairs for large P."""
    if P <= DENSE_PAIR_LIMIT:
        i, j = np.triu_indices(P, k=1)
        return i, j
    rng = np.random.default_rng(seed)
    n_random = int(np.ceil(P * np.log(P)))
    i = rng.integers(0, P, size=n_random)
    j = rng.integers(0, P, size=n_random)
    keep = i != j
    pairs = np.column_stack((np.minimum(i, j)[keep], np.maximum(i, j)[keep]))
    chain = np.column_stack((np.arange(P - 1), np.arange(1, P)))
    pairs = np.unique(np.vstack((chain, pairs)), axis=0)
    return pairs[:, 0], pairs[:, 1]


def _round_half_to_zero(x):
    return np.sign(x) * np.ceil(np.abs(x) - 0.5)


def synchronize(matrix, reference_row=0, seed=0):
    """
    Align the rows of a cycle matrix by angular synchronization of
    their pairwise cyclic shifts.  Returns (aligned matrix, shifts);
    row i of the aligned matrix is np.roll(row_i, -shifts[i]).
    """
    P, L = matrix.P, matrix.L
    i, j = _pair_graph(P, seed)
    pair_shifts = _best_shifts(matrix.rows[i], matrix.rows[j])

    # block (i, j) is the rotation taking row i onto row j
    C = np.zeros((2 * P, 2 * P))
    for p in range(P):
        C[2 * p:2 * p + 2, 2 * p:2 * p + 2] = np.eye(2)
    for a, b, shift in zip(i, j, pair_shifts):
        block = _rotation(2 * np.pi * shift / L)
        C[2 * a:2 * a + 2, 2 * b:2 * b + 2] = block
        C[2 * b:2 * b + 2, 2 * a:2 * a + 2] = block.T

    degree = np.ones(P)
    np.add.at(degree, i, 1)
    np.add.at(degree, j, 1)
    scale = np.repeat(1.0 / np.sqrt(degree), 2)
    C = scale[:, None] * C * scale[None, :]

    try:
        _, Q = linalg.eigh(C, subset_by_index=[2 * P - 2, 2 * P - 1])
    except (linalg.LinAlgError, ValueError) as err:
        raise NumericError("Eigendecomposition failed during synchronization: %s" % err)

    rotations = np.empty((P, 2, 2))
    for p in range(P):
        u, _, vt = np.linalg.svd(Q[2 * p:2 * p + 2])
        rotations[p] = u @ vt

    # the common orthogonal factor cancels in R_p R_ref^T
    relative = rotations @ rotations[reference_row].T
    alpha = np.arctan2(relative[:, 0, 1], relative[:, 0, 0])
    shifts = _round_half_to_zero(L * alpha / (2 * np.pi)).astype(np.int64) % L
    shifts[reference_row] = 0

    aligned = np.stack([np.roll(row, -s) for row, s in zip(matrix.rows, shifts)])
    logger.debug("synchronized %d cycles over %d pairs", P, i.size)
    return (CycleMatrix(aligned, matrix.row_spans.copy(), L),
            ShiftAssignment(shifts=shifts, reference_row=reference_row))
