#
# SPDX-License-Identifier: GPL-2.0-only
#
# DESCRIPTION
# Clustering of cycle matrices: k-means with k chosen by the
# Calinski-Harabasz criterion, per-cluster median and trigonometric
# regression WSFs, and change points at label jumps.
#

import logging
import warnings

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from scipy import fft as sp_fft
from sklearn.cluster import KMeans
from sklearn.exceptions import ConvergenceWarning
from sklearn.metrics import calinski_harabasz_score

from iwc import ConfigError, DataError
from iwc.cycles import fractional_roll

logger = logging.getLogger('iwc')

# residual fraction accepted by the harmonic count rule
HARMONIC_RESIDUAL_THRESHOLD = 0.05

# row dispersion below this fraction of row energy means one cluster
IDENTICAL_ROWS_TOLERANCE = 1e-6

# fundamental magnitude below this fraction of the row norm has no phase
PHASE_MAGNITUDE_TOLERANCE = 1e-9

CLUSTER_FEATURES = ("harmonics", "rows")


@dataclass
class WsfFit:
    """
    Trigonometric regression sum_k a_k cos(2 pi k t) + b_k sin(2 pi k t)
    of a median shifted so its fundamental has zero phase; the median
    itself is the fit evaluated at t + shift.
    """
    a: np.ndarray
    b: np.ndarray
    rms: float
    shift: float = 0.0

    @property
    def K(self):
        return self.a.size

    def evaluate(self, length, on_median=False):
        offset = self.shift if on_median else 0.0
        return trig_basis(length, self.K, offset) @ np.concatenate((self.a, self.b))

    def to_dict(self):
        return {"a": self.a.tolist(), "b": self.b.tolist(), "K": self.K,
                "rms": self.rms, "shift": self.shift}


@dataclass
class ClusterResult:
    labels: np.ndarray
    k: int
    medians: np.ndarray
    wsf_regressions: List[WsfFit]
    change_points: np.ndarray
    ch_scores: dict = field(default_factory=dict)
    # cycle-start change points, before any sub-cycle refinement
    cycle_change_points: Optional[np.ndarray] = None


def kmeans(data, k, replicates=50, seed=0):
    """
    Best-of-replicates Lloyd k-means with k-means++ seeding.  Labels are
    renumbered in order of first appearance.  Returns
    (labels, centers, within_ss).
    """
    data = np.asarray(data, dtype=float)
    if data.ndim == 1:
        data = data[:, None]
    if k < 1 or replicates < 1:
        raise ConfigError("k and replicates must be >= 1, got %r and %r" %
                          (k, replicates))
    if k > data.shape[0]:
        raise DataError("Cannot form %d clusters from %d rows" % (k, data.shape[0]))

    model = KMeans(n_clusters=k, init="k-means++", n_init=replicates,
                   random_state=seed, algorithm="lloyd")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", category=ConvergenceWarning)
        model.fit(data)

    _, first = np.unique(model.labels_, return_index=True)
    order = model.labels_[np.sort(first)]
    relabel = np.empty(k, dtype=int)
    relabel[order] = np.arange(order.size)
    labels = relabel[model.labels_]
    centers = model.cluster_centers_[order]
    return labels, centers, float(model.inertia_)


def select_k(data, k_max=8, replicates=50, seed=0, ch_floor=10.0, min_cluster_size=2):
    """
    Number of clusters maximizing the Calinski-Harabasz score over
    2..k_max; 1 if the rows are identical or the best score is below
    ch_floor.  Candidates with a cluster smaller than min_cluster_size
    are skipped.
    """
    k, _ = _select_k(data, k_max, replicates, seed, ch_floor, min_cluster_size)
    return k


def _select_k(data, k_max, replicates, seed, ch_floor, min_cluster_size):
    data = np.asarray(data, dtype=float)
    P = data.shape[0]
    k_max = min(k_max, P - 1)
    if k_max < 2:
        return 1, {}

    spread = np.sum((data - data.mean(axis=0)) ** 2)
    if spread <= IDENTICAL_ROWS_TOLERANCE * np.sum(data ** 2):
        logger.debug("rows are identical, k=1")
        return 1, {}

    scores = {}
    for k in range(2, k_max + 1):
        labels, _, _ = kmeans(data, k, replicates, seed)
        if np.bincount(labels, minlength=k).min() < min_cluster_size:
            continue
        scores[k] = float(calinski_harabasz_score(data, labels))

    if not scores:
        return 1, scores
    best = max(scores, key=lambda k: (scores[k], -k))
    logger.debug("Calinski-Harabasz scores %s", scores)
    if scores[best] < ch_floor:
        return 1, scores
    return best, scores


def trig_basis(length, K, offset=0.0):
    t = np.arange(length) / length + offset
    k = np.arange(1, K + 1)
    arg = 2 * np.pi * np.outer(t, k)
    return np.hstack((np.cos(arg), np.sin(arg)))


def trig_regression(median, K):
    """Least-squares fit of K harmonics, no intercept."""
    median = np.asarray(median, dtype=float)
    if not 1 <= K < median.size / 2:
        raise ConfigError("Harmonic count must be in [1, L/2), got %r" % K)
    basis = trig_basis(median.size, K)
    coeffs, _, _, _ = np.linalg.lstsq(basis, median, rcond=None)
    rms = float(np.sqrt(np.mean((median - basis @ coeffs) ** 2)))
    return WsfFit(a=coeffs[:K], b=coeffs[K:], rms=rms)


def harmonic_features(rows, harmonics):
    """
    Isometric coordinates of each row projected on its mean and the
    given harmonics: Euclidean distances between features equal the
    distances between the rows restricted to those harmonics.
    """
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    L = rows.shape[1]
    harmonics = np.asarray(harmonics, dtype=int)
    if harmonics.size == 0 or harmonics.min() < 1 or 2 * harmonics.max() >= L:
        raise ConfigError("Harmonics must lie in [1, L/2) for rows of %d samples" % L)
    spectrum = sp_fft.rfft(rows, axis=1)
    scale = np.sqrt(2.0 / L)
    return np.hstack((spectrum[:, :1].real / np.sqrt(L),
                      scale * spectrum[:, harmonics].real,
                      scale * spectrum[:, harmonics].imag))


def align_fundamental_phase(median):
    """
    Circularly shift a periodic profile (by a fraction of a sample when
    needed) so its fundamental is a pure cosine with a positive
    coefficient.  Returns (shifted, s) with shifted(t) = median(t - s),
    s in cycles.  Profiles without a fundamental are returned unchanged.
    """
    median = np.asarray(median, dtype=float)
    L = median.size
    if L < 3:
        return median.copy(), 0.0
    fundamental = sp_fft.rfft(median)[1]
    if abs(fundamental) <= PHASE_MAGNITUDE_TOLERANCE * np.sqrt(L) * np.linalg.norm(median):
        return median.copy(), 0.0
    shift = float(np.angle(fundamental)) / (2 * np.pi)
    return fractional_roll(median, shift * L), shift


def select_harmonic_count(median, K_max=10):
    """
    Smallest K whose residual energy fraction plus 2K/L is below 5%;
    when none qualifies, the K minimizing L log(r_K) + 2K log(L).
    """
    median = np.asarray(median, dtype=float)
    L = median.size
    if not 1 <= K_max < L / 2:
        raise ConfigError("K_max must be in [1, L/2), got %r for L=%d" % (K_max, L))
    energy = np.sum(median ** 2)
    if energy == 0:
        return 1

    residuals = []
    for K in range(1, K_max + 1):
        fit = trig_regression(median, K)
        r = L * fit.rms ** 2 / energy
        if r + 2.0 * K / L < HARMONIC_RESIDUAL_THRESHOLD:
            return K
        residuals.append(max(r, np.finfo(float).tiny))

    K = np.arange(1, K_max + 1)
    bic = L * np.log(residuals) + 2 * K * np.log(L)
    return int(K[np.argmin(bic)])


def estimate_wsfs(matrix, labels, K_max=10):
    """
    Per-cluster pointwise medians and the trigonometric regressions of
    the medians put at zero fundamental phase.
    """
    labels = np.asarray(labels)
    if labels.size != matrix.P:
        raise DataError("Got %d labels for %d cycles" % (labels.size, matrix.P))
    k = int(labels.max()) + 1
    medians = np.empty((k, matrix.L))
    fits = []
    for cluster in range(k):
        members = matrix.rows[labels == cluster]
        if members.shape[0] == 0:
            raise DataError("Cluster %d is empty" % cluster)
        medians[cluster] = np.median(members, axis=0)
        aligned, shift = align_fundamental_phase(medians[cluster])
        K = select_harmonic_count(aligned, K_max)
        fit = trig_regression(aligned, K)
        fit.shift = shift
        fits.append(fit)
    return medians, fits


def change_points(labels, row_spans):
    """Start times of the cycles whose label differs from the previous one."""
    labels = np.asarray(labels)
    row_spans = np.asarray(row_spans, dtype=float)
    if labels.size != row_spans.shape[0]:
        raise DataError("Got %d labels for %d spans" % (labels.size, row_spans.shape[0]))
    jumps = np.flatnonzero(labels[1:] != labels[:-1]) + 1
    return row_spans[jumps, 0]


def refine_change_points(rows, row_spans, labels, medians, shifts=None):
    """
    Place each label jump inside the two cycles around it: the pair is
    fit by the old label's median up to a split sample and by the new
    label's median after it, and the split is mapped linearly into the
    cycle's span.  shifts[i] rolls the medians onto row i when the
    medians come from synchronized rows.
    """
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    row_spans = np.asarray(row_spans, dtype=float)
    labels = np.asarray(labels)
    medians = np.atleast_2d(np.asarray(medians, dtype=float))
    P, L = rows.shape
    if labels.size != P or row_spans.shape[0] != P:
        raise DataError("Got %d labels and %d spans for %d cycles" %
                        (labels.size, row_spans.shape[0], P))
    if medians.shape[1] != L or labels.max() >= medians.shape[0]:
        raise DataError("Medians do not match the labels and cycle length")
    if shifts is None:
        shifts = np.zeros(P, dtype=int)

    points = []
    for p in np.flatnonzero(labels[1:] != labels[:-1]) + 1:
        pair = rows[p - 1:p + 1].ravel()
        before = np.concatenate([np.roll(medians[labels[p - 1]], shifts[i])
                                 for i in (p - 1, p)])
        after = np.concatenate([np.roll(medians[labels[p]], shifts[i])
                                for i in (p - 1, p)])
        # split at m: old median on [0, m), new one on [m, 2L)
        cost_before = np.concatenate(([0.0], np.cumsum((pair - before) ** 2)))
        cost_after = np.concatenate(([0.0], np.cumsum((pair - after) ** 2)))
        m = int(np.argmin(cost_before + cost_after[-1] - cost_after))
        if m == 2 * L:
            points.append(row_spans[p, 1])
            continue
        row = p - 1 + m // L
        start, end = row_spans[row]
        points.append(start + (m % L) / L * (end - start))
    return np.asarray(points, dtype=float)


def cluster_cycles(matrix, k_max=8, replicates=50, seed=0, ch_floor=10.0,
                   min_cluster_size=2, harmonic_count_max=10, features="harmonics"):
    """
    Select k, cluster the rows, and estimate WSFs and change points.
    With features="harmonics" k-means runs on the rows restricted to
    their mean and first harmonic_count_max harmonics, with "rows" on
    the raw rows.  Medians always come from the raw rows.
    """
    if features == "harmonics":
        harmonics = np.arange(1, min(harmonic_count_max, (matrix.L - 1) // 2) + 1)
        data = harmonic_features(matrix.rows, harmonics)
    elif features == "rows":
        data = matrix.rows
    else:
        raise ConfigError("Cluster features must be one of %s, got %r" %
                          (", ".join(CLUSTER_FEATURES), features))
    k, scores = _select_k(data, k_max, replicates, seed, ch_floor, min_cluster_size)
    labels, _, _ = kmeans(data, k, replicates, seed)
    medians, fits = estimate_wsfs(matrix, labels, harmonic_count_max)
    points = change_points(labels, matrix.row_spans)
    logger.info("Found %d clusters and %d change points", k, points.size)
    return ClusterResult(labels=labels, k=k, medians=medians, wsf_regressions=fits,
                         change_points=points, ch_scores=scores,
                         cycle_change_points=points)
