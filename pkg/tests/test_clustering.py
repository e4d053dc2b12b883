#
# SPDX-License-Identifier: GPL-2.0-only
#

import numpy as np
import pytest

from sklearn.cluster import KMeans

from iwc import ConfigError, DataError
from iwc import clustering
from iwc.cycles import CycleMatrix
from iwc.signal_model import sample_wsf


def blobs(centers, per_cluster, spread=0.05, seed=0):
    rng = np.random.default_rng(seed)
    points = [c + spread * rng.standard_normal((per_cluster, len(c))) for c in centers]
    return np.vstack(points)


def spans(P):
    return np.column_stack((np.arange(P), np.arange(1, P + 1)))


def test_kmeans_labels_by_first_appearance():
    data = blobs([np.array([5.0, 5.0]), np.array([0.0, 0.0])], 10)
    labels, centers, within = clustering.kmeans(data, 2, replicates=5)
    assert np.array_equal(labels, [0] * 10 + [1] * 10)
    assert np.allclose(centers[0], [5.0, 5.0], atol=0.1)
    assert within > 0


def test_kmeans_errors():
    with pytest.raises(DataError):
        clustering.kmeans(np.zeros((3, 2)), 4)
    with pytest.raises(ConfigError):
        clustering.kmeans(np.zeros((3, 2)), 0)


def test_kmeans_is_deterministic():
    data = blobs([np.zeros(3), np.ones(3), 2 * np.ones(3)], 8, spread=0.4, seed=2)
    first = clustering.kmeans(data, 3, replicates=5, seed=11)
    second = clustering.kmeans(data, 3, replicates=5, seed=11)
    assert np.array_equal(first[0], second[0])
    assert first[2] == second[2]


def test_lloyd_iterations_never_increase_inertia():
    data = blobs([np.zeros(4), np.ones(4), -np.ones(4)], 15, spread=0.8, seed=4)
    inertia = [KMeans(n_clusters=3, n_init=1, max_iter=i, tol=0.0, random_state=0,
                      algorithm="lloyd").fit(data).inertia_ for i in range(1, 8)]
    assert all(b <= a + 1e-9 for a, b in zip(inertia, inertia[1:]))


def test_select_k_three_blobs():
    centers = [np.array([0.0, 0.0, 0.0]), np.array([4.0, 0.0, 0.0]),
               np.array([0.0, 4.0, 0.0])]
    data = blobs(centers, 12, spread=0.2)
    assert clustering.select_k(data, k_max=6, replicates=5) == 3


def test_select_k_ignores_scaling():
    centers = [np.zeros(3), np.array([3.0, 0.0, 0.0]), np.array([0.0, 3.0, 0.0]),
               np.array([0.0, 0.0, 3.0])]
    data = blobs(centers, 10, spread=0.3, seed=6)
    k = clustering.select_k(data, k_max=6, replicates=5)
    for scale in (1e-3, 7.5, 1e4):
        assert clustering.select_k(scale * data, k_max=6, replicates=5) == k


def test_select_k_identical_rows():
    data = np.tile(np.arange(5.0), (10, 1))
    assert clustering.select_k(data) == 1


def test_select_k_floor_and_small_input():
    data = blobs([np.zeros(2), 5 * np.ones(2)], 6)
    assert clustering.select_k(data, k_max=3, replicates=3) == 2
    assert clustering.select_k(data, replicates=3, ch_floor=1e12) == 1
    assert clustering.select_k(data[:2], replicates=3) == 1


def test_select_k_skips_singletons():
    data = np.vstack((blobs([np.zeros(2)], 10, spread=0.01), [[50.0, 50.0]]))
    assert clustering.select_k(data, k_max=3, replicates=5) == 1


def test_trig_regression_exact():
    L = 64
    t = np.arange(L) / L
    wsf = 0.7 * np.cos(2 * np.pi * t) - 0.2 * np.sin(4 * np.pi * t)
    fit = clustering.trig_regression(wsf, 2)
    assert np.allclose(fit.a, [0.7, 0.0], atol=1e-12)
    assert np.allclose(fit.b, [0.0, -0.2], atol=1e-12)
    assert fit.rms == pytest.approx(0.0, abs=1e-12)
    assert np.allclose(fit.evaluate(L), wsf)
    with pytest.raises(ConfigError):
        clustering.trig_regression(wsf, 32)


def test_select_harmonic_count():
    L = 200
    t = np.arange(L) / L
    wsf = (np.cos(2 * np.pi * t) + 0.5 * np.cos(4 * np.pi * t) +
           0.25 * np.sin(6 * np.pi * t))
    assert clustering.select_harmonic_count(wsf) == 3
    assert clustering.select_harmonic_count(np.cos(2 * np.pi * t)) == 1
    assert clustering.select_harmonic_count(np.zeros(L)) == 1


def test_change_points_at_label_jumps():
    labels = np.array([0, 0, 1, 1, 0])
    row_spans = np.column_stack((np.arange(5) * 0.5, np.arange(1, 6) * 0.5))
    assert np.allclose(clustering.change_points(labels, row_spans), [1.0, 2.0])
    assert clustering.change_points(np.zeros(5, int), row_spans).size == 0
    with pytest.raises(DataError):
        clustering.change_points(labels[:3], row_spans)


def test_estimate_wsfs_medians():
    L = 200
    first, second = sample_wsf((1.0,), L), sample_wsf((0.0, 1.0), L)
    rows = np.vstack([first] * 5 + [second] * 4)
    labels = np.array([0] * 5 + [1] * 4)
    medians, fits = clustering.estimate_wsfs(CycleMatrix(rows, spans(9), L), labels)
    assert np.allclose(medians, [first, second])
    assert [fit.K for fit in fits] == [1, 2]
    assert np.allclose(fits[1].a, [0.0, 1.0], atol=1e-12)


def test_cluster_cycles_two_shapes():
    L = 50
    rng = np.random.default_rng(5)
    first, second = sample_wsf((1.0, 0.0, 0.5), L), sample_wsf((1.0, 0.8), L)
    rows = np.vstack([first] * 15 + [second] * 12)
    rows = rows + 0.02 * rng.standard_normal(rows.shape)
    result = clustering.cluster_cycles(CycleMatrix(rows, spans(27), L), replicates=5)
    assert result.k == 2
    assert np.array_equal(result.labels, [0] * 15 + [1] * 12)
    assert np.allclose(result.change_points, [15.0])
    assert result.medians.shape == (2, L)
    assert len(result.wsf_regressions) == 2
    assert 2 in result.ch_scores


def test_harmonic_features_keep_distances():
    L = 64
    first = sample_wsf((1.0, 0.3), L) + 0.2
    second = np.roll(sample_wsf((0.5, 0.0, 0.7), L), 5)
    features = clustering.harmonic_features(np.vstack((first, second)), [1, 2, 3])
    assert features.shape == (2, 7)
    assert np.linalg.norm(features[0] - features[1]) == pytest.approx(
        np.linalg.norm(first - second))
    with pytest.raises(ConfigError):
        clustering.harmonic_features(first, [0, 1])


def noisy_three_shapes(sigma, per_cluster=12, L=200, seed=0):
    rng = np.random.default_rng(seed)
    shapes = [sample_wsf(c, L) for c in ((1.0, 0.0, 0.0), (1.0, 1.0, 1.0), (1.0, 0.0, 1.0))]
    rows = np.vstack([np.tile(s, (per_cluster, 1)) for s in shapes])
    rows = rows + sigma * rng.standard_normal(rows.shape)
    return CycleMatrix(rows, spans(rows.shape[0]), L)


def test_cluster_cycles_in_heavy_noise():
    # noise power equal to the mean signal power
    matrix = noisy_three_shapes(1.0)
    result = clustering.cluster_cycles(matrix, replicates=5)
    assert result.k == 3
    assert np.array_equal(result.labels, np.repeat([0, 1, 2], 12))
    assert np.allclose(result.change_points, [12.0, 24.0])

    raw = clustering.cluster_cycles(matrix, replicates=5, features="rows")
    assert raw.k == 1
    with pytest.raises(ConfigError):
        clustering.cluster_cycles(matrix, replicates=5, features="spectrum")


def test_align_fundamental_phase():
    L = 200
    t = np.arange(L) / L
    coeffs = (1.0, 0.5, 0.25)
    profile = sum(c * np.cos(2 * np.pi * (k + 1) * (t - 0.137)) for k, c in enumerate(coeffs))
    aligned, shift = clustering.align_fundamental_phase(profile)
    assert shift == pytest.approx(-0.137)
    assert np.allclose(aligned, sample_wsf(coeffs, L), atol=1e-10)

    second = sample_wsf((0.0, 1.0), L)
    aligned, shift = clustering.align_fundamental_phase(second)
    assert shift == 0.0
    assert np.array_equal(aligned, second)


def test_estimate_wsfs_zero_fundamental_phase():
    L = 200
    t = np.arange(L) / L
    shape = np.cos(2 * np.pi * (t + 0.3)) - 0.4 * np.sin(4 * np.pi * (t + 0.3))
    rows = np.vstack([shape] * 4)
    medians, fits = clustering.estimate_wsfs(CycleMatrix(rows, spans(4), L),
                                             np.zeros(4, dtype=int))
    assert np.allclose(medians[0], shape)
    assert np.allclose(fits[0].a, [1.0, 0.0], atol=1e-10)
    assert np.allclose(fits[0].b, [0.0, -0.4], atol=1e-10)
    assert fits[0].shift == pytest.approx(0.3)
    assert np.allclose(fits[0].evaluate(L, on_median=True), shape, atol=1e-10)


@pytest.mark.slow
def test_select_k_planted_blobs_over_seeds():
    centers = [np.zeros(2), np.array([3.0, 0.0]), np.array([1.5, 3.0])]
    hits = 0
    for seed in range(100):
        data = blobs(centers, 20, spread=0.1, seed=seed)
        k = clustering.select_k(data, seed=seed)
        labels, _, _ = clustering.kmeans(data, 3, seed=seed)
        hits += k == 3 and np.array_equal(labels, np.repeat([0, 1, 2], 20))
    assert hits >= 99


@pytest.mark.slow
def test_select_k_invariant_under_random_scalings():
    centers = [np.zeros(2), np.array([3.0, 0.0]), np.array([1.5, 3.0])]
    data = blobs(centers, 20, spread=0.5, seed=9)
    k = clustering.select_k(data, replicates=5)
    rng = np.random.default_rng(9)
    for scale in 10.0 ** rng.uniform(-4, 4, size=100):
        assert clustering.select_k(scale * data, replicates=5) == k


def test_refine_change_points_inside_cycle():
    L = 50
    first, second = sample_wsf((1.0, 0.5), L), sample_wsf((1.0, 0.0, 0.8), L)
    for shift in (0, 7):
        a, b = np.roll(first, shift), np.roll(second, shift)
        rows = np.vstack([a, a, np.concatenate((a[:20], b[20:])), b, b, b])
        labels = np.array([0, 0, 1, 1, 1, 1])
        points = clustering.refine_change_points(
            rows, spans(6), labels, np.vstack((first, second)),
            np.full(6, shift) if shift else None)
        assert np.allclose(points, [2.4])
    assert np.allclose(clustering.change_points(labels, spans(6)), [2.0])


def test_refine_change_points_checks_shapes():
    rows = np.zeros((4, 10))
    with pytest.raises(DataError):
        clustering.refine_change_points(rows, spans(3), np.zeros(4, int), np.zeros((1, 10)))
    with pytest.raises(DataError):
        clustering.refine_change_points(rows, spans(4), np.array([0, 0, 1, 1]),
                                        np.zeros((1, 10)))
