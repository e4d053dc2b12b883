#
# SPDX-License-Identifier: GPL-2.0-only
#
# DESCRIPTION
# End-to-end analysis of one signal: iterative warping, optional
# period refinement, segmentation, synchronization and clustering.
#

import logging

from dataclasses import dataclass
from typing import Optional

from iwc import DataError
from iwc import clustering
from iwc import cycles
from iwc import warping

logger = logging.getLogger('iwc')


@dataclass
class CycleAnalysis:
    matrix: cycles.CycleMatrix
    aligned: Optional[cycles.CycleMatrix]
    shifts: Optional[cycles.ShiftAssignment]
    clusters: clustering.ClusterResult
    raw_entropy: float
    aligned_entropy: Optional[float]

    @property
    def clustered(self):
        return self.aligned if self.aligned is not None else self.matrix


@dataclass
class AnalysisResult:
    warp: warping.WarpResult
    warped: warping.WarpedSignal
    refine_factor: Optional[float]
    cycles: CycleAnalysis


def check_length(signal, config):
    """Reject inputs too short for the window and two usable cycles."""
    f0 = warping.expected_fundamental(signal, config)
    required = warping.minimum_length(signal.fs, f0, config)
    if len(signal) < required:
        raise DataError("Input has %d samples; at least %d are required "
                        "(%d cycles at %.4g Hz, sampled at %g Hz)" %
                        (len(signal), required, 2 + 2 * config.edge_cycles, f0,
                         signal.fs))
    return f0


def analyze_warped(warped, config):
    """Segment, trim, synchronize and cluster one warped signal."""
    matrix = cycles.trim_edges(cycles.segment(warped, config.samples_per_cycle),
                               config.edge_cycles)
    raw_entropy = cycles.svd_entropy(matrix.rows)

    aligned = shifts = aligned_entropy = None
    if config.synchronize:
        aligned, shifts = cycles.synchronize(matrix, seed=config.seed)
        aligned_entropy = cycles.svd_entropy(aligned.rows)
        logger.info("SVD entropy %.6f raw, %.6f synchronized",
                    raw_entropy, aligned_entropy)

    target = aligned if aligned is not None else matrix
    clusters = clustering.cluster_cycles(target,
                                         k_max=config.k_max,
                                         replicates=config.replicates,
                                         seed=config.seed,
                                         ch_floor=config.ch_floor,
                                         min_cluster_size=config.min_cluster_size,
                                         harmonic_count_max=config.harmonic_count_max,
                                         features=config.cluster_features)
    if config.subcycle_change_points and clusters.k > 1:
        clusters.change_points = clustering.refine_change_points(
            matrix.rows, matrix.row_spans, clusters.labels, clusters.medians,
            shifts.shifts if shifts is not None else None)
    return CycleAnalysis(matrix, aligned, shifts, clusters, raw_entropy, aligned_entropy)


def analyze_signal(signal, config, n_iterations=None):
    """Full analysis of an input signal."""
    check_length(signal, config)
    result = warping.iterate_warp(signal, config, n_iterations)
    warped = result.warped
    factor = None
    if config.refine_range is not None:
        factor, warped = warping.refine_period(warped, config.refine_range,
                                               config.refine_grid,
                                               config.edge_cycles)
    return AnalysisResult(result, warped, factor, analyze_warped(warped, config))
