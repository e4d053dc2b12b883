#
# SPDX-License-Identifier: GPL-2.0-only
#
# DESCRIPTION
# Phase inversion and non-uniform resampling (warping), amplitude
# demodulation, the iterative warping controller with its SVD-entropy
# stopping rule, and the empirical period-correction search.
#
# A warped signal is sampled uniformly in warped time tau (cycles of
# the warping harmonic divided by its index), starting at tau = 0.
# Each WarpMap maps its warped time back to the time axis of the
# signal it was computed from; the maps of earlier iterations are kept
# in 'composed' so any warped time can be taken back to original time.
#

import logging

from dataclasses import dataclass, field
from typing import List

import numpy as np

from scipy.interpolate import CubicSpline, PchipInterpolator
from scipy.signal import welch

from iwc import ConfigError, DataError, NumericError
from iwc.signal_model import Signal
from iwc import tfa
from iwc import cycles

logger = logging.getLogger('iwc')

# fundamental within this many cycles per unit of 1 counts as unit period
UNIT_PERIOD_TOLERANCE = 0.05


@dataclass
class WarpMap:
    source_times: np.ndarray
    delta_tau: float
    composed: list = field(default_factory=list)

    def __post_init__(self):
        self.source_times = np.asarray(self.source_times, dtype=float)
        if self.source_times.size < 2 or np.any(np.diff(self.source_times) <= 0):
            raise DataError("Warp map source times must be strictly increasing")
        if not self.delta_tau > 0:
            raise DataError("Warp map delta_tau must be positive, got %r" %
                            self.delta_tau)

    def __len__(self):
        return self.source_times.size

    def to_source(self, tau):
        """Warped time -> time axis of the signal this map was built on."""
        index = np.arange(self.source_times.size)
        interp = PchipInterpolator(index, self.source_times, extrapolate=True)
        return interp(np.asarray(tau, dtype=float) / self.delta_tau)

    def to_original(self, tau):
        """Warped time -> original signal time through every prior map."""
        t = self.to_source(tau)
        for prior in reversed(self.composed):
            t = prior.to_source(t)
        return t

    def flatten(self):
        """Single map from original time with the same samples."""
        tau = np.arange(self.source_times.size) * self.delta_tau
        return WarpMap(self.to_original(tau), self.delta_tau)


@dataclass
class WarpedSignal:
    signal: Signal
    map: WarpMap
    iteration: int = 1

    def __post_init__(self):
        if self.iteration < 1:
            raise DataError("Warp iteration must be >= 1, got %r" % self.iteration)

    def __len__(self):
        return len(self.signal)


@dataclass
class IterationRecord:
    warped: WarpedSignal
    component: tfa.ComponentEstimate
    tfr: tfa.TFRepresentation
    entropy: float


@dataclass
class WarpResult:
    warped: WarpedSignal
    entropy_trace: List[float]
    components: List[tfa.ComponentEstimate]
    history: List[IterationRecord]
    harmonic: int


def invert_phase(phase, times, n_out=None, delta_tau=None):
    """
    Times t_m with phase(t_m) = phase[0] + m * delta_tau, by monotone
    cubic interpolation of the inverse of phase.  Give either n_out
    (delta_tau spans the phase range exactly) or delta_tau.
    """
    phase = np.asarray(phase, dtype=float)
    times = np.asarray(times, dtype=float)
    if phase.shape != times.shape or phase.size < 2:
        raise DataError("Phase and times must be equal-length arrays of >= 2 points")
    if np.any(np.diff(phase) <= 0):
        raise DataError("Phase must be strictly increasing to be inverted")

    span = phase[-1] - phase[0]
    if n_out is not None:
        if n_out < 2:
            raise ConfigError("n_out must be >= 2, got %r" % n_out)
        delta_tau = span / (n_out - 1)
    elif delta_tau is None or delta_tau <= 0:
        raise ConfigError("invert_phase needs n_out or a positive delta_tau")
    else:
        n_out = int(np.floor(span / delta_tau + 1e-9)) + 1

    targets = np.minimum(phase[0] + np.arange(n_out) * delta_tau, phase[-1])
    inverse = PchipInterpolator(phase, times)
    return WarpMap(inverse(targets), delta_tau)


def warp(signal, warp_map, iteration=1):
    """Resample signal at warp_map.source_times with a cubic spline."""
    times = signal.times
    tol = 1e-9 * max(times[-1] - times[0], 1.0 / signal.fs)
    source = warp_map.source_times
    if source[0] < times[0] - tol or source[-1] > times[-1] + tol:
        raise DataError("Warp map spans [%g, %g] s outside the signal span [%g, %g] s" %
                        (source[0], source[-1], times[0], times[-1]))
    spline = CubicSpline(times, signal.samples)
    warped = Signal(spline(np.clip(source, times[0], times[-1])),
                    fs=1.0 / warp_map.delta_tau, t0=0.0)
    return WarpedSignal(warped, warp_map, iteration)


def demodulate(signal, amplitude, floor_quantile=0.05):
    """Divide by the amplitude, floored at its floor_quantile quantile."""
    amplitude = np.asarray(amplitude, dtype=float)
    if amplitude.shape != signal.samples.shape:
        raise DataError("Amplitude has %d samples, signal has %d" %
                        (amplitude.size, len(signal)))
    if not 0 < floor_quantile < 0.5:
        raise ConfigError("floor_quantile must be in (0, 0.5), got %r" % floor_quantile)
    if not np.any(amplitude > 0):
        raise NumericError("Cannot demodulate by an all-zero amplitude")
    floor = np.quantile(amplitude, floor_quantile)
    if floor <= 0:
        floor = amplitude[amplitude > 0].min()
    return Signal(signal.samples / np.maximum(amplitude, floor), signal.fs, signal.t0)


def dominant_frequency(signal):
    """Frequency of the largest non-DC Welch periodogram peak."""
    nperseg = min(len(signal), 4096)
    freqs, pxx = welch(signal.samples, fs=signal.fs, nperseg=nperseg)
    if freqs.size < 2 or not np.any(pxx[1:] > 0):
        raise DataError("Signal has no oscillatory content")
    return float(freqs[1 + np.argmax(pxx[1:])])


def expected_fundamental(signal, config):
    """Expected fundamental of the input: band center, else Welch peak."""
    if config.band is not None:
        return 0.5 * (config.band[0] + config.band[1])
    return dominant_frequency(signal)


def minimum_length(fs, f0, config):
    """Samples needed for the window and 2 usable cycles past the edges."""
    window = tfa.WindowSpec.for_fundamental(fs, f0, config.window_sigma,
                                            config.window_length)
    n_cycles = 2 + 2 * config.edge_cycles
    return int(max(window.length + 1, np.ceil(n_cycles * fs / f0)))


def _analysis_settings(signal, config, iteration):
    if iteration == 1:
        f0 = expected_fundamental(signal, config)
        band = config.band or (0.6 * f0, 1.4 * f0)
    else:
        f0 = 1.0
        band = (0.5, 1.5)
    window = tfa.WindowSpec.for_fundamental(signal.fs, f0, config.window_sigma,
                                            config.window_length)
    if window.length >= len(signal):
        raise DataError("Input has %d samples; at least %d are required" %
                        (len(signal), minimum_length(signal.fs, f0, config)))
    hop = max(1, int(round(config.hop * signal.fs / f0)))
    n_fft = config.n_fft or tfa.default_n_fft(window)
    return f0, band, window, hop, n_fft


def spectrogram(signal, config, iteration=2):
    """STFT with the settings of the given iteration and its fundamental ridge."""
    _, band, window, hop, n_fft = _analysis_settings(signal, config, iteration)
    tfr = tfa.stft(signal, window, hop, n_fft)
    ridge = tfa.extract_ridge(tfr, band, config.ridge_penalty / tfr.bin_hz ** 2)
    return tfr, tfr.freqs[ridge]


def warp_once(signal, config, iteration, harmonic, composed):
    """
    One warping pass: STFT, ridge, IF and amplitude of the harmonic,
    phase inversion onto samples_per_cycle points per cycle, warping and
    demodulation.  Returns (WarpedSignal, ComponentEstimate, harmonic, tfr).
    """
    f0, band, window, hop, n_fft = _analysis_settings(signal, config, iteration)
    tfr = tfa.stft(signal, window, hop, n_fft)
    penalty = config.ridge_penalty / tfr.bin_hz ** 2
    base_ridge = tfa.extract_ridge(tfr, band, penalty)
    if harmonic == "auto":
        harmonic = tfa.select_dominant_harmonic(tfr, base_ridge, config.max_harmonic)
        logger.info("Warping with harmonic %d", harmonic)
    component = tfa.estimate_component(tfr, band, harmonic, penalty, base_ridge)

    phase = component.phase / harmonic
    warp_map = invert_phase(phase, component.times,
                            delta_tau=1.0 / config.samples_per_cycle)
    warp_map.composed = list(composed)
    warped = warp(signal, warp_map, iteration)
    amplitude = np.interp(warp_map.source_times, component.times, component.amplitude)
    warped.signal = demodulate(warped.signal, amplitude, config.demod_floor_quantile)
    logger.debug("iteration %d: f0 %.4g, band [%.4g, %.4g], window %d, hop %d, "
                 "%d warped samples", iteration, f0, band[0], band[1],
                 window.length, hop, len(warped))
    return warped, component, harmonic, tfr


def cycle_entropy(warped, samples_per_cycle, edge_cycles=0):
    """SVD entropy of the cycle matrix with edge cycles dropped when possible."""
    matrix = cycles.segment(warped, samples_per_cycle)
    return cycles.svd_entropy(cycles.trim_edges(matrix, edge_cycles).rows)


def input_entropy(signal, config):
    """
    SVD entropy of the input's own cycle matrix when it already sits on
    a unit-period grid (samples_per_cycle samples per cycle of a
    fundamental near 1), else None.
    """
    if abs(signal.fs - config.samples_per_cycle) > 1e-9 * config.samples_per_cycle:
        return None
    try:
        f0 = expected_fundamental(signal, config)
    except DataError:
        return None
    if abs(f0 - 1.0) > UNIT_PERIOD_TOLERANCE:
        return None
    if len(signal) < 2 * config.samples_per_cycle:
        return None
    identity = WarpedSignal(Signal(signal.samples, signal.fs, 0.0),
                            WarpMap(signal.times, 1.0 / signal.fs))
    return cycle_entropy(identity, config.samples_per_cycle, config.edge_cycles)


def iterate_warp(signal, config, n_iterations=None):
    """
    Warp and demodulate repeatedly until the SVD entropy of the cycle
    matrix stops decreasing by more than entropy_tolerance (relative),
    or max_iterations passes.  An input already on a unit-period grid
    is its own iteration-0 baseline, so it stops after one pass.  With
    n_iterations, run exactly that many passes.
    """
    limit = n_iterations or config.max_iterations
    harmonic = config.harmonic
    current = signal
    composed = []
    history = []
    trace = []
    baseline = None
    if n_iterations is None and config.stop_on_stagnation:
        baseline = input_entropy(signal, config)
        if baseline is not None:
            logger.info("Input is on a unit-period grid, SVD entropy %.6f", baseline)

    for iteration in range(1, limit + 1):
        warped, component, harmonic, tfr = warp_once(current, config, iteration,
                                                     harmonic, composed)
        if len(warped) < 2 * config.samples_per_cycle:
            raise DataError("Fewer than 2 complete cycles after warping "
                            "(%d samples at %d per cycle)" %
                            (len(warped), config.samples_per_cycle))
        entropy = cycle_entropy(warped, config.samples_per_cycle, config.edge_cycles)
        history.append(IterationRecord(warped, component, tfr, entropy))
        trace.append(entropy)
        logger.info("Iteration %d: harmonic %d, %d cycles, SVD entropy %.6f",
                    iteration, harmonic, len(warped) // config.samples_per_cycle,
                    entropy)

        composed = composed + [warped.map]
        current = warped.signal

        previous = trace[-2] if iteration > 1 else baseline
        if n_iterations is None and config.stop_on_stagnation and previous is not None:
            decrease = (previous - entropy) / max(previous, 1e-3)
            if decrease < config.entropy_tolerance:
                logger.info("SVD entropy stagnated (relative decrease %.3g)", decrease)
                break

    return WarpResult(warped=history[-1].warped,
                      entropy_trace=trace,
                      components=[h.component for h in history],
                      history=history,
                      harmonic=harmonic)


def refine_period(warped, factor_range, n_grid=21, edge_cycles=0):
    """
    Grid search for the factor c minimizing the SVD entropy of the
    cycles of y(tau) = x(c * tau).  Ties go to the factor nearest the
    middle of the range.  Returns (c, rescaled WarpedSignal).
    """
    lo, hi = factor_range
    if not 0 < lo < hi:
        raise ConfigError("Refine range must satisfy 0 < lo < hi, got %r" %
                          (factor_range,))
    if n_grid < 3:
        raise ConfigError("Refine grid needs at least 3 points, got %r" % n_grid)

    per_cycle = int(round(warped.signal.fs))
    tau = warped.signal.times
    spline = CubicSpline(tau, warped.signal.samples)

    factors = np.linspace(lo, hi, n_grid)
    candidates = []
    entropies = []
    for factor in factors:
        n = int(np.floor((tau[-1] - tau[0]) / factor * per_cycle + 1e-9)) + 1
        rescaled_tau = tau[0] + factor * np.arange(n) / per_cycle
        candidate = WarpedSignal(
            Signal(spline(rescaled_tau), fs=per_cycle, t0=0.0),
            WarpMap(rescaled_tau, 1.0 / per_cycle,
                    composed=warped.map.composed + [warped.map]),
            warped.iteration)
        candidates.append(candidate)
        entropies.append(cycle_entropy(candidate, per_cycle, edge_cycles))

    entropies = np.asarray(entropies)
    best = entropies.min()
    ties = np.flatnonzero(entropies <= best + 1e-12 * max(abs(best), 1.0))
    middle = 0.5 * (lo + hi)
    choice = ties[np.argmin(np.abs(factors[ties] - middle))]
    logger.info("Period refinement: factor %.6g (SVD entropy %.6f)",
                factors[choice], entropies[choice])
    return float(factors[choice]), candidates[choice]
