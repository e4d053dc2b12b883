#
# SPDX-License-Identifier: GPL-2.0-only
#
# DESCRIPTION
# This module implements the synthetic signal generators used by the
# 'iwc' tool: the three-harmonic benchmark with logistic envelopes,
# smoothed-Brownian phase randomization, a piecewise K-harmonic
# generator for tests, and calibrated additive white noise.
#

import logging

from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from scipy.integrate import cumulative_trapezoid
from scipy.signal import fftconvolve
from scipy.special import expit

from iwc import ConfigError, DataError

logger = logging.getLogger('iwc')

# envelope slope and centers of the benchmark
LOGISTIC_SLOPE = 250.0
BENCHMARK_CHANGE_POINTS = (1.0 / 3.0, 2.0 / 3.0)
BENCHMARK_COEFFS = ((1.0, 0.0, 0.0), (1.0, 1.0, 1.0), (1.0, 0.0, 1.0))
BENCHMARK_MAX_IF = 44.0

SeedLike = Union[int, np.random.SeedSequence]


@dataclass
class Signal:
    """Uniformly sampled real signal."""
    samples: np.ndarray
    fs: float
    t0: float = 0.0

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        if self.samples.ndim != 1 or self.samples.size == 0:
            raise DataError("Signal samples must be a non-empty 1-D array")
        if not np.all(np.isfinite(self.samples)):
            raise DataError("Signal samples must be finite")
        if not np.isfinite(self.fs) or self.fs <= 0:
            raise DataError("Sampling rate must be positive, got %r" % self.fs)
        self.fs = float(self.fs)
        self.t0 = float(self.t0)

    def __len__(self):
        return self.samples.size

    @property
    def times(self):
        return self.t0 + np.arange(self.samples.size) / self.fs

    @property
    def duration(self):
        return self.samples.size / self.fs


@dataclass
class GroundTruth:
    """
    Known WSFs and change points of a synthetic signal.

    wsf_coeffs holds one cosine-coefficient vector per segment; entry k
    is the amplitude of cos(2*pi*(k+1)*phi).
    """
    wsf_coeffs: list
    change_points: np.ndarray
    phase: np.ndarray
    envelopes: dict = field(default_factory=dict)

    def __post_init__(self):
        self.change_points = np.asarray(self.change_points, dtype=float)
        if np.any(np.diff(self.change_points) <= 0):
            raise DataError("Change points must be strictly increasing")
        if np.any(np.diff(self.phase) <= 0):
            raise DataError("Phase must be strictly increasing")

    def to_dict(self):
        return {
            "wsf_coeffs": [list(map(float, c)) for c in self.wsf_coeffs],
            "change_points": self.change_points.tolist(),
            "phase": np.asarray(self.phase).tolist(),
            "envelopes": {k: np.asarray(v).tolist()
                          for k, v in self.envelopes.items()},
        }


@dataclass(frozen=True)
class NoiseSpec:
    snr_db: Optional[float] = None
    seed: SeedLike = 0


def sample_wsf(coeffs, length):
    """Evaluate sum_k c_k cos(2 pi k t) on length points of one period."""
    t = np.arange(length) / length
    out = np.zeros(length)
    for k, c in enumerate(coeffs, start=1):
        out += c * np.cos(2 * np.pi * k * t)
    return out


def benchmark_phase(t):
    return 40.0 * t + np.cos(8 * np.pi * t) / (2 * np.pi)


def benchmark_envelopes(t):
    rise = expit(LOGISTIC_SLOPE * (t - BENCHMARK_CHANGE_POINTS[0]))
    fall = expit(LOGISTIC_SLOPE * (t - BENCHMARK_CHANGE_POINTS[1]))
    return rise - fall, rise


def synth_benchmark(fs=6000.0, duration=1.0, perturbation=None):
    """
    Generate the three-harmonic benchmark

        x(t) = cos(2 pi phi) + A(t) cos(4 pi phi) + B(t) cos(6 pi phi)

    with phi(t) = 40 t + cos(8 pi t) / (2 pi), optionally plus a phase
    perturbation tabulated on the sample grid.
    """
    max_if = BENCHMARK_MAX_IF + (1.0 if perturbation is not None else 0.0)
    if fs < 2 * 3 * max_if:
        raise ConfigError("Sampling rate %g Hz is below the Nyquist bound "
                          "%g Hz of the third harmonic" % (fs, 6 * max_if))
    n = int(np.floor(duration * fs + 1e-9))
    if n < 2:
        raise ConfigError("Duration %g s gives fewer than 2 samples" % duration)

    t = np.arange(n) / fs
    phase = benchmark_phase(t)
    if perturbation is not None:
        perturbation = np.asarray(perturbation, dtype=float)
        if perturbation.shape != t.shape:
            raise DataError("Phase perturbation has %d samples, expected %d" %
                            (perturbation.size, n))
        phase = phase + perturbation

    a, b = benchmark_envelopes(t)
    x = (np.cos(2 * np.pi * phase) + a * np.cos(4 * np.pi * phase) +
         b * np.cos(6 * np.pi * phase))

    truth = GroundTruth(wsf_coeffs=[np.array(c) for c in BENCHMARK_COEFFS],
                        change_points=np.array(BENCHMARK_CHANGE_POINTS),
                        phase=phase,
                        envelopes={"A": a, "B": b})
    logger.debug("benchmark: %d samples at %g Hz", n, fs)
    return Signal(x, fs), truth


def smoothed_brownian_phase(seed, kernel_std=0.05, grid=None):
    """
    Integral of a Gaussian-smoothed Brownian path normalized by its sup
    norm, tabulated on a uniform grid.  The result starts at 0 and is
    1-Lipschitz.
    """
    if kernel_std <= 0:
        raise ConfigError("kernel_std must be positive, got %r" % kernel_std)
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise ConfigError("Phase perturbation grid needs at least 2 points")
    steps = np.diff(grid)
    dt = steps[0]
    if dt <= 0 or not np.allclose(steps, dt, rtol=1e-6, atol=0):
        raise ConfigError("Phase perturbation grid must be uniform")

    rng = np.random.default_rng(seed)
    walk = np.concatenate(([0.0],
                           np.cumsum(rng.standard_normal(grid.size - 1) * np.sqrt(dt))))

    half = int(np.ceil(4 * kernel_std / dt))
    u = np.arange(-half, half + 1) * dt
    kernel = np.exp(-0.5 * (u / kernel_std) ** 2)
    kernel /= kernel.sum()
    smooth = fftconvolve(walk, kernel, mode="same")

    peak = np.max(np.abs(smooth))
    if peak == 0:
        raise DataError("Smoothed Brownian path is identically zero")
    return cumulative_trapezoid(smooth / peak, grid, initial=0.0)


def synth_piecewise(fs, duration, f0, segment_coeffs, change_points, amplitude=None):
    """
    Constant-rate K-harmonic signal whose cosine coefficients switch
    abruptly at the given change points.
    """
    change_points = np.asarray(change_points, dtype=float)
    if len(segment_coeffs) != change_points.size + 1:
        raise ConfigError("%d segments need %d change points, got %d" %
                          (len(segment_coeffs), len(segment_coeffs) - 1,
                           change_points.size))
    max_k = max(len(c) for c in segment_coeffs)
    if fs < 2 * max_k * f0:
        raise ConfigError("Sampling rate %g Hz is below the Nyquist bound %g Hz" %
                          (fs, 2 * max_k * f0))

    n = int(np.floor(duration * fs + 1e-9))
    t = np.arange(n) / fs
    phase = f0 * t
    segment = np.searchsorted(change_points, t, side="right")
    x = np.zeros(n)
    for index, coeffs in enumerate(segment_coeffs):
        mask = segment == index
        for k, c in enumerate(coeffs, start=1):
            x[mask] += c * np.cos(2 * np.pi * k * phase[mask])
    if amplitude is not None:
        x *= amplitude(t)

    truth = GroundTruth(wsf_coeffs=[np.asarray(c, dtype=float) for c in segment_coeffs],
                        change_points=change_points, phase=phase)
    return Signal(x, fs), truth


def add_noise(signal, spec, rng=None):
    """
    Add white Gaussian noise at spec.snr_db (sample-mean powers).
    snr_db of None or +inf returns the input unchanged.
    """
    if spec.snr_db is None or np.isposinf(spec.snr_db):
        return signal
    power = np.mean(signal.samples ** 2)
    if power == 0:
        raise DataError("Cannot set an SNR of %g dB on a zero-power signal" %
                        spec.snr_db)
    sigma = np.sqrt(power / 10 ** (spec.snr_db / 10.0))
    if rng is None:
        rng = np.random.default_rng(spec.seed)
    noise = rng.standard_normal(len(signal))
    return Signal(signal.samples + sigma * noise, signal.fs, signal.t0)


def empirical_snr_db(clean, noisy):
    """SNR of noisy against clean, in dB."""
    residual = np.asarray(noisy) - np.asarray(clean)
    return 10 * np.log10(np.mean(np.asarray(clean) ** 2) / np.mean(residual ** 2))
