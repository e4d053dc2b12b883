#
# SPDX-License-Identifier: GPL-2.0-only
#
# DESCRIPTION
# Short-time Fourier transform with a Gaussian window, spectrogram
# ridge extraction by dynamic programming, and per-frame amplitude,
# instantaneous frequency and phase of one harmonic.
#
# The STFT is referenced to the frame center:
#
#   V[m, k] = sum_n x(t_m + n) h(n) exp(-2j pi xi_k n / fs)
#
# so a stationary tone gives a frame-independent |V| and the
# derivative-window ratio used for reassignment is real-valued up to
# leakage.
#

import logging

from dataclasses import dataclass
from typing import Optional

import numpy as np

from numpy.lib.stride_tricks import sliding_window_view
from scipy import fft as sp_fft
from scipy.integrate import cumulative_trapezoid
from scipy.signal import windows

from iwc import ConfigError, DataError

logger = logging.getLogger('iwc')

# relative |V| below which a frame counts as empty
MAGNITUDE_FLOOR = 1e-6


@dataclass(frozen=True)
class WindowSpec:
    length: int
    sigma: float
    kind: str = "gaussian"

    def __post_init__(self):
        if self.length < 3 or self.length % 2 == 0:
            raise ConfigError("Window length must be odd and >= 3, got %r" % self.length)
        if not self.sigma > 0:
            raise ConfigError("Window sigma must be positive, got %r" % self.sigma)
        if self.kind != "gaussian":
            raise ConfigError("Unsupported window kind %r" % self.kind)

    @classmethod
    def for_fundamental(cls, fs, f0, sigma_cycles, length_cycles=None):
        """Window whose sigma (and length) are given in cycles of f0."""
        sigma = sigma_cycles * fs / f0
        if length_cycles is None:
            half = int(np.ceil(4 * sigma))
        else:
            half = int(np.ceil(length_cycles * fs / f0 / 2))
        return cls(length=2 * max(half, 1) + 1, sigma=sigma)


@dataclass
class TFRepresentation:
    values: np.ndarray
    times: np.ndarray
    freqs: np.ndarray
    hop: int
    window: WindowSpec
    h_hat_0: float
    fs: float
    # STFT with the time-derivative window, in Hz
    dvalues: Optional[np.ndarray] = None

    @property
    def bin_hz(self):
        return self.freqs[1] - self.freqs[0]

    @property
    def power(self):
        return np.abs(self.values) ** 2


@dataclass
class ComponentEstimate:
    ridge: np.ndarray
    ridge_freq: np.ndarray
    inst_freq: np.ndarray
    amplitude: np.ndarray
    phase: np.ndarray
    harmonic_index: int
    times: np.ndarray

    def __len__(self):
        return self.ridge.size


def make_window(spec):
    """Unit-L2 Gaussian window.  h_hat_0 of the result is its sum."""
    h = windows.gaussian(spec.length, std=spec.sigma, sym=True)
    return h / np.linalg.norm(h)


def next_pow2(n):
    return 1 << int(np.ceil(np.log2(max(n, 1))))


def default_n_fft(window):
    return next_pow2(4 * window.length)


def _frames(x, length, hop):
    half = length // 2
    padded = np.concatenate((np.zeros(half), x, np.zeros(half)))
    return sliding_window_view(padded, length)[::hop]


def _transform(frames, taper, n_fft):
    length = taper.size
    half = length // 2
    buf = np.zeros((frames.shape[0], n_fft))
    buf[:, :length] = frames * taper
    # sample n of the frame lands at index n mod n_fft
    buf = np.roll(buf, -half, axis=1)
    return sp_fft.rfft(buf, axis=1)


def stft(signal, window, hop, n_fft=None):
    """
    STFT of signal with frames centered at samples 0, hop, 2*hop, ...
    and zero-padded edges.  Also computes the derivative-window STFT
    needed by estimate_if().
    """
    if n_fft is None:
        n_fft = default_n_fft(window)
    if hop < 1:
        raise ConfigError("Hop must be >= 1, got %r" % hop)
    if n_fft < window.length:
        raise ConfigError("n_fft %d is shorter than the window (%d)" %
                          (n_fft, window.length))
    if len(signal) <= window.length:
        raise DataError("Signal of %d samples is not longer than the %d-sample window" %
                        (len(signal), window.length))

    h = make_window(window)
    n = np.arange(window.length) - window.length // 2
    dh = -(n * signal.fs / window.sigma ** 2) * h

    frames = _frames(signal.samples, window.length, hop)
    values = _transform(frames, h, n_fft)
    dvalues = _transform(frames, dh, n_fft)

    times = signal.t0 + np.arange(frames.shape[0]) * hop / signal.fs
    freqs = sp_fft.rfftfreq(n_fft, d=1.0 / signal.fs)
    logger.debug("stft: %d frames x %d bins, window %d, hop %d",
                 values.shape[0], values.shape[1], window.length, hop)
    return TFRepresentation(values=values, times=times, freqs=freqs, hop=hop,
                            window=window, h_hat_0=float(h.sum()), fs=signal.fs,
                            dvalues=dvalues)


def band_bins(tfr, band):
    lo, hi = band
    bins = np.flatnonzero((tfr.freqs >= lo) & (tfr.freqs <= hi))
    if bins.size == 0:
        raise DataError("Frequency band [%g, %g] Hz contains no STFT bins" % (lo, hi))
    return bins


def extract_ridge(tfr, band=None, smoothness_penalty=None):
    """
    Ridge through the spectrogram inside band maximizing

        sum_m log|V(m, c_m)|^2 - penalty * sum_m (f(c_{m+1}) - f(c_m))^2

    by exact dynamic programming.  The default penalty makes a 2-bin
    jump cost one unit of log-power.  Returns absolute bin indices.
    """
    if band is None:
        band = (tfr.freqs[0], tfr.freqs[-1])
    if smoothness_penalty is None:
        smoothness_penalty = 0.25 / tfr.bin_hz ** 2
    if smoothness_penalty < 0:
        raise ConfigError("Ridge penalty must be non-negative, got %r" %
                          smoothness_penalty)

    bins = band_bins(tfr, band)
    power = tfr.power[:, bins]
    tiny = max(power.max() * 1e-30, np.finfo(float).tiny)
    gain = np.log(power + tiny)

    f = tfr.freqs[bins]
    # cost[new, old]
    cost = smoothness_penalty * np.subtract.outer(f, f) ** 2

    n_frames = gain.shape[0]
    back = np.zeros((n_frames, bins.size), dtype=np.intp)
    score = gain[0].copy()
    for m in range(1, n_frames):
        trans = score[None, :] - cost
        back[m] = np.argmax(trans, axis=1)
        score = gain[m] + trans[np.arange(bins.size), back[m]]

    path = np.empty(n_frames, dtype=np.intp)
    path[-1] = np.argmax(score)
    for m in range(n_frames - 1, 0, -1):
        path[m - 1] = back[m, path[m]]
    return bins[path]


def _floor_mask(tfr, ridge):
    mags = np.abs(tfr.values[np.arange(ridge.size), ridge])
    peak = np.abs(tfr.values).max()
    return mags, peak, mags >= MAGNITUDE_FLOOR * peak if peak > 0 else np.zeros(ridge.size, bool)


def estimate_amplitude(tfr, ridge):
    """Amplitude 2|V|/h_hat(0) along the ridge, floored for empty frames."""
    mags, peak, ok = _floor_mask(tfr, ridge)
    floor = MAGNITUDE_FLOOR * peak
    return 2 * np.where(ok, mags, floor) / tfr.h_hat_0


def estimate_if(tfr, ridge):
    """
    Reassigned frequency along the ridge,

        f = xi - Re[V_dh / (2j pi V_h)]

    with the correction clipped to one bin.  Frames where |V| is below
    the floor keep the ridge frequency.
    """
    if tfr.dvalues is None:
        raise ConfigError("TF representation carries no derivative-window STFT")
    frames = np.arange(ridge.size)
    ridge_freq = tfr.freqs[ridge]
    mags, peak, ok = _floor_mask(tfr, ridge)

    v = tfr.values[frames, ridge]
    dv = tfr.dvalues[frames, ridge]
    correction = np.zeros(ridge.size)
    correction[ok] = np.real(dv[ok] / (2j * np.pi * v[ok]))
    correction = np.clip(correction, -tfr.bin_hz, tfr.bin_hz)
    return ridge_freq - correction


def integrate_phase(inst_freq, hop, fs):
    """Trapezoidal integral of the IF, in cycles, starting at 0."""
    inst_freq = np.asarray(inst_freq, dtype=float)
    if not np.all(np.isfinite(inst_freq)) or np.any(inst_freq <= 0):
        raise DataError("Instantaneous frequency must be positive and finite")
    return cumulative_trapezoid(inst_freq, dx=hop / fs, initial=0.0)


def select_dominant_harmonic(tfr, base_ridge, max_mult):
    """
    Multiple l of the base ridge in 1..max_mult with the largest mean
    magnitude; ties go to the smaller l.
    """
    if max_mult < 1:
        raise ConfigError("max_mult must be >= 1, got %r" % max_mult)
    frames = np.arange(base_ridge.size)
    base = tfr.freqs[base_ridge]
    scores = []
    for mult in range(1, max_mult + 1):
        target = mult * base
        if np.any(target > tfr.freqs[-1]):
            scores.append(-np.inf)
            continue
        bins = np.rint(target / tfr.bin_hz).astype(np.intp)
        scores.append(np.abs(tfr.values[frames, bins]).mean())
    scores = np.asarray(scores)
    if not np.any(np.isfinite(scores)):
        raise DataError("Every harmonic candidate leaves the frequency range")
    best = int(np.argmax(scores)) + 1
    logger.debug("harmonic magnitudes %s -> l=%d", np.round(scores, 6), best)
    return best


def harmonic_band(base_freq, harmonic):
    """Search band of harmonic l around l times the median base frequency."""
    center = float(np.median(base_freq))
    return (harmonic - 0.5) * center, (harmonic + 0.5) * center


def estimate_component(tfr, band, harmonic=1, smoothness_penalty=None,
                       base_ridge=None):
    """
    Ridge, amplitude, IF and phase of harmonic l.  For l > 1 the ridge
    is searched around l times the fundamental ridge (base_ridge, or
    the ridge of band).
    """
    if base_ridge is None:
        base_ridge = extract_ridge(tfr, band, smoothness_penalty)
    ridge = base_ridge
    if harmonic > 1:
        ridge = extract_ridge(tfr, harmonic_band(tfr.freqs[base_ridge], harmonic),
                              smoothness_penalty)
    inst_freq = estimate_if(tfr, ridge)
    return ComponentEstimate(ridge=ridge,
                             ridge_freq=tfr.freqs[ridge],
                             inst_freq=inst_freq,
                             amplitude=estimate_amplitude(tfr, ridge),
                             phase=integrate_phase(inst_freq, tfr.hop, tfr.fs),
                             harmonic_index=harmonic,
                             times=tfr.times)
