#
# SPDX-License-Identifier: GPL-2.0-only
#

import numpy as np
import pytest

from iwc import ConfigError, DataError, NumericError
from iwc import tfa
from iwc import warping
from iwc.config import PipelineConfig
from iwc.signal_model import Signal, benchmark_phase
from iwc.warping import WarpMap, WarpedSignal

from conftest import periodic_signal


def test_invert_linear_phase():
    times = np.linspace(0.0, 10.0, 101)
    wmap = warping.invert_phase(2 * times, times, delta_tau=0.5)
    assert len(wmap) == 41
    assert np.allclose(wmap.source_times, 0.25 * np.arange(41))
    assert wmap.delta_tau == 0.5


def test_invert_phase_n_out():
    times = np.linspace(0.0, 1.0, 11)
    wmap = warping.invert_phase(3 * times + 1, times, n_out=7)
    assert wmap.delta_tau == pytest.approx(0.5)
    assert wmap.source_times[-1] == pytest.approx(1.0)


def test_invert_phase_errors():
    times = np.linspace(0.0, 1.0, 5)
    with pytest.raises(DataError):
        warping.invert_phase(np.array([0.0, 1.0, 0.5, 2.0, 3.0]), times, n_out=4)
    with pytest.raises(ConfigError):
        warping.invert_phase(times, times)


def test_warp_straightens_modulated_cosine():
    fs = 1000.0
    t = np.arange(4000) / fs
    phase = 5 * t + 0.3 * np.sin(2 * np.pi * t) / (2 * np.pi)
    sig = Signal(np.cos(2 * np.pi * phase), fs)
    wmap = warping.invert_phase(phase, t, delta_tau=1 / 100)
    warped = warping.warp(sig, wmap)
    tau = np.arange(len(warped)) / 100
    assert warped.signal.fs == pytest.approx(100.0)
    assert np.allclose(warped.signal.samples, np.cos(2 * np.pi * tau), atol=1e-4)


def test_warp_rejects_map_outside_signal():
    sig = Signal(np.ones(100), 100.0)
    with pytest.raises(DataError):
        warping.warp(sig, WarpMap(np.linspace(0.0, 2.0, 10), 0.1))


def test_warp_map_composition():
    first = WarpMap(0.5 * np.arange(11), 1.0)
    second = WarpMap(2.0 * np.arange(6), 1.0, composed=[first])
    assert second.to_source(3.0) == pytest.approx(6.0)
    assert second.to_original(3.0) == pytest.approx(3.0)
    flat = second.flatten()
    assert flat.composed == []
    assert np.allclose(flat.source_times, np.arange(6))


def test_demodulate():
    sig = Signal(np.full(100, 4.0), 10.0)
    assert np.allclose(warping.demodulate(sig, np.full(100, 2.0)).samples, 2.0)
    amplitude = np.full(100, 2.0)
    amplitude[:3] = 1e-9
    out = warping.demodulate(sig, amplitude, floor_quantile=0.1)
    assert np.allclose(out.samples, 2.0)
    with pytest.raises(NumericError):
        warping.demodulate(sig, np.zeros(100))
    with pytest.raises(DataError):
        warping.demodulate(sig, np.ones(50))


def test_dominant_frequency():
    sig = periodic_signal(1000.0, 10.0, 4.0)
    assert warping.dominant_frequency(sig) == pytest.approx(10.0, abs=0.3)
    config = PipelineConfig(band=(8.0, 14.0))
    assert warping.expected_fundamental(sig, config) == pytest.approx(11.0)


def test_minimum_length():
    config = PipelineConfig()
    # window of 2 * ceil(4 * 60) + 1 samples, 6 cycles of 100 samples
    assert warping.minimum_length(1000.0, 10.0, config) == 600
    assert warping.minimum_length(1000.0, 10.0, config.updated(window_sigma=1.0)) == 802


def test_iterate_warp_on_benchmark(benchmark, fast_config):
    sig, _ = benchmark
    result = warping.iterate_warp(sig, fast_config, n_iterations=2)
    assert len(result.entropy_trace) == 2
    assert len(result.history) == 2
    assert result.harmonic == 1
    warped = result.warped
    assert warped.iteration == 2
    assert warped.signal.fs == pytest.approx(200.0)
    assert 38 <= len(warped) // 200 <= 41
    # cycle boundaries map back inside the original signal
    ends = warped.map.to_original(np.array([0.0, len(warped) // 200]))
    assert -0.05 <= ends[0] <= 0.05
    assert 0.95 <= ends[1] <= 1.05


def test_iterate_warp_stops_on_stagnation():
    sig = periodic_signal(1000.0, 10.0, 4.0)
    config = PipelineConfig(entropy_tolerance=10.0, max_iterations=5)
    result = warping.iterate_warp(sig, config)
    assert len(result.entropy_trace) == 2
    config = config.updated(stop_on_stagnation=False, max_iterations=3)
    assert len(warping.iterate_warp(sig, config).entropy_trace) == 3


def test_iterate_warp_auto_harmonic():
    sig = periodic_signal(1000.0, 10.0, 4.0, coeffs=(0.3, 1.0))
    config = PipelineConfig(harmonic="auto", band=(6.0, 14.0))
    result = warping.iterate_warp(sig, config, n_iterations=1)
    assert result.harmonic == 2
    # phase of harmonic 2 over 2 still gives one row per fundamental cycle
    assert 38 <= len(result.warped) // 200 <= 41


def test_refine_period_finds_factor():
    per_cycle = 200
    tau = np.arange(60 * per_cycle) / per_cycle
    period = 1.991
    x = np.cos(2 * np.pi * tau / period) + 0.5 * np.sin(4 * np.pi * tau / period)
    warped = WarpedSignal(Signal(x, per_cycle), WarpMap(tau, 1.0 / per_cycle))
    factor, candidate = warping.refine_period(warped, (1.99, 2.01), n_grid=21)
    assert factor == pytest.approx(1.991, abs=1e-9)
    assert candidate.signal.fs == per_cycle
    assert candidate.map.composed[-1] is warped.map


def test_refine_period_checks_range():
    warped = WarpedSignal(Signal(np.ones(1000), 200.0),
                          WarpMap(np.arange(1000) / 200.0, 1 / 200.0))
    with pytest.raises(ConfigError):
        warping.refine_period(warped, (1.1, 0.9))


def test_iterate_warp_stops_on_already_warped_input():
    per_cycle = 200
    tau = np.arange(40 * per_cycle) / per_cycle
    sig = Signal(np.cos(2 * np.pi * tau), per_cycle)
    config = PipelineConfig(samples_per_cycle=per_cycle)
    assert warping.input_entropy(sig, config) == pytest.approx(0.0, abs=1e-8)
    result = warping.iterate_warp(sig, config)
    assert len(result.entropy_trace) == 1
    assert len(warping.iterate_warp(sig, config, n_iterations=2).entropy_trace) == 2


def test_input_entropy_needs_unit_period_grid():
    config = PipelineConfig()
    assert warping.input_entropy(periodic_signal(1000.0, 10.0, 4.0), config) is None
    # right sampling rate, wrong period
    assert warping.input_entropy(periodic_signal(200.0, 3.0, 20.0), config) is None


def test_warp_benchmark_phase_to_unit_cosine(benchmark):
    sig, truth = benchmark
    pure = Signal(np.cos(2 * np.pi * truth.phase), sig.fs)
    wmap = warping.invert_phase(truth.phase, sig.times, delta_tau=1 / 200)
    warped = warping.warp(pure, wmap)
    tau = np.arange(len(warped)) / 200
    expected = np.cos(2 * np.pi * (truth.phase[0] + tau))
    assert np.sqrt(np.mean((warped.signal.samples - expected) ** 2)) < 1e-3


def test_composed_warps_match_flattened_map():
    fs = 1000.0
    t = np.arange(4000) / fs
    sig = Signal(np.cos(2 * np.pi * 2 * t) + 0.3 * np.sin(2 * np.pi * 3 * t), fs)
    first = warping.invert_phase(t + 0.05 * np.sin(2 * np.pi * 0.25 * t), t,
                                 delta_tau=1 / fs)
    once = warping.warp(sig, first)
    tau = once.signal.times
    second = warping.invert_phase(tau + 0.03 * np.sin(2 * np.pi * 0.4 * tau), tau,
                                  delta_tau=1 / fs)
    second.composed = [first]
    twice = warping.warp(once.signal, second)
    direct = warping.warp(sig, second.flatten())
    rms = np.sqrt(np.mean((twice.signal.samples - direct.signal.samples) ** 2))
    assert rms < 1e-6


def test_one_warp_flattens_instantaneous_frequency():
    fs = 1000.0
    t = np.arange(1000) / fs
    sig = Signal(np.cos(2 * np.pi * benchmark_phase(t)), fs)
    config = PipelineConfig(window_sigma=0.4)
    result = warping.iterate_warp(sig, config, n_iterations=1)

    def variation(inst_freq):
        inner = inst_freq[inst_freq.size // 10:-(inst_freq.size // 10)]
        return np.std(inner) / np.mean(inner)

    before = variation(result.components[0].inst_freq)
    tfr, _ = warping.spectrogram(result.warped.signal, config)
    after = variation(tfa.estimate_component(tfr, (0.5, 1.5)).inst_freq)
    assert before == pytest.approx(4.0 / np.sqrt(2) / 40.0, rel=0.1)
    assert after <= before / 10
