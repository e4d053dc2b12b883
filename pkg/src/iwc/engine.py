#
# SPDX-License-Identifier: GPL-2.0-only
#
# DESCRIPTION

# This module implements the engine used by 'iwc' to synthesize
# benchmark signals, analyze signal files and run evaluation sweeps.
# The cli module validates options and delegates here; everything that
# writes files lives in this module.
#

import logging
import os

import numpy as np

from iwc import DataError
from iwc import plot
from iwc import warping
from iwc.evaluation import run_sweep
from iwc.misc import mkdirhier, write_csv, write_json
from iwc.pipeline import analyze_signal
from iwc.pluginbase import PluginMgr, source_for_path
from iwc.signal_model import (NoiseSpec, add_noise, smoothed_brownian_phase,
                              synth_benchmark)

logger = logging.getLogger('iwc')

# harmonics shown above the fundamental in spectrogram figures
SPECTROGRAM_HARMONICS = 4


def iwc_synth(config, fs, duration, snr_db, seed, randomize_phase=False,
              kernel_std=0.05, prefix="benchmark", version=None):
    """
    Write <prefix>.csv (t,x) and <prefix>.json (ground truth) for the
    benchmark signal to config.output_dir.
    """
    phase_seed, noise_seed = np.random.SeedSequence(seed).spawn(2)
    n = int(np.floor(duration * fs + 1e-9))
    perturbation = None
    if randomize_phase:
        perturbation = smoothed_brownian_phase(phase_seed, kernel_std, np.arange(n) / fs)
    clean, truth = synth_benchmark(fs, duration, perturbation)
    noisy = add_noise(clean, NoiseSpec(snr_db, noise_seed))

    mkdirhier(config.output_dir)
    csv_path = os.path.join(config.output_dir, prefix + ".csv")
    json_path = os.path.join(config.output_dir, prefix + ".json")
    write_csv(csv_path, ["t", "x"], np.column_stack((noisy.times, noisy.samples)))
    write_json(json_path, {
        "version": version,
        "config": config.to_dict(),
        "parameters": {"fs": fs, "duration": duration, "snr_db": snr_db,
                       "seed": seed, "randomize_phase": randomize_phase,
                       "kernel_std": kernel_std},
        "ground_truth": truth.to_dict(),
    })
    logger.info("Wrote %s and %s", csv_path, json_path)
    return csv_path, json_path


def read_signal(path, source=None, fs=None):
    """Read an input file through its source plugin."""
    if not os.path.isfile(path):
        raise DataError("Input file %s not found" % path)
    name = source or source_for_path(path)
    plugin = PluginMgr.get_source(name)
    signal = plugin.do_read(path, fs)
    description = {"path": path, "source": name, "fs": signal.fs, "t0": signal.t0,
                   "samples": len(signal)}
    description.update(plugin.do_describe(signal))
    logger.info("Read %d samples at %g Hz from %s", len(signal), signal.fs, path)
    return signal, description


def _write_spectrogram(tfr, ridge_freq, fundamental, stem, time_label, freq_label):
    fmax = min(tfr.freqs[-1], SPECTROGRAM_HARMONICS * fundamental)
    times, freqs, db = plot.log_magnitude(tfr, fmax)
    header = ["t"] + ["%.17g" % f for f in freqs]
    write_csv(stem + ".csv", header, np.column_stack((times, db)))
    plot.plot_spectrogram(tfr, ridge_freq, stem + ".png", fmax,
                          time_label=time_label, freq_label=freq_label)


def _cycle_table(matrix, extra_name, extra):
    header = ["start", "end", extra_name] + ["c%d" % i for i in range(matrix.L)]
    table = np.column_stack((matrix.row_spans, extra, matrix.rows))
    return header, table


def iwc_analyze(input_path, config, source=None, fs=None, version=None):
    """
    Analyze one signal file and write results.json, the cycle and WSF
    CSVs, spectrograms before and after warping, and figures.
    """
    signal, description = read_signal(input_path, source, fs)
    result = analyze_signal(signal, config)
    cyc = result.cycles
    clusters = cyc.clusters
    out = config.output_dir
    mkdirhier(out)

    first = result.warp.history[0]
    harmonic = result.warp.harmonic
    _write_spectrogram(first.tfr, first.component.ridge_freq,
                       float(np.median(first.component.ridge_freq)) / harmonic,
                       os.path.join(out, "spectrogram_before"),
                       "time (s)", "frequency (Hz)")
    tfr, ridge_freq = warping.spectrogram(result.warped.signal, config)
    _write_spectrogram(tfr, ridge_freq, 1.0, os.path.join(out, "spectrogram_after"),
                       "warped time (cycles)", "frequency (1/cycle)")

    write_csv(os.path.join(out, "cycles.csv"),
              *_cycle_table(cyc.matrix, "label", clusters.labels))
    if cyc.aligned is not None:
        write_csv(os.path.join(out, "aligned.csv"),
                  *_cycle_table(cyc.aligned, "shift", cyc.shifts.shifts))

    L = cyc.matrix.L
    phase = np.arange(L) / L
    names = ["phase"] + ["wsf%d" % (k + 1) for k in range(clusters.k)]
    write_csv(os.path.join(out, "wsf_medians.csv"), names,
              np.column_stack((phase, clusters.medians.T)))
    write_csv(os.path.join(out, "wsf_regression.csv"), names,
              np.column_stack([phase] + [f.evaluate(L) for f in clusters.wsf_regressions]))

    plot.plot_cycle_matrix(cyc.matrix, cyc.aligned, os.path.join(out, "cycles.png"))
    plot.plot_warped_labels(cyc.clustered, clusters.labels,
                            os.path.join(out, "warped_labels.png"))
    plot.plot_wsfs(clusters.medians, clusters.wsf_regressions,
                   os.path.join(out, "wsfs.png"))

    results = {
        "version": version,
        "config": config.to_dict(),
        "input": description,
        "harmonic": harmonic,
        "iterations": len(result.warp.entropy_trace),
        "entropy_trace": result.warp.entropy_trace,
        "refine_factor": result.refine_factor,
        "svd_entropy": {"raw": cyc.raw_entropy, "synchronized": cyc.aligned_entropy},
        "k": clusters.k,
        "labels": clusters.labels,
        "change_points": clusters.change_points,
        "cycle_change_points": clusters.cycle_change_points,
        "cycle_spans": cyc.matrix.row_spans,
        "shifts": cyc.shifts.shifts if cyc.shifts is not None else None,
        "ch_scores": {str(k): v for k, v in clusters.ch_scores.items()},
        "wsfs": [{"index": k, "count": int(np.sum(clusters.labels == k)),
                  "regression": fit.to_dict()}
                 for k, fit in enumerate(clusters.wsf_regressions)],
    }
    path = write_json(os.path.join(out, "results.json"), results)
    logger.info("Found %d WSF(s) and %d change point(s); results in %s",
                clusters.k, len(clusters.change_points), path)
    return results


def iwc_eval(sweep_config, version=None, progress=True):
    """Run the sweep and write sweep.csv and sweep.json."""
    out = sweep_config.pipeline.output_dir
    report = run_sweep(sweep_config, output_dir=out, version=version,
                       progress=progress)
    logger.info("Wrote %d report rows to %s", len(report.rows), out)
    return report
