#
# SPDX-License-Identifier: GPL-2.0-only
#
# DESCRIPTION
# PNG figures written by 'iwc analyze': grayscale spectrograms with the
# ridge overlaid, cycle-matrix images, and the warped signal with
# cycles colored by cluster.
#

import logging

import matplotlib as mpl
mpl.use('Agg')

import matplotlib.pyplot as plt
import numpy as np

from iwc import IwcError

logger = logging.getLogger('iwc')

mpl.rcParams.update({
    "font.size": 9,
    "axes.labelsize": 9,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "savefig.dpi": 120,
    "savefig.bbox": "tight",
})


def _save(fig, path):
    try:
        fig.savefig(path)
    except OSError as err:
        raise IwcError("Couldn't write %s: %s" % (path, err.strerror or err))
    finally:
        plt.close(fig)
    logger.debug("wrote %s", path)
    return path


def log_magnitude(tfr, fmax=None):
    """(times, freqs, 20 log10 |V|) restricted to freqs <= fmax."""
    keep = tfr.freqs <= (fmax if fmax is not None else tfr.freqs[-1])
    mag = np.abs(tfr.values[:, keep])
    floor = max(mag.max() * 1e-8, np.finfo(float).tiny)
    return tfr.times, tfr.freqs[keep], 20 * np.log10(np.maximum(mag, floor))


def plot_spectrogram(tfr, ridge_freq, path, fmax=None, title=None, time_label="time (s)",
                     freq_label="frequency (Hz)"):
    times, freqs, db = log_magnitude(tfr, fmax)
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.pcolormesh(times, freqs, db.T, cmap="gray_r", shading="nearest")
    ax.plot(tfr.times, ridge_freq, color="red", linewidth=1)
    ax.set_xlabel(time_label)
    ax.set_ylabel(freq_label)
    ax.set_ylim(freqs[0], freqs[-1])
    if title:
        ax.set_title(title)
    return _save(fig, path)


def plot_cycle_matrix(raw, aligned, path):
    """Raw and (if given) synchronized cycle matrices side by side."""
    panels = [("cycles", raw)] + ([("synchronized", aligned)] if aligned is not None else [])
    fig, axes = plt.subplots(1, len(panels), figsize=(3.5 * len(panels), 3.5),
                             squeeze=False)
    for ax, (title, matrix) in zip(axes[0], panels):
        ax.imshow(matrix.rows, aspect="auto", cmap="gray_r", interpolation="nearest",
                  extent=(0, 1, matrix.P, 0))
        ax.set_xlabel("phase (cycles)")
        ax.set_ylabel("cycle")
        ax.set_title(title)
    return _save(fig, path)


def plot_warped_labels(matrix, labels, path):
    """Warped signal drawn cycle by cycle, colored by cluster label."""
    colors = plt.get_cmap("tab10")
    fig, ax = plt.subplots(figsize=(8, 2.5))
    tau = np.arange(matrix.L) / matrix.L
    for index, (row, label) in enumerate(zip(matrix.rows, labels)):
        ax.plot(index + tau, row, color=colors(int(label) % 10), linewidth=0.8)
    handles = [plt.Line2D([], [], color=colors(k % 10), label="WSF %d" % (k + 1))
               for k in range(int(np.max(labels)) + 1)]
    ax.legend(handles=handles, loc="upper right", fontsize=7)
    ax.set_xlabel("warped time (cycles)")
    return _save(fig, path)


def plot_wsfs(medians, fits, path):
    """Cluster medians with their trigonometric regressions."""
    k, L = medians.shape
    tau = np.arange(L) / L
    fig, axes = plt.subplots(1, k, figsize=(2.5 * k, 2.5), squeeze=False, sharey=True)
    for index, ax in enumerate(axes[0]):
        ax.plot(tau, medians[index], color="black", linewidth=1, label="median")
        ax.plot(tau, fits[index].evaluate(L, on_median=True), color="red", linewidth=1,
                linestyle="--", label="regression")
        ax.set_title("WSF %d" % (index + 1))
        ax.set_xlabel("phase (cycles)")
    axes[0][0].legend(fontsize=7)
    return _save(fig, path)
