#
# SPDX-License-Identifier: GPL-2.0-only
#
# DESCRIPTION
# This module implements some basic help invocation functions along
# with the bulk of the help topic text for the iwc tool.
#

import logging

from iwc.pluginbase import PluginMgr, PLUGIN_TYPES

logger = logging.getLogger('iwc')


def get_iwc_plugins_help():
    """
    Combine iwc_plugins_help with the help for every known
    source plugin.
    """
    result = iwc_plugins_help
    for plugin_type in PLUGIN_TYPES:
        result += '\n\n%s PLUGINS\n\n' % plugin_type.upper()
        for name, plugin in sorted(PluginMgr.get_plugins(plugin_type).items()):
            result += "\n %s plugin:\n" % name
            if plugin.__doc__:
                result += plugin.__doc__
            else:
                result += "\n    %s is missing docstring\n" % plugin
    return result


def invoke_subcommand(args, parser, subcommands):
    """
    Dispatch to subcommand handler.
    """
    if not args.command:
        logger.error("No subcommand specified, exiting")
        parser.print_help()
        return 1
    elif args.command not in subcommands:
        logger.error("Unsupported subcommand %s, exiting\n", args.command)
        parser.print_help()
        return 1
    else:
        subcmd = subcommands[args.command]
        usage = subcmd[1]
        subcmd[0](args, usage)
    return 0


##
# iwc help and usage strings
##

iwc_usage = """

 Estimate wave-shape functions and their change points from an
 oscillatory signal by iterative warping and clustering

 usage: iwc [--version] | [--help] | [COMMAND [ARGS]]

 Current 'iwc' commands are:
    help              Show help for command or one of the topics (see below)
    synth             Synthesize the three-harmonic benchmark signal
    analyze           Analyze a signal file
    eval              Run the Monte-Carlo evaluation sweep

 Help topics:
    overview          iwc overview - General overview of iwc
    plugins           iwc plugins - Signal source plugins
    config            iwc config - Configuration keys and files
    formats           iwc formats - Output file formats
"""

iwc_help_usage = """

 usage: iwc help <subcommand>

 This command displays detailed help for the specified subcommand.
"""

iwc_synth_usage = """

 Synthesize the three-harmonic benchmark signal

 usage: iwc synth [-o <DIRNAME>] [--fs <HZ>] [--duration <S>] [--snr <DB>]
            [--seed <N>] [--randomize-phase] [--kernel-std <S>]
            [--prefix <NAME>] [-D]

 Writes <prefix>.csv (columns t,x) and <prefix>.json (ground truth).

 See 'iwc help synth' for more detailed instructions.
"""

iwc_synth_help = """

NAME
    iwc synth - Synthesize the three-harmonic benchmark signal

SYNOPSIS
    iwc synth [-o <DIRNAME>] [--fs <HZ>] [--duration <S>] [--snr <DB>]
        [--seed <N>] [--randomize-phase] [--kernel-std <S>]
        [--prefix <NAME>] [-D]

DESCRIPTION
    This command writes the benchmark signal

        x(t) = cos(2 pi phi) + A(t) cos(4 pi phi) + B(t) cos(6 pi phi)

    with phi(t) = 40 t + cos(8 pi t) / (2 pi) and logistic envelopes A
    and B switching at t = 1/3 and t = 2/3.  The WSF changes from
    (1, 0, 0) to (1, 1, 1) to (1, 0, 1) at those two change points.

    --snr adds white Gaussian noise at the given SNR in dB; 'inf' (the
    default) or 'none' writes the noiseless signal.

    --randomize-phase adds a smoothed Brownian perturbation to phi,
    with a Gaussian smoothing kernel of --kernel-std seconds.

    --seed selects the noise and phase realization; the same
    arguments always produce identical files.

    The files are written to the directory given with -o, to
    $IWC_OUTPUT_DIR if set, or to the current directory.
"""

iwc_analyze_usage = """

 Analyze a signal file

 usage: iwc analyze <input> [-o <DIRNAME>] [-s <SOURCE>] [--fs <HZ>]
            [-c <CONFIG FILE>] [--harmonic <N|auto>] [--band <LO,HI>]
            [--max-iterations <N>] [--refine-range <LO,HI>]
            [--no-synchronize] [...] [-D]

 Warps, segments, synchronizes and clusters the cycles of <input> and
 writes the estimated WSFs and change points.

 See 'iwc help analyze' for more detailed instructions.
"""

iwc_analyze_help = """

NAME
    iwc analyze - Analyze a signal file

SYNOPSIS
    iwc analyze <input> [-o <DIRNAME>] [-s <SOURCE>] [--fs <HZ>]
        [-c <CONFIG FILE>] [--harmonic <N|auto>] [--band <LO,HI>]
        [--max-iterations <N>] [--refine-range <LO,HI>]
        [--no-synchronize] [...] [-D]

DESCRIPTION
    This command estimates the wave-shape functions (WSFs) of <input>
    and the times at which the signal switches between them.

    The signal is repeatedly warped so that its fundamental becomes
    1-periodic and divided by its estimated amplitude.  Warping stops
    when the SVD entropy of the matrix of cycles stops decreasing by
    more than --entropy-tolerance (relative), or after
    --max-iterations passes.  The cycles are then optionally aligned by
    synchronization of their cyclic shifts and clustered with k-means,
    the number of clusters chosen by the Calinski-Harabasz criterion.

    <input> is read by a signal source plugin (see 'iwc help
    plugins').  The plugin is chosen from the file extension unless
    -s/--source is given: .wav files are read as mono PCM, everything
    else as CSV with a header naming the columns t and x.  A CSV
    without a t column needs --fs.

    --harmonic selects the harmonic whose phase warps the signal; 'auto'
    picks the one with the largest spectrogram magnitude.  Use 2 for
    signals such as ECG whose second harmonic dominates.

    --band gives the frequency interval (Hz) searched for the
    fundamental in the input signal; by default it is centered on the
    strongest periodogram peak.

    --refine-range LO,HI rescales the final warped time by the factor
    in [LO, HI] that minimizes the SVD entropy of the cycles.

    Every PipelineConfig key (see 'iwc help config') has a matching
    kebab-case flag.  -c/--config reads KEY=VALUE lines first; flags
    override them.

    Results are written to the directory given with -o, to
    $IWC_OUTPUT_DIR if set, or to the current directory (see 'iwc help
    formats').
"""

iwc_eval_usage = """

 Run the Monte-Carlo evaluation sweep

 usage: iwc eval [-o <DIRNAME>] [--snrs <DB,...>] [--realizations <N>]
            [--iterations <N,...>] [--seed <N>] [-j <WORKERS>] [-D]

 Scores change points and WSF estimates on randomized benchmark
 signals for every SNR and iteration count.

 See 'iwc help eval' for more detailed instructions.
"""

iwc_eval_help = """

NAME
    iwc eval - Run the Monte-Carlo evaluation sweep

SYNOPSIS
    iwc eval [-o <DIRNAME>] [--snrs <DB,...>] [--realizations <N>]
        [--iterations <N,...>] [--seed <N>] [-j <WORKERS>] [-D]

DESCRIPTION
    For each SNR (default 30,20,10 dB) this command synthesizes
    --realizations (default 100) benchmark signals with randomized
    phase and independent noise, warps each one max(--iterations)
    times and clusters the cycles after each requested iteration count
    (default 1,2,3).

    A detected change point is a true positive when it lies within one
    cycle (1/40 s) of a true one.  Each report row gives the mean F1,
    the RMSE of each true change point over the realizations that
    detected it, the median RMSE of each estimated WSF against the
    truth, and the median SVD entropy.

    Realizations are seeded from --seed, the SNR index and the
    realization index, so a fixed seed gives an identical report.
    -j runs realizations in parallel worker processes.

    Writes sweep.csv and sweep.json (see 'iwc help formats').
"""

iwc_plugins_help = """

NAME
    iwc plugins - Signal source plugins

DESCRIPTION
    Input files are read by source plugins.  A source plugin is a
    class deriving from iwc.pluginbase.SourcePlugin with a 'name'
    attribute; defining it registers it.  It implements

        do_read(cls, path, fs=None)   return an iwc Signal
        do_describe(cls, signal)      return extra input metadata

    and may list the file extensions it claims in 'extensions'.

    Plugins are loaded from the package's plugins/source directory and
    from <dir>/source for every directory in $IWC_PLUGIN_PATH
    (colon-separated).
"""

iwc_config_help = """

NAME
    iwc config - Configuration keys and files

DESCRIPTION
    Window and hop sizes are in cycles of the expected fundamental,
    so the same values apply to the input and to every warped signal.

        window_sigma          Gaussian window sigma (0.6)
        window_length         window length, default 8 sigma (none)
        hop                   frame hop (0.05)
        n_fft                 FFT size, default 4x window rounded up
                              to a power of two (none)
        harmonic              warping harmonic or 'auto' (1)
        max_harmonic          candidates for 'auto' (4)
        max_iterations        warping passes (10)
        entropy_tolerance     relative SVD entropy decrease (0.01)
        stop_on_stagnation    stop on small decrease (true)
        samples_per_cycle     samples per warped cycle (200)
        k_max                 largest number of clusters (8)
        replicates            k-means restarts (50)
        seed                  random seed (0)
        refine_range          period refinement factors (none)
        refine_grid           period refinement grid size (21)
        synchronize           align cycles before clustering (true)
        output_dir            output directory ($IWC_OUTPUT_DIR or .)
        band                  fundamental search band in Hz (none)
        ridge_penalty         ridge jump penalty per squared bin (0.25)
        demod_floor_quantile  amplitude floor quantile (0.05)
        edge_cycles           cycles dropped at each end (2)
        ch_floor              Calinski-Harabasz score for k > 1 (10)
        min_cluster_size      smallest reported cluster (2)
        harmonic_count_max    largest regression harmonic count, and
                              harmonics kept for clustering (10)
        cluster_features      cluster on 'harmonics' (mean and the
                              first harmonic_count_max harmonics of each
                              cycle) or raw 'rows' (harmonics)
        subcycle_change_points  place each change point inside the
                              cycles around the label jump (true)

    A configuration file holds one KEY=VALUE per line; '#' starts a
    comment, intervals are written LO,HI and 'none' clears an optional
    value.
"""

iwc_formats_help = """

NAME
    iwc formats - Output file formats

DESCRIPTION
    All CSV files have a header row and full double precision.  All
    JSON files embed the resolved configuration and the iwc version.

    synth
        <prefix>.csv           t,x
        <prefix>.json          ground truth: per-segment cosine
                               coefficients, change points, phase and
                               envelopes

    analyze
        results.json           harmonic, entropy trace, k, labels,
                               change points (refined and at cycle
                               starts), cycle spans, shifts, per-WSF
                               regression coefficients at zero
                               fundamental phase and their shift
        cycles.csv             start,end,label,c0..c{L-1}
        aligned.csv            start,end,shift,c0..c{L-1}
        wsf_medians.csv        phase,wsf1..wsfk (cluster medians)
        wsf_regression.csv     phase,wsf1..wsfk (regression fits)
        spectrogram_before.*   input spectrogram (PNG, and CSV of dB
                               magnitude: t, one column per frequency)
        spectrogram_after.*    same for the final warped signal
        cycles.png             raw and synchronized cycle matrices
        warped_labels.png      warped signal colored by cluster
        wsfs.png               medians and regressions

    eval
        sweep.csv              snr_db, iterations, n_realizations,
                               n_failed, f1_mean, rmse_cp1, rmse_cp2,
                               wsf_rmse_1..3, svd_entropy_median
        sweep.json             the same rows plus failures and notes
"""

iwc_overview_help = """

NAME
    iwc overview - General overview of iwc

DESCRIPTION
    Many physiological and acoustic signals repeat a non-sinusoidal
    pattern, the wave-shape function (WSF), at a slowly varying rate
    and amplitude.  When the pattern itself changes, for example an
    abnormal heart beat or a change of vowel, the times of change are
    of interest together with the patterns.

    iwc estimates the phase of one harmonic from the ridge of the
    spectrogram, resamples the signal at the level sets of that phase
    (warping) so every cycle has the same length, and divides by the
    estimated amplitude.  Repeating this makes the cycles more alike,
    which shows as a lower SVD entropy of the matrix of cycles.  The
    cycles are then clustered; each cluster is one WSF and each
    change of cluster between consecutive cycles is a change point,
    placed inside the two cycles around it by fitting their medians.

    'iwc synth' writes the benchmark signal, 'iwc analyze' runs the
    algorithm on a file and 'iwc eval' measures its accuracy on
    randomized benchmark signals.
"""

iwc_help_help = """

NAME
    iwc help - Show help for a command or topic

SYNOPSIS
    iwc help <subcommand or topic>
"""

iwc_main_help = """
 Estimate wave-shape functions and their change points from an
 oscillatory signal by iterative warping and clustering

 usage: iwc [--version] | [--help] | [COMMAND [ARGS]]

 Current 'iwc' commands are:
    help              Show help for command or one of the topics (see below)
    synth             Synthesize the three-harmonic benchmark signal
    analyze           Analyze a signal file
    eval              Run the Monte-Carlo evaluation sweep

 Help topics:
    overview          iwc overview - General overview of iwc
    plugins           iwc plugins - Signal source plugins
    config            iwc config - Configuration keys and files
    formats           iwc formats - Output file formats

 Use 'iwc help <command or topic>' for details.
"""
