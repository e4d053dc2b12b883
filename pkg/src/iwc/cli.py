#!/usr/bin/env python3
#
# SPDX-License-Identifier: GPL-2.0-only
#
# DESCRIPTION 'iwc' estimates the wave-shape functions of an
# oscillatory signal and the times at which they change, by iterative
# warping and clustering of its cycles.  Invoking it without any
# arguments will display help screens for the 'iwc' command and list
# the available 'iwc' subcommands.
#
__version__ = "0.1.0"

# Python Standard Library modules
import argparse
import json
import logging
import math
import sys

from iwc import IwcError, ConfigError
from iwc import engine
from iwc import help as hlp
from iwc.config import (PipelineConfig, load_config_file, parse_harmonic,
                        parse_interval)
from iwc.evaluation import SweepConfig


def iwc_logger():
    """Create and configure iwc logger."""
    logger = logging.getLogger('iwc')
    logger.setLevel(logging.INFO)

    if not logger.handlers:
        handler = logging.StreamHandler()
        formatter = logging.Formatter('[%(filename)s:%(lineno)d] %(levelname)s: %(message)s')
        handler.setFormatter(formatter)
        logger.addHandler(handler)

    return logger

logger = iwc_logger()


##
# argparse types
##

def _positive(convert, name):
    def check(arg):
        try:
            value = convert(arg)
        except ValueError:
            raise argparse.ArgumentTypeError("%s: %r is not a number" % (name, arg))
        if value <= 0:
            raise argparse.ArgumentTypeError("%s must be positive, got %s" % (name, arg))
        return value
    check.__name__ = name
    return check

positive_int = _positive(int, "positive integer")
positive_float = _positive(float, "positive number")


def nonnegative_int(arg):
    try:
        value = int(arg)
    except ValueError:
        raise argparse.ArgumentTypeError("%r is not an integer" % arg)
    if value < 0:
        raise argparse.ArgumentTypeError("expected a non-negative integer, got %s" % arg)
    return value


def snrtype(arg):
    """
    Custom type for ArgumentParser
    SNR in dB; 'inf' or 'none' means no noise (None)
    """
    if arg.strip().lower() in ("inf", "none"):
        return None
    try:
        value = float(arg)
    except ValueError:
        raise argparse.ArgumentTypeError("SNR must be a number, 'inf' or 'none', got %r" % arg)
    return None if math.isinf(value) else value


def intervaltype(arg):
    """
    Custom type for ArgumentParser
    Converts 'lo,hi' to a float pair with 0 <= lo < hi
    """
    try:
        lo, hi = parse_interval(arg)
    except ConfigError as err:
        raise argparse.ArgumentTypeError(str(err))
    if not 0 <= lo < hi:
        raise argparse.ArgumentTypeError("interval must satisfy 0 <= lo < hi, got %r" % arg)
    return lo, hi


def harmonictype(arg):
    try:
        value = parse_harmonic(arg)
    except ConfigError as err:
        raise argparse.ArgumentTypeError(str(err))
    if value != "auto" and value < 1:
        raise argparse.ArgumentTypeError("harmonic must be >= 1, got %r" % arg)
    return value


def listtype(convert):
    """Comma-separated list of convert(item)."""
    def parse(arg):
        items = [item for item in arg.split(',') if item.strip()]
        if not items:
            raise argparse.ArgumentTypeError("empty list")
        return tuple(convert(item) for item in items)
    return parse


def booltype(arg):
    text = arg.strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError("expected a boolean, got %r" % arg)


##
# configuration
##

# (flag, type, help) for every PipelineConfig field settable from the
# command line; dest is the field name.  output_dir comes from -o.
config_options = [
    ("--window-sigma", positive_float, "Gaussian window sigma in cycles"),
    ("--window-length", positive_float, "window length in cycles"),
    ("--hop", positive_float, "frame hop in cycles"),
    ("--n-fft", positive_int, "FFT size"),
    ("--harmonic", harmonictype, "warping harmonic or 'auto'"),
    ("--max-harmonic", positive_int, "largest harmonic tried by 'auto'"),
    ("--max-iterations", positive_int, "largest number of warping passes"),
    ("--entropy-tolerance", float, "relative SVD entropy decrease below which warping stops"),
    ("--stop-on-stagnation", booltype, "stop warping once the entropy stagnates"),
    ("--samples-per-cycle", positive_int, "samples per warped cycle"),
    ("--k-max", positive_int, "largest number of clusters"),
    ("--replicates", positive_int, "k-means restarts"),
    ("--seed", nonnegative_int, "random seed"),
    ("--refine-range", intervaltype, "period refinement factors LO,HI"),
    ("--refine-grid", positive_int, "period refinement grid size"),
    ("--synchronize", booltype, "align cycles before clustering"),
    ("--band", intervaltype, "fundamental search band LO,HI in Hz"),
    ("--ridge-penalty", float, "ridge jump penalty per squared bin"),
    ("--demod-floor-quantile", float, "amplitude floor quantile"),
    ("--edge-cycles", nonnegative_int, "cycles dropped at each end"),
    ("--ch-floor", float, "Calinski-Harabasz score needed for k > 1"),
    ("--min-cluster-size", positive_int, "smallest reported cluster"),
    ("--harmonic-count-max", positive_int, "largest regression harmonic count"),
    ("--cluster-features", str, "cluster on 'harmonics' or raw 'rows'"),
    ("--subcycle-change-points", booltype, "place change points inside cycles"),
]


def _option_dest(flag):
    return flag[2:].replace('-', '_')


def add_config_arguments(subparser, skip=()):
    subparser.add_argument("-c", "--config", dest="config_file",
                      help="KEY=VALUE configuration file (see 'iwc help config')")
    for flag, kind, text in config_options:
        if flag in skip:
            continue
        subparser.add_argument(flag, dest=_option_dest(flag), type=kind,
                          default=None, help=text)
    subparser.add_argument("--no-synchronize", dest="synchronize",
                      action="store_const", const=False,
                      help="cluster the cycles without aligning them")


def resolve_config(args):
    """
    PipelineConfig from defaults, then --config, then flags.
    """
    config = PipelineConfig()
    config_file = getattr(args, "config_file", None)
    if config_file:
        config = load_config_file(config_file, config)
    changes = {}
    for flag, _, _ in config_options:
        dest = _option_dest(flag)
        if getattr(args, dest, None) is not None:
            changes[dest] = getattr(args, dest)
    if getattr(args, "outdir", None):
        changes["output_dir"] = args.outdir
    config = config.updated(**changes)
    logger.debug("configuration: %s", config.to_dict())
    return config


##
# subcommands
##

def iwc_synth_subcommand(args, usage_str):
    """
    Command-line handling for benchmark synthesis.  The real work is
    done by engine.iwc_synth()
    """
    config = resolve_config(args)
    engine.iwc_synth(config, args.fs, args.duration, args.snr, args.seed,
                     randomize_phase=args.randomize_phase,
                     kernel_std=args.kernel_std, prefix=args.prefix,
                     version=__version__)


def iwc_analyze_subcommand(args, usage_str):
    """
    Command-line handling for signal analysis.  The real work is done
    by engine.iwc_analyze()
    """
    config = resolve_config(args)
    engine.iwc_analyze(args.input, config, source=args.source, fs=args.fs,
                       version=__version__)


def iwc_eval_subcommand(args, usage_str):
    """
    Command-line handling for the evaluation sweep.  The real work is
    done by engine.iwc_eval()
    """
    config = resolve_config(args)
    sweep = SweepConfig(pipeline=config, master_seed=config.seed,
                        workers=args.workers)
    if args.snrs is not None:
        sweep.snrs = args.snrs
    if args.realizations is not None:
        sweep.n_realizations = args.realizations
    if args.iterations is not None:
        sweep.iterations = args.iterations
    engine.iwc_eval(sweep, version=__version__, progress=not args.no_progress)


def iwc_help_subcommand(args, usage_str):
    """
    Command-line handling for the help subcommand: print the requested
    topic, or the main help without one.
    """
    if args.help_topic is None:
        print(hlp.iwc_main_help)
        return
    topic = helptopics[args.help_topic]
    topic[0](topic[1], topic[2])


def iwc_help_topic_subcommand(usage_str, help_str):
    """
    Display function for help 'sub-subcommands'.
    """
    if callable(help_str):
        help_str = help_str()
    print(help_str)
    return


iwc_help_topic_usage = """
"""

helptopics = {
    "plugins":   [iwc_help_topic_subcommand,
                  iwc_help_topic_usage,
                  hlp.get_iwc_plugins_help],
    "overview":  [iwc_help_topic_subcommand,
                  iwc_help_topic_usage,
                  hlp.iwc_overview_help],
    "config":    [iwc_help_topic_subcommand,
                  iwc_help_topic_usage,
                  hlp.iwc_config_help],
    "formats":   [iwc_help_topic_subcommand,
                  iwc_help_topic_usage,
                  hlp.iwc_formats_help],
    "synth":     [iwc_help_topic_subcommand,
                  iwc_help_topic_usage,
                  hlp.iwc_synth_help],
    "analyze":   [iwc_help_topic_subcommand,
                  iwc_help_topic_usage,
                  hlp.iwc_analyze_help],
    "eval":      [iwc_help_topic_subcommand,
                  iwc_help_topic_usage,
                  hlp.iwc_eval_help],
}


def add_common_arguments(subparser):
    subparser.add_argument("-o", "--outdir", dest="outdir", default=None,
                      help="directory to write results to "
                           "(default: $IWC_OUTPUT_DIR or .)")
    subparser.add_argument("-D", "--debug", dest="debug", action="store_true",
                      default=argparse.SUPPRESS, help="output debug information")


def iwc_init_parser_synth(subparser):
    add_common_arguments(subparser)
    subparser.add_argument("--fs", type=positive_float, default=6000.0,
                      help="sampling rate in Hz")
    subparser.add_argument("--duration", type=positive_float, default=1.0,
                      help="duration in seconds")
    subparser.add_argument("--snr", type=snrtype, default=None,
                      help="SNR in dB, or 'inf' for no noise")
    subparser.add_argument("--seed", type=nonnegative_int, default=0,
                      help="noise and phase seed")
    subparser.add_argument("--randomize-phase", action="store_true", default=False,
                      help="add a smoothed Brownian phase perturbation")
    subparser.add_argument("--kernel-std", type=positive_float, default=0.05,
                      help="std (s) of the Gaussian kernel smoothing the perturbation")
    subparser.add_argument("--prefix", default="benchmark",
                      help="output file name prefix")
    return


def iwc_init_parser_analyze(subparser):
    subparser.add_argument("input", help="signal file")
    add_common_arguments(subparser)
    subparser.add_argument("-s", "--source", dest="source",
                      help="source plugin (default: from the file extension)")
    subparser.add_argument("--fs", type=positive_float, default=None,
                      help="sampling rate for inputs without a time column")
    add_config_arguments(subparser)
    return


def iwc_init_parser_eval(subparser):
    add_common_arguments(subparser)
    subparser.add_argument("--snrs", type=listtype(float), default=None,
                      help="comma-separated SNRs in dB (default 30,20,10)")
    subparser.add_argument("--realizations", type=positive_int, default=None,
                      help="realizations per SNR (default 100)")
    subparser.add_argument("--iterations", type=listtype(positive_int), default=None,
                      help="comma-separated iteration counts (default 1,2,3)")
    subparser.add_argument("-j", "--workers", type=positive_int, default=1,
                      help="worker processes")
    subparser.add_argument("--no-progress", action="store_true", default=False,
                      help="do not show a progress bar")
    add_config_arguments(subparser)
    return


def iwc_init_parser_help(subparser):
    helpparsers = subparser.add_subparsers(dest='help_topic', help=hlp.iwc_usage)
    for helptopic, (_, _, help_str) in helptopics.items():
        helpparsers.add_parser(helptopic, help=None if callable(help_str) else help_str)
    return


subcommands = {
    "synth":     [iwc_synth_subcommand,
                  hlp.iwc_synth_usage,
                  hlp.iwc_synth_help,
                  iwc_init_parser_synth],
    "analyze":   [iwc_analyze_subcommand,
                  hlp.iwc_analyze_usage,
                  hlp.iwc_analyze_help,
                  iwc_init_parser_analyze],
    "eval":      [iwc_eval_subcommand,
                  hlp.iwc_eval_usage,
                  hlp.iwc_eval_help,
                  iwc_init_parser_eval],
    "help":      [iwc_help_subcommand,
                  hlp.iwc_help_usage,
                  hlp.iwc_help_help,
                  iwc_init_parser_help]
}


def init_parser(parser):
    parser.add_argument("--version", action="version",
        version="%(prog)s {version}".format(version=__version__))
    parser.add_argument("-D", "--debug", dest="debug", action="store_true",
        default=False, help="output debug information")

    subparsers = parser.add_subparsers(dest='command', help=hlp.iwc_usage)
    for subcmd in subcommands:
        help_str = subcommands[subcmd][2]
        if callable(help_str):
            help_str = None
        subparser = subparsers.add_parser(subcmd, help=help_str)
        subcommands[subcmd][3](subparser)

class IwcArgumentParser(argparse.ArgumentParser):
     def format_help(self):
         return hlp.iwc_main_help


def report_error(err):
    """Log err and write it to stderr as one JSON line."""
    logger.error(err)
    sys.stderr.write(json.dumps({"error": type(err).__name__,
                                 "message": str(err),
                                 "exit_code": err.exit_code}) + "\n")
    return err.exit_code


def main(argv=None):
    if argv is None:
        argv = sys.argv[1:]
    parser = IwcArgumentParser(
        prog="iwc", description="iwc version %s" % __version__)

    init_parser(parser)

    args = parser.parse_args(argv)

    if args.debug:
        logger.setLevel(logging.DEBUG)
    else:
        logger.setLevel(logging.INFO)

    try:
        return hlp.invoke_subcommand(args, parser, subcommands)
    except IwcError as err:
        return report_error(err)


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
