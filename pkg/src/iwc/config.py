#
# SPDX-License-Identifier: GPL-2.0-only
#
# DESCRIPTION
# Pipeline configuration for 'iwc'.  Sizes that depend on the signal
# (window, hop) are expressed in cycles of the expected fundamental so
# one configuration applies to the input signal and to every warped
# signal.  Values come from defaults, then an optional KEY=VALUE file,
# then command-line flags.
#

import dataclasses
import logging
import os
import re

from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

from iwc import ConfigError

logger = logging.getLogger('iwc')

OUTPUT_DIR_ENV = "IWC_OUTPUT_DIR"

OPTIONAL_FIELDS = ("window_length", "n_fft", "refine_range", "band")


def default_output_dir():
    return os.environ.get(OUTPUT_DIR_ENV, ".")


@dataclass
class PipelineConfig:
    window_sigma: float = 0.6
    window_length: Optional[float] = None
    hop: float = 0.05
    n_fft: Optional[int] = None
    harmonic: Union[int, str] = 1
    max_harmonic: int = 4
    max_iterations: int = 10
    entropy_tolerance: float = 0.01
    stop_on_stagnation: bool = True
    samples_per_cycle: int = 200
    k_max: int = 8
    replicates: int = 50
    seed: int = 0
    refine_range: Optional[Tuple[float, float]] = None
    refine_grid: int = 21
    synchronize: bool = True
    output_dir: str = field(default_factory=default_output_dir)
    band: Optional[Tuple[float, float]] = None
    ridge_penalty: float = 0.25
    demod_floor_quantile: float = 0.05
    edge_cycles: int = 2
    ch_floor: float = 10.0
    min_cluster_size: int = 2
    harmonic_count_max: int = 10
    cluster_features: str = "harmonics"
    subcycle_change_points: bool = True

    def validate(self):
        """Raise ConfigError on the first out-of-range field."""
        def check(cond, msg, *args):
            if not cond:
                raise ConfigError(msg % args)

        check(self.window_sigma > 0, "window_sigma must be positive, got %r",
              self.window_sigma)
        check(self.window_length is None or self.window_length > 0,
              "window_length must be positive, got %r", self.window_length)
        check(self.hop > 0, "hop must be positive, got %r", self.hop)
        check(self.n_fft is None or self.n_fft >= 3,
              "n_fft must be at least 3, got %r", self.n_fft)
        check(self.harmonic == "auto" or
              (isinstance(self.harmonic, int) and self.harmonic >= 1),
              "harmonic must be a positive integer or 'auto', got %r", self.harmonic)
        check(self.max_harmonic >= 1, "max_harmonic must be >= 1, got %r",
              self.max_harmonic)
        check(self.max_iterations >= 1, "max_iterations must be >= 1, got %r",
              self.max_iterations)
        check(self.entropy_tolerance >= 0,
              "entropy_tolerance must be non-negative, got %r", self.entropy_tolerance)
        check(self.samples_per_cycle >= 8,
              "samples_per_cycle must be >= 8, got %r", self.samples_per_cycle)
        check(self.k_max >= 2, "k_max must be >= 2, got %r", self.k_max)
        check(self.replicates >= 1, "replicates must be >= 1, got %r", self.replicates)
        check(self.seed >= 0, "seed must be non-negative, got %r", self.seed)
        if self.refine_range is not None:
            lo, hi = self.refine_range
            check(0 < lo < hi, "refine_range must satisfy 0 < lo < hi, got %r",
                  self.refine_range)
        check(self.refine_grid >= 3, "refine_grid must be >= 3, got %r",
              self.refine_grid)
        if self.band is not None:
            lo, hi = self.band
            check(0 <= lo < hi, "band must satisfy 0 <= lo < hi, got %r", self.band)
        check(self.ridge_penalty >= 0, "ridge_penalty must be non-negative, got %r",
              self.ridge_penalty)
        check(0 < self.demod_floor_quantile < 0.5,
              "demod_floor_quantile must be in (0, 0.5), got %r",
              self.demod_floor_quantile)
        check(self.edge_cycles >= 0, "edge_cycles must be non-negative, got %r",
              self.edge_cycles)
        check(self.ch_floor >= 0, "ch_floor must be non-negative, got %r", self.ch_floor)
        check(self.min_cluster_size >= 1, "min_cluster_size must be >= 1, got %r",
              self.min_cluster_size)
        check(1 <= self.harmonic_count_max < self.samples_per_cycle / 2,
              "harmonic_count_max must be in [1, samples_per_cycle/2), got %r",
              self.harmonic_count_max)
        check(self.cluster_features in ("harmonics", "rows"),
              "cluster_features must be 'harmonics' or 'rows', got %r",
              self.cluster_features)
        return self

    def to_dict(self):
        result = dataclasses.asdict(self)
        for key in ("band", "refine_range"):
            if result[key] is not None:
                result[key] = list(result[key])
        return result

    @classmethod
    def from_dict(cls, values):
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(values) - names)
        if unknown:
            raise ConfigError("Unknown configuration keys: %s" % ", ".join(unknown))
        values = dict(values)
        for key in ("band", "refine_range"):
            if values.get(key) is not None:
                values[key] = tuple(float(v) for v in values[key])
        return cls(**values).validate()

    def updated(self, **changes):
        """Copy with changes applied; None values are ignored."""
        changes = {k: v for k, v in changes.items() if v is not None}
        return dataclasses.replace(self, **changes).validate()


def parse_harmonic(value):
    if isinstance(value, int):
        return value
    if str(value).strip().lower() == "auto":
        return "auto"
    try:
        return int(value)
    except ValueError:
        raise ConfigError("harmonic must be a positive integer or 'auto', got %r" % value)


def parse_interval(value):
    """Parse 'lo,hi' into a float pair."""
    if isinstance(value, (tuple, list)):
        parts = list(value)
    else:
        parts = str(value).split(',')
    if len(parts) != 2:
        raise ConfigError("Expected an interval 'lo,hi', got %r" % (value,))
    try:
        return float(parts[0]), float(parts[1])
    except ValueError:
        raise ConfigError("Expected numeric interval bounds, got %r" % (value,))


def parse_bool(value):
    text = str(value).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise ConfigError("Expected a boolean, got %r" % value)


def _coerce(name, raw):
    """Convert a string from a configuration file to the field's type."""
    if raw.strip().lower() in ("none", ""):
        if name not in OPTIONAL_FIELDS:
            raise ConfigError("%s cannot be empty" % name)
        return None
    if name == "harmonic":
        return parse_harmonic(raw)
    if name in ("band", "refine_range"):
        return parse_interval(raw)
    if name in ("synchronize", "stop_on_stagnation", "subcycle_change_points"):
        return parse_bool(raw)
    if name in ("output_dir", "cluster_features"):
        return raw
    kind = {f.name: f.type for f in dataclasses.fields(PipelineConfig)}[name]
    try:
        if kind in (int, Optional[int]):
            return int(raw)
        return float(raw)
    except ValueError:
        raise ConfigError("Bad value %r for %s" % (raw, name))


class ConfigVars(dict):
    """
    KEY=VALUE pairs read from a shell-style env file.
    """
    def _parse_line(self, line, matcher=re.compile(r"^([a-zA-Z0-9\-_+./~]+)=(.*)")):
        line = line.strip()
        if not line or line.startswith('#') or "=" not in line:
            return
        match = matcher.match(line)
        if not match:
            return
        key, val = match.groups()
        self[key.replace('-', '_').lower()] = val.strip().strip('"')

    def load(self, fname):
        try:
            with open(fname) as varsfile:
                for line in varsfile:
                    self._parse_line(line)
        except OSError as err:
            raise ConfigError("Couldn't read configuration file %s: %s" %
                              (fname, err.strerror))
        logger.debug("read %d configuration values from %s", len(self), fname)
        return self


def load_config_file(fname, base=None):
    """Apply a KEY=VALUE file on top of base (default configuration)."""
    base = base or PipelineConfig()
    values = ConfigVars().load(fname)
    names = {f.name for f in dataclasses.fields(PipelineConfig)}
    unknown = sorted(set(values) - names)
    if unknown:
        raise ConfigError("Unknown keys in %s: %s" % (fname, ", ".join(unknown)))
    changes = {key: _coerce(key, raw) for key, raw in values.items()}
    return dataclasses.replace(base, **changes).validate()
