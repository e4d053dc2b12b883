#
# SPDX-License-Identifier: GPL-2.0-only
#
# DESCRIPTION
# This module provides a place to collect various iwc-related utils:
# directory creation and the CSV/JSON writers used for every output
# file.
#
"""Miscellaneous functions."""

import errno
import json
import logging
import os

import numpy as np

from iwc import DataError, IwcError

logger = logging.getLogger('iwc')

# full double precision in CSV output
CSV_FORMAT = "%.17g"


def mkdirhier(directory):
    """Create a directory like 'mkdir -p', but does not complain if
    directory already exists like os.makedirs
    """
    try:
        os.makedirs(directory)
    except OSError as err:
        if err.errno != errno.EEXIST or not os.path.isdir(directory):
            raise IwcError("Couldn't create directory %s: %s" %
                           (directory, err.strerror))


def _to_builtin(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    raise TypeError("%r is not JSON serializable" % (obj,))


def write_json(path, obj):
    try:
        with open(path, "w") as out:
            json.dump(obj, out, indent=2, sort_keys=True, default=_to_builtin)
            out.write("\n")
    except OSError as err:
        raise IwcError("Couldn't write %s: %s" % (path, err.strerror))
    logger.debug("wrote %s", path)
    return path


def write_csv(path, header, data):
    """Write a 2-D array (columns as given) with a header row."""
    data = np.asarray(data, dtype=float)
    if data.ndim == 1:
        data = data[:, None]
    try:
        np.savetxt(path, data, fmt=CSV_FORMAT, delimiter=",",
                   header=",".join(header), comments="")
    except OSError as err:
        raise IwcError("Couldn't write %s: %s" % (path, err.strerror))
    logger.debug("wrote %s", path)
    return path


def write_rows(path, columns, rows):
    """Write a list of dicts as CSV with the given column order."""
    def cell(row, column):
        value = row.get(column)
        return np.nan if value is None else value

    table = np.array([[cell(row, c) for c in columns] for row in rows],
                     dtype=float).reshape(len(rows), len(columns))
    return write_csv(path, columns, table)


def read_csv_columns(path):
    """Read a headed numeric CSV into {column name: array}."""
    try:
        with open(path) as src:
            header = src.readline()
    except OSError as err:
        raise DataError("Couldn't read %s: %s" % (path, err.strerror))
    names = [n.strip().lower() for n in header.strip().split(',')]
    if not names or not all(names):
        raise DataError("%s: missing or malformed CSV header" % path)
    try:
        table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except ValueError as err:
        raise DataError("%s: %s" % (path, err))
    if table.shape[0] == 0:
        raise DataError("%s holds no samples" % path)
    if table.shape[1] != len(names):
        raise DataError("%s: header names %d columns, rows have %d" %
                        (path, len(names), table.shape[1]))
    return {name: table[:, i] for i, name in enumerate(names)}


def sampling_from_times(path, t):
    """(fs, t0) of a uniform time column."""
    if t.size < 2:
        raise DataError("%s: need at least 2 samples to infer the sampling rate" % path)
    dt = np.diff(t)
    step = np.median(dt)
    if step <= 0 or np.max(np.abs(dt - step)) > 1e-3 * step:
        raise DataError("%s: time column is not uniformly sampled" % path)
    return 1.0 / step, float(t[0])
