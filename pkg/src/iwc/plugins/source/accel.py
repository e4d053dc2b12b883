#
# SPDX-License-Identifier: GPL-2.0-only
#

import logging

import numpy as np

from iwc import DataError
from iwc.misc import read_csv_columns, sampling_from_times
from iwc.pluginbase import SourcePlugin
from iwc.signal_model import Signal

logger = logging.getLogger('iwc')

# accepted names of the three axis columns
AXES = (('x', 'y', 'z'), ('a', 'b', 'c'), ('ax', 'ay', 'az'))

class AccelSourcePlugin(SourcePlugin):
    """
    Read a three-axis accelerometer CSV ('t' plus x,y,z / a,b,c /
    ax,ay,az columns) and analyze the vector magnitude
    sqrt(x^2 + y^2 + z^2).
    """

    name = 'accel'

    @classmethod
    def do_read(cls, path, fs=None):
        columns = read_csv_columns(path)
        for names in AXES:
            if all(n in columns for n in names):
                break
        else:
            raise DataError("%s: no accelerometer axis columns (found %s)" %
                            (path, ", ".join(columns)))
        t0 = 0.0
        if 't' in columns:
            file_fs, t0 = sampling_from_times(path, columns['t'])
            fs = fs or file_fs
        elif fs is None:
            raise DataError("%s has no 't' column; give the sampling rate with --fs"
                            % path)
        magnitude = np.sqrt(sum(columns[n] ** 2 for n in names))
        logger.debug("accel: magnitude of columns %s", ", ".join(names))
        return Signal(magnitude, fs, t0)

    @classmethod
    def do_describe(cls, signal):
        return {"derived": "vector magnitude"}
