#
# SPDX-License-Identifier: GPL-2.0-only
#

import logging

from iwc import DataError
from iwc.misc import read_csv_columns, sampling_from_times
from iwc.pluginbase import SourcePlugin
from iwc.signal_model import Signal

logger = logging.getLogger('iwc')

class CsvSourcePlugin(SourcePlugin):
    """
    Read a headed CSV with columns 't,x', or a single 'x' column when
    the sampling rate is given with --fs.
    """

    name = 'csv'
    extensions = ('.csv', '.txt')

    @classmethod
    def do_read(cls, path, fs=None):
        columns = read_csv_columns(path)
        if 'x' not in columns:
            raise DataError("%s: no 'x' column (found %s)" %
                            (path, ", ".join(columns)))
        t0 = 0.0
        if 't' in columns:
            file_fs, t0 = sampling_from_times(path, columns['t'])
            if fs is None:
                fs = file_fs
            elif abs(fs - file_fs) > 1e-6 * fs:
                logger.warning("%s: --fs %g overrides the %g Hz time column",
                               path, fs, file_fs)
        elif fs is None:
            raise DataError("%s has no 't' column; give the sampling rate with --fs"
                            % path)
        return Signal(columns['x'], fs, t0)
