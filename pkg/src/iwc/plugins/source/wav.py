#
# SPDX-License-Identifier: GPL-2.0-only
#

import logging

import numpy as np

from scipy.io import wavfile

from iwc import DataError
from iwc.pluginbase import SourcePlugin
from iwc.signal_model import Signal

logger = logging.getLogger('iwc')

# full-scale value of each integer PCM type
PCM_SCALE = {np.dtype(np.int16): 2.0 ** 15,
             np.dtype(np.int32): 2.0 ** 31}

class WavSourcePlugin(SourcePlugin):
    """
    Read a mono 16/32-bit PCM (or float) WAV file; the sampling rate
    comes from the header.
    """

    name = 'wav'
    extensions = ('.wav',)

    @classmethod
    def do_read(cls, path, fs=None):
        try:
            rate, data = wavfile.read(path)
        except (OSError, ValueError) as err:
            raise DataError("Couldn't read WAV file %s: %s" % (path, err))
        if data.ndim != 1:
            raise DataError("%s has %d channels; only mono WAV is supported" %
                            (path, data.shape[1]))
        if data.dtype in PCM_SCALE:
            samples = data / PCM_SCALE[data.dtype]
        elif data.dtype.kind == 'f':
            samples = data.astype(float)
        else:
            raise DataError("%s: unsupported WAV sample type %s" % (path, data.dtype))
        if fs is not None and fs != rate:
            logger.warning("%s: ignoring --fs %g, header says %d Hz", path, fs, rate)
        return Signal(samples, float(rate))

    @classmethod
    def do_describe(cls, signal):
        return {"channels": 1}
