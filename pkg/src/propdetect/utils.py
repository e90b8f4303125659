import zlib

import numpy as np


def substream(seed, name):
    """Independent, reproducible generator for the named consumer of ``seed``."""
    return np.random.default_rng([int(seed), zlib.crc32(name.encode("utf-8"))])


def fmt_float(x):
    # repr round-trips exactly, which keeps saved files byte-stable
    return repr(float(x))


def overlaps(a_start, a_end, b_start, b_end):
    return a_start < b_end and b_start < a_end
