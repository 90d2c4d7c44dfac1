"""User-facing unit conversions.

Internally angular frequencies are in rad/s and times in seconds.  Configs and
CSV files use linear MHz (multiplied by 2*pi internally) and microseconds.
"""

import numpy as np

TWO_PI = 2.0 * np.pi
MHZ = TWO_PI * 1e6
GHZ = TWO_PI * 1e9
KHZ = TWO_PI * 1e3
US = 1e-6


def mhz(x):
    """Linear MHz to rad/s."""
    return x * MHZ


def to_mhz(w):
    return w / MHZ


def us(x):
    return x * US


def to_us(t):
    return t / US
