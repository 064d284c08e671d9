"""GHz <-> rad/s conversion. Files use GHz (f = omega / 2 pi); code uses rad/s."""

import numpy as np

GHZ = 2.0 * np.pi * 1e9
MHZ = 2.0 * np.pi * 1e6


def from_ghz(f):
    return np.asarray(f, dtype=float) * GHZ if np.ndim(f) else float(f) * GHZ


def to_ghz(omega):
    return np.asarray(omega, dtype=float) / GHZ if np.ndim(omega) else float(omega) / GHZ
