"""Linear-interpolation downsampling."""

from __future__ import annotations

import numpy as np


class InvalidRate(ValueError):
    pass


def downsample(signal, fs_in: float, fs_out: float) -> np.ndarray:
    """Resample onto the k/fs_out grid by linear interpolation.

    Output covers every grid instant up to the last input time:
    len = floor((n_in - 1) * fs_out / fs_in) + 1. Equal rates return the
    input unchanged.
    """
    if fs_out <= 0 or fs_in <= 0:
        raise InvalidRate("rates must be positive")
    if fs_in < fs_out:
        raise InvalidRate(f"cannot upsample: fs_in={fs_in} < fs_out={fs_out}")
    x = np.asarray(signal, dtype=float)
    if x.size == 0:
        raise InvalidRate("empty signal")
    if fs_in == fs_out:
        return x.copy()
    n_out = int(np.floor((x.size - 1) * fs_out / fs_in)) + 1
    t_out = np.arange(n_out) / fs_out
    t_in = np.arange(x.size) / fs_in
    return np.interp(t_out, t_in, x)
