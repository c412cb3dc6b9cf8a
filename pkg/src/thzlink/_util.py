"""Small internal helpers shared across modules."""
from __future__ import annotations

import functools

import numpy as np


def vectorized(fn):
    """Lift a scalar float function (value, *params) to accept ndarrays in
    its first argument.  Scalars still come back as plain floats."""
    @functools.wraps(fn)
    def wrapper(x, *args, **kwargs):
        if np.ndim(x) == 0:
            return fn(float(x), *args, **kwargs)
        arr = np.asarray(x, dtype=float)
        out = np.empty(arr.shape, dtype=float)
        flat_in = arr.ravel()
        flat_out = out.ravel()
        for i in range(flat_in.size):
            flat_out[i] = fn(float(flat_in[i]), *args, **kwargs)
        return out
    return wrapper
