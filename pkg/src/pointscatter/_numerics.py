"""Small numerical kernels shared across modules."""
import numpy as np


def compensated_sum(x, axis=-1):
    """Sum along ``axis`` with error-free pairwise transformations.

    Each pairwise addition is split into its rounded sum and exact rounding
    error (Knuth's TwoSum); the errors are accumulated separately and added
    back at the end.  The result is as accurate as summing in roughly twice
    the working precision, and the operation order is fixed, so results are
    bitwise reproducible.
    """
    x = np.moveaxis(np.asarray(x, dtype=float), axis, -1)
    if x.shape[-1] == 0:
        return np.zeros(x.shape[:-1])
    err = np.zeros(x.shape[:-1])
    while x.shape[-1] > 1:
        if x.shape[-1] % 2:
            pad = np.zeros(x.shape[:-1] + (1,))
            x = np.concatenate([x, pad], axis=-1)
        a = x[..., 0::2]
        b = x[..., 1::2]
        s = a + b
        bb = s - a
        err = err + ((a - (s - bb)) + (b - bb)).sum(axis=-1)
        x = s
    return x[..., 0] + err


def extrapolate_to_zero(h, values):
    """Neville extrapolation of ``values(h)`` to ``h = 0``.

    Returns the extrapolated value and the change contributed by the last
    tableau column, which serves as an error estimate.
    """
    h = np.asarray(h, dtype=float)
    t = list(np.asarray(values, dtype=float))
    n = len(t)
    if n == 1:
        return t[0], np.inf
    prev = t[-1]
    for k in range(1, n):
        for i in range(n - k):
            t[i] = (h[i + k] * t[i] - h[i] * t[i + 1]) / (h[i + k] - h[i])
        if k == n - 2:
            prev = t[0]
    return t[0], abs(t[0] - prev)
