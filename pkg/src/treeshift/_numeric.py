"""Small numerical helpers shared across modules."""

import math

import numpy as np


def _neumaier_grouped(values, ptr):
    counts = np.diff(ptr)
    n = counts.size
    total = np.zeros(n)
    comp = np.zeros(n)
    if n == 0 or values.size == 0:
        return total
    starts = ptr[:-1]
    for j in range(int(counts.max())):
        rows = np.flatnonzero(counts > j)
        x = values[starts[rows] + j]
        s = total[rows]
        t = s + x
        comp[rows] += np.where(np.abs(s) >= np.abs(x), (s - t) + x, (x - t) + s)
        total[rows] = t
    return total + comp


def grouped_sum(values, ptr):
    """Compensated sum of ``values[ptr[i]:ptr[i+1]]`` for every group ``i``.

    Works slot by slot across all groups at once, so the cost is
    ``max group size`` vectorized passes rather than a Python loop per group.
    """
    values = np.asarray(values)
    ptr = np.asarray(ptr, dtype=np.int64)
    if np.iscomplexobj(values):
        return _neumaier_grouped(values.real.astype(float), ptr) + 1j * _neumaier_grouped(
            values.imag.astype(float), ptr
        )
    return _neumaier_grouped(values.astype(float), ptr)


def fsum_complex(values):
    values = np.asarray(values)
    if np.iscomplexobj(values):
        return complex(math.fsum(values.real.tolist()), math.fsum(values.imag.tolist()))
    return math.fsum(values.tolist())


def log_sum_exp(logs):
    """``log(sum(exp(logs)))`` with compensated summation of the shifted terms."""
    logs = np.asarray(logs, dtype=float)
    if logs.size == 0:
        return -math.inf
    top = float(logs.max())
    if not math.isfinite(top):
        return top
    return top + math.log(math.fsum(np.exp(logs - top).tolist()))
