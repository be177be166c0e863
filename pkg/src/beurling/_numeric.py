"""Compensated summation helpers shared by the numeric modules."""

import math

import numpy as np


def fsum(values):
    """Correctly rounded sum of a real or complex array."""
    arr = np.asarray(values)
    if np.iscomplexobj(arr):
        return complex(math.fsum(arr.real.tolist()), math.fsum(arr.imag.tolist()))
    return math.fsum(arr.tolist())


def prefix_fsums(values, stops):
    """Return ``[fsum(values[:s]) for s in stops]`` for non-decreasing ``stops``.

    Each segment between consecutive stops is summed once, so the cost is
    linear in ``max(stops)`` rather than in ``len(stops) * max(stops)``.
    """
    arr = np.asarray(values)
    is_complex = np.iscomplexobj(arr)
    out = []
    re_parts, im_parts = [], []
    prev = 0
    for s in stops:
        if s < prev:
            raise ValueError("stops must be non-decreasing")
        seg = arr[prev:s]
        if is_complex:
            re_parts.append(math.fsum(seg.real.tolist()))
            im_parts.append(math.fsum(seg.imag.tolist()))
            out.append(complex(math.fsum(re_parts), math.fsum(im_parts)))
        else:
            re_parts.append(math.fsum(seg.tolist()))
            out.append(math.fsum(re_parts))
        prev = s
    return out


def fmt(x):
    """Format a real number with 17 significant digits for CSV output."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    return f"{x:.17g}"
