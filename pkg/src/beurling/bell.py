"""Bell-polynomial conversions between f and g on the powers of one prime.

For a multiplicative measure ``f dN = exp*(g dPi)`` the values on the powers
of a single prime are linked by

    1 + sum_nu f(p^nu) z^nu = exp( sum_nu g(p^nu) z^nu / nu ),

which in Bell-polynomial form reads

    f(p^nu) = B_nu(0! g(p), 1! g(p^2), ..., (nu-1)! g(p^nu)) / nu!
    g(p^nu) = sum_j (-1)^(j-1) (j-1)!/(nu-1)! B_{nu,j}(1! f(p), 2! f(p^2), ...).

All routines accept arrays whose last axis runs over ``nu = 1..nu_max`` and
broadcast over any leading axes (one row per prime).
"""

from math import comb

import numpy as np


def complete_bell(x):
    """Complete Bell polynomials ``B_0..B_n`` at ``x = (x_1, ..., x_n)``.

    Uses ``B_{m+1} = sum_{j=0}^{m} C(m, j) B_{m-j} x_{j+1}``.
    """
    x = np.asarray(x)
    n = x.shape[-1]
    dtype = np.result_type(x.dtype, float)
    out = np.zeros(x.shape[:-1] + (n + 1,), dtype=dtype)
    out[..., 0] = 1
    for m in range(n):
        acc = np.zeros(x.shape[:-1], dtype=dtype)
        for j in range(m + 1):
            acc = acc + comb(m, j) * out[..., m - j] * x[..., j]
        out[..., m + 1] = acc
    return out


def partial_bell(x):
    """Partial Bell polynomials ``B_{n,k}`` for ``0 <= k <= n <= len(x)``.

    Returns an array of shape ``(..., n+1, n+1)`` indexed ``[..., n, k]``,
    filled by ``B_{n,k} = sum_{i=1}^{n-k+1} C(n-1, i-1) x_i B_{n-i,k-1}``.
    """
    x = np.asarray(x)
    n = x.shape[-1]
    dtype = np.result_type(x.dtype, float)
    out = np.zeros(x.shape[:-1] + (n + 1, n + 1), dtype=dtype)
    out[..., 0, 0] = 1
    for m in range(1, n + 1):
        for k in range(1, m + 1):
            acc = np.zeros(x.shape[:-1], dtype=dtype)
            for i in range(1, m - k + 2):
                acc = acc + comb(m - 1, i - 1) * x[..., i - 1] * out[..., m - i, k - 1]
            out[..., m, k] = acc
    return out


def bell_f_from_g(g_values):
    """Values ``f(p^nu)``, ``nu = 1..nu_max``, from ``g(p^nu)``.

    Runs the complete-Bell recurrence with every ``B_m`` divided by ``m!``
    (so ``b_{m+1} = (1/(m+1)) sum_j b_{m-j} g_{j+1}``), which keeps the
    intermediate values O(1) instead of factorial-sized.
    """
    g = np.asarray(g_values, dtype=complex)
    n = g.shape[-1]
    if n < 1:
        raise ValueError("need at least one value (nu_max >= 1)")
    b = np.zeros(g.shape[:-1] + (n + 1,), dtype=complex)
    b[..., 0] = 1
    for m in range(n):
        acc = np.zeros(g.shape[:-1], dtype=complex)
        for j in range(m + 1):
            acc = acc + b[..., m - j] * g[..., j]
        b[..., m + 1] = acc / (m + 1)
    return b[..., 1:]


def bell_g_from_f(f_values):
    """Values ``g(p^nu)``, ``nu = 1..nu_max``, from ``f(p^nu)``.

    With ``c_{n,k} = k!/n! * B_{n,k}(1! f_1, 2! f_2, ...)`` the partial-Bell
    recurrence becomes ``c_{n,k} = (k/n) sum_i i f_i c_{n-i,k-1}`` and
    ``g_n = n * sum_k (-1)^(k-1) c_{n,k} / k``.
    """
    f = np.asarray(f_values, dtype=complex)
    n = f.shape[-1]
    if n < 1:
        raise ValueError("need at least one value (nu_max >= 1)")
    lead = f.shape[:-1]
    c = np.zeros(lead + (n + 1, n + 1), dtype=complex)
    c[..., 0, 0] = 1
    for m in range(1, n + 1):
        for k in range(1, m + 1):
            acc = np.zeros(lead, dtype=complex)
            for i in range(1, m - k + 2):
                acc = acc + i * f[..., i - 1] * c[..., m - i, k - 1]
            c[..., m, k] = acc * (k / m)
    g = np.zeros(lead + (n,), dtype=complex)
    for m in range(1, n + 1):
        acc = np.zeros(lead, dtype=complex)
        for k in range(1, m + 1):
            acc = acc + ((-1) ** (k - 1) / k) * c[..., m, k]
        g[..., m - 1] = m * acc
    return g
