"""Counting functions N, pi, Pi, psi and finite-x checks of the standing hypotheses.

The verdicts produced here are empirical: the hypotheses are asymptotic, and
a flag only says whether the data up to the top of the grid looks consistent
with them under the declared thresholds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from ._numeric import fmt, fsum, prefix_fsums
from .errors import RangeError

DENSITY_TOL = 0.1
CHEBYSHEV_MAX = 5.0
LOG_DENSITY_BAND = (0.2, 5.0)
MERTENS_BAND = 2.5


@dataclass(frozen=True)
class PrimeCounts:
    x: float
    pi: int
    Pi: float
    psi: float
    mertens_sum: float


class IntegerCounts(NamedTuple):
    N: int
    log_density: float


@dataclass
class DiagnosticsReport:
    x: list
    N: list
    psi: list
    density_estimate: float
    chebyshev_sup: float
    mertens_deviation: list
    log_density_ratio: list
    hypothesis_flags: dict = field(default_factory=dict)

    def rows(self):
        mert = dict(self.mertens_deviation)
        ratio = dict(self.log_density_ratio)
        for x, n, psi in zip(self.x, self.N, self.psi):
            yield (x, n, n / x, psi, psi / x, mert.get(x, math.nan), ratio.get(x, math.nan))

    def write_csv(self, fh):
        fh.write("x,N,N_over_x,psi,psi_over_x,mertens_dev,log_density_ratio\n")
        for row in self.rows():
            fh.write(",".join(fmt(v) for v in row) + "\n")


def _prime_power_sums(system, xs):
    """pi, Pi, psi and the Mertens sum at every x in ``xs`` (any order)."""
    top = max(xs)
    pp = system.prime_powers(top)
    inv_nu = 1.0 / pp.nu
    log_p = pp.log_value / pp.nu
    mert = np.exp(-pp.log_value) * inv_nu
    is_prime = (pp.nu == 1).astype(float)
    if system.exact_mode:
        # exact integer comparison of p^nu against floor(x)
        vals = np.rint(np.exp(pp.log_value))
        stops = [int(np.searchsorted(vals, math.floor(x), side="right")) if x >= 1 else 0 for x in xs]
    else:
        from .system import log_threshold

        stops = [int(np.searchsorted(pp.log_value, log_threshold(x), side="right")) if x >= 1 else 0 for x in xs]
    order = sorted(range(len(xs)), key=lambda i: stops[i])
    sorted_stops = [stops[i] for i in order]
    cols = [prefix_fsums(arr, sorted_stops) for arr in (is_prime, inv_nu, log_p, mert)]
    out = [None] * len(xs)
    for j, i in enumerate(order):
        out[i] = PrimeCounts(float(xs[i]), int(round(cols[0][j])), cols[1][j], cols[2][j], cols[3][j])
    return out


def prime_counts(system, x):
    """pi(x), Pi(x), psi(x) and ``sum_{p^nu <= x} 1/(nu p^nu)``."""
    if x < 1:
        raise RangeError("x must be >= 1")
    return _prime_power_sums(system, [x])[0]


def integer_counts(table, x):
    """N(x) and the logarithmic sum ``sum_{n_k <= x} 1/n_k``."""
    n = table.count(x)
    return IntegerCounts(n, fsum(np.exp(-table.log_values[:n])))


def _integer_counts_many(table, xs):
    stops = [table.count(x) for x in xs]
    inv = np.exp(-table.log_values)
    logd = prefix_fsums(inv, stops)
    return stops, logd


def _check_grid(table, x_grid, min_points=8):
    xs = [float(x) for x in x_grid]
    if len(xs) < min_points:
        raise RangeError(f"grid needs at least {min_points} points, got {len(xs)}")
    if any(b <= a for a, b in zip(xs, xs[1:])):
        raise RangeError("grid must be strictly increasing")
    if xs[0] < 1:
        raise RangeError("grid points must be >= 1")
    table.check_x(xs[-1])
    return xs


def log_grid(lo, hi, points):
    return [float(v) for v in np.geomspace(lo, hi, points)]


def top_decade(xs):
    """Grid points within a factor 10 of the last one."""
    return [x for x in xs if x >= xs[-1] / 10]


def diagnostics(system, table, x_grid):
    """Evaluate the counting functions on a grid and flag the standing hypotheses.

    Flags (all over the top decade of the grid):

    * ``density``: ``max |N(x)/x - a| / a <= 0.1`` with ``a`` the mean of ``N(x)/x``.
    * ``chebyshev``: ``max psi(x)/x <= 5`` over the whole grid.
    * ``log_density``: ``(sum_{n<=x} 1/n) / log x`` stays in ``[0.2, 5]``.
    * ``weak_mertens``: ``|sum 1/(nu p^nu) - log log x| <= 2.5``.
    """
    xs = _check_grid(table, x_grid)
    stops, logd = _integer_counts_many(table, xs)
    pcs = _prime_power_sums(system, xs)
    ratios = [n / x for n, x in zip(stops, xs)]
    top = top_decade(xs)
    top_ratios = [r for r, x in zip(ratios, xs) if x in top]
    a = float(np.mean(top_ratios))
    cheb = max(pc.psi / x for pc, x in zip(pcs, xs))
    mert = [(x, pc.mertens_sum - math.log(math.log(x))) for pc, x in zip(pcs, xs) if x > math.e]
    ldr = [(x, ld / math.log(x)) for ld, x in zip(logd, xs) if x > 1]
    top_set = set(top)
    flags = {
        "density": a > 0 and max(abs(r - a) for r in top_ratios) / a <= DENSITY_TOL,
        "chebyshev": cheb <= CHEBYSHEV_MAX,
        "log_density": all(LOG_DENSITY_BAND[0] <= r <= LOG_DENSITY_BAND[1] for x, r in ldr if x in top_set)
        and any(x in top_set for x, _ in ldr),
        "weak_mertens": all(abs(d) <= MERTENS_BAND for x, d in mert if x in top_set)
        and any(x in top_set for x, _ in mert),
    }
    return DiagnosticsReport(
        x=xs,
        N=stops,
        psi=[pc.psi for pc in pcs],
        density_estimate=a,
        chebyshev_sup=cheb,
        mertens_deviation=mert,
        log_density_ratio=ldr,
        hypothesis_flags=flags,
    )


def density_estimate(table, x_top=None, points=16):
    """Mean of ``N(x)/x`` over ``points`` log-spaced x in the top decade below ``x_top``."""
    x_top = table.x_max if x_top is None else x_top
    lo = max(1.0, x_top / 10)
    xs = log_grid(lo, x_top, points) if x_top > lo else [x_top]
    return float(np.mean([table.count(x) / x for x in xs]))


@dataclass(frozen=True)
class L1Deviation:
    value: float
    remainder_bound: float
    sigma: float

    @property
    def wrong_density(self):
        return self.value * (self.sigma - 1) > 0.5

    def __float__(self):
        return self.value


def l1_deviation(table, a, sigma):
    """``int_1^{x_max} |N(x) - a x| x^{-sigma-1} dx`` integrated exactly piecewise.

    ``N`` is constant between consecutive distinct entry values, and on each
    such interval the integrand ``c x^{-sigma-1} - a x^{-sigma}`` changes
    sign at most once (at ``x = c/a``), so every piece has a closed form.
    The returned ``remainder_bound`` is ``2 a x_max^{1-sigma} / (sigma-1)``,
    a bound for the part of the integral beyond ``x_max``.
    """
    if not sigma > 1:
        raise RangeError(f"sigma must be > 1, got {sigma!r}")
    if not a > 0:
        raise RangeError(f"a must be > 0, got {a!r}")
    logs = table.log_values
    # N(x) on [u_j, u_{j+1}) equals the number of entries with log value <= log u_j
    brk = np.nonzero(np.diff(logs) > 0)[0]
    lo = np.concatenate([logs[brk], logs[-1:]]) if len(logs) else np.zeros(1)
    cnt = np.concatenate([brk + 1, [len(logs)]]).astype(float)
    hi = np.concatenate([lo[1:], [math.log(table.x_max)]])
    keep = hi > lo
    lo, hi, cnt = lo[keep], hi[keep], cnt[keep]
    # sign change of c - a x inside the interval
    cross = np.log(cnt / a)
    mid = np.clip(cross, lo, hi)
    s = sigma

    def piece(c, l0, l1):
        # int_{e^l0}^{e^l1} (c x^{-s-1} - a x^{-s}) dx, cancellation-safe
        d = l1 - l0
        t1 = c / s * np.exp(-s * l0) * (-np.expm1(-s * d))
        t2 = a / (s - 1) * np.exp((1 - s) * l0) * (-np.expm1((1 - s) * d))
        return t1 - t2

    left = piece(cnt, lo, mid)
    right = piece(cnt, mid, hi)
    value = fsum(np.abs(left)) + fsum(np.abs(right))
    bound = 2 * a * table.x_max ** (1 - sigma) / (sigma - 1)
    return L1Deviation(value, bound, sigma)
