"""Truncated Mellin–Stieltjes transforms, the weighted average F, and a Perron check.

Every line sum runs over table entries in increasing order, so repeated
evaluations are bit-reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._numeric import fmt, fsum
from .arithmetic import PrimePowerFunction, measure
from .counting import log_grid
from .errors import NumericalError, RangeError

TAIL_SLACK = 1.1
DENSITY_TOL = 0.1
PERRON_HALVING_MAX = 0.5
PERRON_FLAG = 0.1


@dataclass(frozen=True)
class MellinEvaluation:
    """``value`` is the sum over ``n <= x_trunc``.

    ``tail_bound`` bounds the dropped part in absolute value assuming
    ``N(u) <= 1.1 a_hat u`` beyond ``x_trunc``; ``tail_estimate`` is the
    dropped part modelled as ``c_hat u^{i alpha} du`` and is what
    ``value + tail_estimate`` uses as the full transform.
    """

    s: complex
    value: complex
    x_trunc: float
    tail_bound: float
    tail_estimate: complex = 0j
    tail_reliable: bool = True

    @property
    def estimate(self):
        return self.value + self.tail_estimate


@dataclass(frozen=True)
class ContourSpec:
    x: float
    T: float
    step: float

    def __post_init__(self):
        if not self.x > math.e:
            raise RangeError("contour needs x > e so that sigma_x is finite")
        if not self.T > 0:
            raise RangeError("T must be positive")
        if not 0 < self.step <= self.T / 100:
            raise RangeError(f"step must be in (0, T/100], got {self.step!r}")

    @property
    def sigma_x(self):
        return 1 + 1 / math.log(self.x)


def _base_weights(f, table):
    """Weights of ``f`` with its twist removed, and that twist."""
    if f.shift:
        return measure(f.twisted(-f.shift), table).weights, f.shift
    return measure(f, table).weights, 0.0


class _Line:
    """Weights and log-values of one function, cut at ``x_trunc``, for repeated line sums."""

    def __init__(self, f, table, x_trunc=None, weights=None):
        x_trunc = table.x_max if x_trunc is None else float(x_trunc)
        table.check_x(x_trunc)
        self.table = table
        self.f = f
        self.x_trunc = x_trunc
        n = table.count(x_trunc)
        if weights is None:
            w, self.shift = _base_weights(f, table)
        else:
            w, self.shift = np.asarray(weights, dtype=complex), 0.0
        self.weights = w[:n]
        self.logs = table.log_values[:n]

    def value(self, s):
        s_eff = complex(s) - complex(0, self.shift)
        return fsum(self.weights * np.exp(-s_eff * self.logs))

    def log_weighted(self, s):
        s_eff = complex(s) - complex(0, self.shift)
        return fsum(self.weights * self.logs * np.exp(-s_eff * self.logs))


def _top_decade_mean(table, weights, shift, x_top, alpha, points=16):
    # mean of G(u) (1 + i alpha) / u^{1 + i alpha} over the top decade
    lo = max(1.0, x_top / 10)
    xs = log_grid(lo, x_top, points) if x_top > lo else [x_top]
    stops = [table.count(x) for x in xs]
    w = weights * np.exp(1j * shift * table.log_values[: len(weights)]) if shift else weights
    csum = np.concatenate([[0], np.cumsum(w[: max(stops)])])
    vals = [csum[s] * complex(1, alpha) * np.exp(-complex(1, alpha) * math.log(x)) for x, s in zip(xs, stops)]
    return complex(np.mean(vals))


def _density_info(table, x_top):
    lo = max(1.0, x_top / 10)
    xs = log_grid(lo, x_top, 16) if x_top > lo else [x_top]
    ratios = np.array([table.count(x) / x for x in xs])
    a = float(ratios.mean())
    ok = a > 0 and float(np.max(np.abs(ratios - a))) / a <= DENSITY_TOL
    return a, ok


def _evaluate(line, s, alpha, no_tail):
    s = complex(s)
    table, X = line.table, line.x_trunc
    value = line.value(s)
    if s.real <= 1:
        if not no_tail:
            raise RangeError(f"Re(s) = {s.real:g} <= 1: pass no_tail=True for a bare truncated sum")
        return MellinEvaluation(s, value, X, math.inf, complex(math.nan, math.nan), False)
    sigma = s.real
    a_hat, reliable = _density_info(table, X)
    sup = float(np.max(np.abs(line.weights))) if line.weights.size else 0.0
    bound = sup * TAIL_SLACK * a_hat * sigma * X ** (1 - sigma) / (sigma - 1)
    alpha = line.shift if alpha is None else float(alpha)
    c_hat = _top_decade_mean(table, line.weights, line.shift, X, alpha)
    shifted = s - complex(1, alpha)
    estimate = c_hat * np.exp(-shifted * math.log(X)) / shifted
    return MellinEvaluation(s, value, X, bound, complex(estimate), reliable)


def mellin(f, table, s, x_trunc=None, no_tail=False, alpha=None):
    """Truncated ``G_hat(s) = sum_{n_k <= x_trunc} f(n_k) n_k^{-s}`` with tail information.

    A twisted ``f`` is summed as its untwisted base at ``s - i*shift``, so
    ``mellin(twist(a), s)`` and ``zeta(s - i*a)`` run the same arithmetic.
    ``alpha`` sets the frequency of the tail model (default: the twist of ``f``).
    """
    return _evaluate(_Line(f, table, x_trunc), s, alpha, no_tail)


def zeta(table, s, x_trunc=None, no_tail=False):
    return mellin(PrimePowerFunction.preset("unity"), table, s, x_trunc, no_tail)


def mellin_log_derivative(f, table, s, x_trunc=None):
    """``G_hat'(s) = -sum_{n_k <= x_trunc} f(n_k) log(n_k) n_k^{-s}`` (no tail)."""
    return -_Line(f, table, x_trunc).log_weighted(s)


@dataclass(frozen=True)
class ResidueRow:
    sigma: float
    t: float
    value: complex
    residual: complex
    tail_bound: float

    @property
    def scaled(self):
        return self.residual * (self.sigma - 1)


def zeta_residue_scan(table, sigma_list, a, t_list, x_trunc=None):
    """Rows of ``zeta(s)`` (with tail estimate) and ``zeta(s) - a/(s-1)`` over a sigma/t grid."""
    if any(not s > 1 for s in sigma_list):
        raise RangeError("every sigma must be > 1")
    line = _Line(PrimePowerFunction.preset("unity"), table, x_trunc)
    rows = []
    for sigma in sigma_list:
        for t in t_list:
            s = complex(sigma, t)
            ev = _evaluate(line, s, 0.0, False)
            v = ev.estimate
            rows.append(ResidueRow(float(sigma), float(t), v, v - a / (s - 1), ev.tail_bound))
    return rows


def write_scan_csv(rows, fh):
    fh.write("sigma,t,re,im,tail_bound\n")
    for r in rows:
        fh.write(",".join(fmt(v) for v in (r.sigma, r.t, r.value.real, r.value.imag, r.tail_bound)) + "\n")


def F_of(f, table, x, weights=None):
    """``F(x) = sum_{n_k <= x} f(n_k) log(n_k) log(x / n_k)``."""
    table.check_x(x)
    n = table.count(x)
    w = measure(f, table).weights if weights is None else weights
    logs = table.log_values[:n]
    return fsum(w[:n] * logs * (math.log(x) - logs))


@dataclass(frozen=True)
class PerronResult:
    x: float
    contour: complex
    direct: complex
    rel_err: float
    halving_error: float

    @property
    def flagged(self):
        return self.rel_err > PERRON_FLAG

    def write_csv(self, fh):
        fh.write("x,re_contour,im_contour,re_direct,im_direct,rel_err\n")
        vals = (self.x, self.contour.real, self.contour.imag, self.direct.real, self.direct.imag, self.rel_err)
        fh.write(",".join(fmt(v) for v in vals) + "\n")


def perron_check(f, table, spec, x_trunc=None, chunk=2048):
    """Compare ``F(x)/x`` with its Perron integral along ``Re s = sigma_x``.

    The contour side is ``(1/2 pi) int_{-T}^{T} x^{s-1} S(s) / s^2 dt`` with
    ``S(s) = sum f(n) log(n) n^{-s}`` cut at ``x_trunc`` (default
    ``min(x_max, 10 x)``), integrated by the trapezoid rule at ``step/2``.
    Dropping every other node gives the ``step`` result; their difference,
    scaled like ``rel_err``, is the halving error and must stay below 0.5.
    """
    x = float(spec.x)
    table.check_x(x)
    if x_trunc is None:
        x_trunc = min(table.x_max, 10 * x)
    line = _Line(f, table, x_trunc)
    sigma = spec.sigma_x
    h = spec.step / 2
    m = int(round(spec.T / h))
    t = np.linspace(-spec.T, spec.T, 2 * m + 1)
    s_eff = sigma + 1j * (t - line.shift)
    wl = line.weights * line.logs
    vals = np.empty(t.size, dtype=complex)
    for i in range(0, t.size, chunk):
        block = s_eff[i : i + chunk]
        vals[i : i + chunk] = np.exp(-np.outer(block, line.logs)) @ wl
    s = sigma + 1j * t
    integrand = np.exp((s - 1) * math.log(x)) * vals / s**2 / (2 * math.pi)
    fine = _trapezoid(integrand, h)
    coarse = _trapezoid(integrand[::2], 2 * h)
    direct = F_of(f, table, x) / x
    scale = max(abs(direct), 1.0)
    halving = abs(fine - coarse) / scale
    if halving > PERRON_HALVING_MAX:
        raise NumericalError(f"Perron quadrature unresolved: step-halving difference {halving:.3g} > 0.5")
    return PerronResult(x, complex(fine), complex(direct), abs(fine - direct) / scale, halving)


def _trapezoid(y, h):
    return h * (fsum(y) - 0.5 * (y[0] + y[-1]))


@dataclass(frozen=True)
class EquivalenceRow:
    x: float
    lhs_resid: float
    rhs_resid: float


def equivalence_report(f, table, c, alpha, x_grid, weights=None):
    """Residuals of the averaged mean value and of the transform, at matched scales.

    ``lhs_resid = |sum_{n<=x} f(n) log(x/n) - c x^{1+i alpha}/(1+i alpha)^2| / x`` and
    ``rhs_resid = |G_hat(sigma_x + i alpha) - c/(sigma_x - 1)| (sigma_x - 1)`` with
    ``sigma_x = 1 + 1/log x``, the transform taken over the whole table plus its
    tail estimate.
    """
    xs = [float(x) for x in x_grid]
    for x in xs:
        if not x > math.e:
            raise RangeError("equivalence rows need x > e")
        table.check_x(x)
    w = measure(f, table).weights if weights is None else weights
    line = _Line(f, table)
    alpha = float(alpha)
    rows = []
    for x in xs:
        n = table.count(x)
        lx = math.log(x)
        lhs = fsum(w[:n] * (lx - table.log_values[:n]))
        model = c * x * np.exp(1j * alpha * lx) / complex(1, alpha) ** 2
        sigma = 1 + 1 / lx
        ev = _evaluate(line, complex(sigma, alpha), alpha, False)
        rhs = abs(ev.estimate - c / (sigma - 1)) * (sigma - 1)
        rows.append(EquivalenceRow(x, abs(lhs - model) / x, rhs))
    return rows


def write_equivalence_csv(rows, fh):
    fh.write("x,lhs_resid,rhs_resid\n")
    for r in rows:
        fh.write(f"{fmt(r.x)},{fmt(r.lhs_resid)},{fmt(r.rhs_resid)}\n")


__all__ = [
    "MellinEvaluation",
    "ContourSpec",
    "ResidueRow",
    "PerronResult",
    "EquivalenceRow",
    "mellin",
    "zeta",
    "mellin_log_derivative",
    "zeta_residue_scan",
    "F_of",
    "perron_check",
    "equivalence_report",
    "write_scan_csv",
    "write_equivalence_csv",
]
