"""Mean values of multiplicative measures: the Halász dichotomy and Wirsing's limit.

For ``dG = exp*(g dPi)`` the criterion sum

    S_alpha(x) = sum_{p^nu <= x} (1 - Re(g(p^nu) p^{-i nu alpha})) / (nu p^nu)

either stays bounded for some real ``alpha`` (then ``G(x)`` follows the
explicit prediction below) or diverges for all of them (then ``G(x) = o(x)``).
Convergence of a series cannot be observed at finite ``x``; the verdicts
here come from a declared slope test and are labelled as heuristic.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from ._numeric import fmt, fsum, prefix_fsums
from .arithmetic import measure
from .counting import density_estimate
from .errors import DomainError, HypothesisWarning, RangeError

MODES = ("exp_integral", "euler_product", "zero")
VERDICTS = ("converges", "diverges", "inconclusive")

# slope test on log-doublings x^(1/8) -> x^(1/4) -> x^(1/2) -> x
DIVERGE_SLOPE = 0.35
CONVERGE_SLOPE = 0.02
TIE_TOL = 1e-12


def _twist_phase(g, alpha, system, k, nu, log_value):
    """``g(p^nu) p^{-i nu alpha}`` with the function's own twist folded into one phase."""
    base = g._base("g", k, nu)
    turn = g.shift - alpha
    if turn == 0:
        return base
    return base * np.exp(1j * turn * log_value)


def _halasz_terms(g, alpha, system, x):
    """Prime powers up to ``x`` and the complex summands ``(1 - g p^{-i nu alpha}) / (nu p^nu)``."""
    pp = system.prime_powers(x)
    gv = _twist_phase(g, alpha, system, pp.index, pp.nu, pp.log_value)
    terms = (1 - gv) * np.exp(-pp.log_value) / pp.nu
    return pp, gv, terms


def _stops(system, pp, xs):
    from .system import log_threshold

    if system.exact_mode:
        vals = np.rint(np.exp(pp.log_value))
        return [int(np.searchsorted(vals, math.floor(x), side="right")) if x >= 1 else 0 for x in xs]
    return [int(np.searchsorted(pp.log_value, log_threshold(x), side="right")) if x >= 1 else 0 for x in xs]


def _check_grid(system, x_grid):
    xs = [float(x) for x in x_grid]
    if not xs:
        raise RangeError("grid is empty")
    if any(b <= a for a, b in zip(xs, xs[1:])):
        raise RangeError("grid must be strictly increasing")
    if xs[0] < 1:
        raise RangeError("grid points must be >= 1")
    if not system.covers(xs[-1]):
        raise RangeError(f"grid reaches x={xs[-1]:g} beyond the system limit {system.limit:g}")
    return xs


def doubling_points(x):
    """``x^(1/8), x^(1/4), x^(1/2), x``: three successive doublings of ``log x``."""
    return [x ** (1 / 8), x ** (1 / 4), x ** (1 / 2), float(x)]


def slope_verdict(sums_at_doublings):
    """Classify four partial sums taken at successive doublings of ``log x``.

    ``diverges`` when the mean increment over the three steps exceeds 0.35
    (a ``c log log x`` curve gains ``c log 2`` per step, so this fires for
    ``c`` above about 1/2); ``converges`` when the last increment is below
    0.02; ``inconclusive`` otherwise.
    """
    inc = np.diff(np.asarray(sums_at_doublings, dtype=float))
    if inc.mean() > DIVERGE_SLOPE:
        return "diverges"
    if inc[-1] < CONVERGE_SLOPE:
        return "converges"
    return "inconclusive"


@dataclass
class CriterionResult:
    alpha: float
    partial_sums: list
    verdict: str
    limit_estimate: float
    doubling_sums: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def write_csv(self, fh):
        fh.write("x,partial_sum\n")
        for x, s in self.partial_sums:
            fh.write(f"{fmt(x)},{fmt(s)}\n")


def criterion(g, alpha, system, x_grid):
    """Partial sums of the Halász criterion series along ``x_grid`` and a verdict.

    The verdict is read off the partial sums at the four log-doubling
    points below the top of the grid (see :func:`slope_verdict`).
    """
    xs = _check_grid(system, x_grid)
    top = xs[-1]
    pp, gv, terms = _halasz_terms(g, alpha, system, top)
    summand = terms.real
    notes = []
    if gv.size and np.max(np.abs(gv)) > 1 + 1e-12:
        msg = "|g| > 1 at some prime power: summands may be negative"
        notes.append(msg)
        warnings.warn(msg, HypothesisWarning, stacklevel=2)
    marks = doubling_points(top)
    probe = xs + marks
    stops = _stops(system, pp, probe)
    order = np.argsort(stops, kind="stable")
    sums = prefix_fsums(summand, [stops[i] for i in order])
    at = [0.0] * len(probe)
    for i, s in zip(order, sums):
        at[i] = s
    partial = list(zip(xs, at[: len(xs)]))
    dbl = at[len(xs) :]
    return CriterionResult(float(alpha), partial, slope_verdict(dbl), partial[-1][1], dbl, notes)


@dataclass
class AlphaSearch:
    best_alpha: float
    all: list
    note: str = ""

    @property
    def any_convergent(self):
        return any(r.verdict == "converges" for r in self.all)


def find_alpha(g, system, alpha_grid, x_max, points=16):
    """Grid search for the ``alpha`` with the smallest final criterion sum.

    Near-ties (relative 1e-12) go to the smallest ``|alpha|``, then to the
    positive sign.
    """
    alphas = [float(a) for a in alpha_grid]
    if not alphas:
        raise RangeError("alpha grid is empty")
    lo = max(1.0, x_max ** (1 / 8))
    xs = [float(v) for v in np.geomspace(lo, x_max, points)] if x_max > lo else [float(x_max)]
    results = [criterion(g, a, system, xs) for a in alphas]
    best_val = min(r.limit_estimate for r in results)
    tol = TIE_TOL * max(1.0, abs(best_val))
    near = [r for r in results if r.limit_estimate <= best_val + tol]
    best = min(near, key=lambda r: (abs(r.alpha), -r.alpha))
    note = "" if any(r.verdict == "converges" for r in results) else "no convergent alpha on grid"
    return AlphaSearch(best.alpha, results, note)


@dataclass
class MeanValuePrediction:
    """Predicted ``G(x)`` along a grid.

    ``c`` is ``pred(x) (1 + i alpha) / x^{1 + i alpha}`` at the largest grid
    point, so it carries the modulus-1 factor ``L`` at that scale.
    """

    c: complex
    alpha: float
    samples: list
    mode: str
    density: float = 1.0

    def at(self, x):
        for xx, v in self.samples:
            if xx == x:
                return v
        raise KeyError(x)


def _resolve_density(system, table, density):
    if density is not None:
        return float(density)
    if system.kind == "classical":
        return 1.0
    if table is None:
        raise ValueError("a table is needed to estimate the density")
    return density_estimate(table)


def _x_power(x, alpha):
    # x^{1+i alpha} / (1 + i alpha), exact for alpha = 0
    if alpha == 0:
        return complex(x)
    return x * complex(math.cos(alpha * math.log(x)), math.sin(alpha * math.log(x))) / complex(1, alpha)


def predict_halasz(f, alpha, system, table, x_grid, mode="exp_integral", density=None):
    """Predicted ``G(x)`` for ``dG = f dN = exp*(g dPi)`` at each grid point.

    ``exp_integral``: ``a x^{1+i alpha}/(1+i alpha) exp(-sum (1 - g p^{-i nu alpha})/(nu p^nu))``.
    ``euler_product``: the same prefactor times
    ``prod_{p <= x} (1 - 1/p)(1 + sum_nu f(p^nu) p^{-nu(1+i alpha)})`` with
    ``nu <= log x / log p``.  ``zero``: identically 0.

    ``a`` is ``density``; by default 1 for the classical system and the
    measured mean of ``N(x)/x`` over the top decade of ``table`` otherwise.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    xs = _check_grid(system, x_grid)
    alpha = float(alpha)
    if mode == "zero":
        return MeanValuePrediction(0j, alpha, [(x, 0j) for x in xs], mode, 0.0)
    a = _resolve_density(system, table, density)
    if mode == "exp_integral":
        pp, _, terms = _halasz_terms(f, alpha, system, xs[-1])
        stops = _stops(system, pp, xs)
        expo = prefix_fsums(terms, stops)
        factors = [complex(np.exp(-e)) for e in expo]
    else:
        factors = [_euler_factor(f, alpha, system, x) for x in xs]
    samples = [(x, a * _x_power(x, alpha) * fac) for x, fac in zip(xs, factors)]
    x_top, top = samples[-1]
    c = top * complex(1, alpha) / (x_top * complex(math.cos(alpha * math.log(x_top)), math.sin(alpha * math.log(x_top))))
    return MeanValuePrediction(c, alpha, samples, mode, a)


def _euler_factor(f, alpha, system, x):
    pp = system.prime_powers(x)
    if not pp.nu.size:
        return 1 + 0j
    fv = _twist_phase_f(f, alpha, system, pp.index, pp.nu, pp.log_value)
    terms = fv * np.exp(-pp.log_value)
    n_primes = int(pp.index.max()) + 1
    local = 1 + (
        np.bincount(pp.index, weights=terms.real, minlength=n_primes)
        + 1j * np.bincount(pp.index, weights=terms.imag, minlength=n_primes)
    )
    present = np.unique(pp.index)
    local = local[present]
    dead = np.nonzero(local == 0)[0]
    if dead.size:
        k = int(present[dead[0]])
        raise DomainError(f"Euler factor vanishes at prime p_{k + 1} = {system.primes[k]:g}")
    logs = np.log(local) + np.log1p(-np.exp(-system.log_primes[present]))
    return complex(np.exp(fsum(logs)))


def _twist_phase_f(f, alpha, system, k, nu, log_value):
    base = f._base("f", k, nu)
    turn = f.shift - alpha
    if turn == 0:
        return base
    return base * np.exp(1j * turn * log_value)


def wirsing(f, system, x, density=1.0):
    """``a exp(-sum_{p^nu <= x} (1 - g(p^nu)) / (nu p^nu))`` for real ``f``, or 0 on divergence.

    The criterion verdict at ``alpha = 0`` decides: ``diverges`` returns 0,
    anything else returns the exponential.
    """
    if not system.covers(x):
        raise RangeError(f"x={x:g} is beyond the system limit {system.limit:g}")
    pp = system.prime_powers(x)
    fv = f.f_values(system, pp.index, pp.nu)
    if fv.size and np.max(np.abs(fv.imag)) > 1e-12:
        raise DomainError("wirsing needs a real-valued f")
    res = criterion(f, 0.0, system, [float(x)])
    if res.verdict == "diverges":
        return 0.0
    return float(density) * math.exp(-res.limit_estimate)


@dataclass
class ComparisonRow:
    x: float
    G_over_x: complex
    prediction_over_x: complex
    abs_err: float


@dataclass
class Comparison:
    rows: list
    mode: str
    verdict: str
    prediction: MeanValuePrediction

    def write_csv(self, fh):
        fh.write("x,re_G_over_x,im_G_over_x,re_pred,im_pred,abs_err\n")
        for r in self.rows:
            vals = (r.x, r.G_over_x.real, r.G_over_x.imag, r.prediction_over_x.real, r.prediction_over_x.imag, r.abs_err)
            fh.write(",".join(fmt(v) for v in vals) + "\n")


def compare(f, table, alpha, x_grid, mode=None, density=None, weights=None):
    """Brute-force ``G(x)/x`` next to the predicted mean value at each grid point.

    With ``mode=None`` the criterion at ``alpha`` picks the branch: a
    ``diverges`` verdict selects ``zero``, anything else ``exp_integral``.
    ``weights`` may pass precomputed :class:`MeasureValues` for ``f``.
    """
    system = table.system
    xs = [float(x) for x in x_grid]
    for x in xs:
        table.check_x(x)
    verdict = criterion(f, alpha, system, xs).verdict
    if mode is None:
        mode = "zero" if verdict == "diverges" else "exp_integral"
    pred = predict_halasz(f, alpha, system, table, xs, mode, density)
    mv = weights if weights is not None else measure(f, table)
    sums = mv.summatories(xs)
    rows = []
    for (x, p), G in zip(pred.samples, sums):
        gx, px = G / x, p / x
        rows.append(ComparisonRow(x, gx, px, abs(gx - px)))
    return Comparison(rows, mode, verdict, pred)


__all__ = [
    "MODES",
    "CriterionResult",
    "AlphaSearch",
    "MeanValuePrediction",
    "Comparison",
    "ComparisonRow",
    "criterion",
    "find_alpha",
    "predict_halasz",
    "wirsing",
    "compare",
    "slope_verdict",
    "doubling_points",
]
