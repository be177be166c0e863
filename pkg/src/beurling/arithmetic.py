"""Multiplicative arithmetic measures on a generalized number system.

A :class:`PrimePowerFunction` fixes the values of a multiplicative function
on prime powers, either as ``f`` (so that ``dG = f dN``) or as ``g`` (so that
``dG = exp*(g dPi)``); the other side follows from the Bell relations.  A
:class:`MeasureValues` holds the resulting per-entry weights of ``dG`` on an
:class:`~beurling.system.IntegerTable`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._numeric import fmt, fsum, prefix_fsums
from .bell import bell_f_from_g, bell_g_from_f
from .errors import ConfigError, DomainError, NumericalError, RangeError, ResourceError
from .system import DEFAULT_CAP, log_threshold

PRESETS = ("unity", "moebius", "liouville", "squarefree", "twist", "gconst")


def _gconst_f(c, nu_max):
    # coefficients of (1 - z)^(-c): prod_{j<nu} (c + j) / (j + 1)
    out = np.empty(nu_max + 1, dtype=complex)
    out[0] = 1
    for j in range(nu_max):
        out[j + 1] = out[j] * (c + j) / (j + 1)
    return out


@dataclass(frozen=True, eq=False)
class PrimePowerFunction:
    """Values of a multiplicative function on the prime powers ``p_k^nu``.

    ``shift`` applies the twist ``n -> n^{i*shift}`` on top of the base
    values, so ``twist(a)`` is ``unity`` shifted by ``a`` and
    ``f.twisted(b)`` adds ``b`` to the shift without touching the base.
    """

    kind: str
    name: str | None = None
    params: dict = field(default_factory=dict)
    prime_values: np.ndarray | None = None
    values: dict | None = None
    side: str = "f"
    shift: float = 0.0
    _cache: dict = field(default_factory=dict, repr=False)

    # -- constructors -----------------------------------------------------

    @classmethod
    def preset(cls, name, **params):
        if name not in PRESETS:
            raise ConfigError(f"unknown preset {name!r}; choose from {PRESETS}")
        if name == "twist":
            if "alpha" not in params:
                raise ConfigError("preset 'twist' needs parameter 'alpha'")
            alpha = float(params["alpha"])
            return cls("preset", "twist", {"alpha": alpha}, shift=alpha)
        if name == "gconst":
            if "c" not in params:
                raise ConfigError("preset 'gconst' needs parameter 'c'")
            return cls("preset", "gconst", {"c": complex(params["c"])})
        if params:
            raise ConfigError(f"preset {name!r} takes no parameters, got {sorted(params)}")
        return cls("preset", name)

    @classmethod
    def completely_multiplicative(cls, prime_values):
        return cls("completely_multiplicative", prime_values=np.asarray(prime_values, dtype=complex))

    @classmethod
    def from_table(cls, values, side="f"):
        """Table-backed function; ``values`` maps ``(k, nu)`` (0-based k) to a complex."""
        if side not in ("f", "g"):
            raise ConfigError("side must be 'f' or 'g'")
        clean = {}
        for (k, nu), v in values.items():
            if int(nu) < 1 or int(k) < 0:
                raise ConfigError(f"invalid prime-power key ({k}, {nu})")
            clean[(int(k), int(nu))] = complex(v)
        return cls("table", values=clean, side=side)

    def twisted(self, beta):
        """This function multiplied pointwise by ``n^{i*beta}``."""
        return PrimePowerFunction(
            self.kind, self.name, dict(self.params), self.prime_values, self.values, self.side, self.shift + beta
        )

    @property
    def nu_max(self):
        if self.kind != "table":
            return None
        return max((nu for _, nu in self.values), default=0)

    def __repr__(self):
        bits = [self.kind]
        if self.name:
            bits.append(self.name)
        if self.params:
            bits.append(",".join(f"{k}={v}" for k, v in self.params.items()))
        if self.shift and self.name != "twist":
            bits.append(f"shift={self.shift:g}")
        return f"PrimePowerFunction({' '.join(bits)})"

    # -- values -------------------------------------------------------------

    def _base(self, which, k, nu):
        k = np.asarray(k, dtype=np.int64)
        nu = np.asarray(nu, dtype=np.int64)
        if self.kind == "preset":
            name = self.name
            if name in ("unity", "twist"):
                return np.ones(nu.shape, dtype=complex)
            if name == "moebius":
                if which == "g":
                    return np.full(nu.shape, -1.0 + 0j)
                return np.where(nu == 1, -1.0, 0.0).astype(complex)
            if name == "liouville":
                return np.where(nu % 2 == 1, -1.0, 1.0).astype(complex)
            if name == "squarefree":
                if which == "g":
                    return np.where(nu % 2 == 1, 1.0, -1.0).astype(complex)
                return np.where(nu == 1, 1.0, 0.0).astype(complex)
            if name == "gconst":
                c = self.params["c"]
                if which == "g":
                    return np.full(nu.shape, c, dtype=complex)
                top = int(nu.max()) if nu.size else 0
                return _gconst_f(c, top)[nu]
        if self.kind == "completely_multiplicative":
            pv = self.prime_values
            if k.size and k.max() >= len(pv):
                raise DomainError(f"no prime value for prime index {int(k.max()) + 1}")
            return pv[k] ** nu
        return self._table_values(which, k, nu)

    def _table_values(self, which, k, nu):
        out = np.empty(nu.shape, dtype=complex)
        flat_k, flat_nu = k.ravel(), nu.ravel()
        res = out.reshape(-1)
        for i, (kk, nn) in enumerate(zip(flat_k.tolist(), flat_nu.tolist())):
            if which == self.side:
                try:
                    res[i] = self.values[(kk, nn)]
                except KeyError:
                    raise DomainError(f"{self.side}(p_{kk + 1}^{nn}) is not defined by the table") from None
            else:
                res[i] = self._converted(kk, nn)
        return out

    def _converted(self, k, nu):
        key = ("conv", k)
        seq = self._cache.get(key)
        if seq is None or len(seq) < nu:
            given = []
            for j in range(1, nu + 1):
                try:
                    given.append(self.values[(k, j)])
                except KeyError:
                    raise DomainError(
                        f"{self.side}(p_{k + 1}^{j}) is needed to convert and is not in the table"
                    ) from None
            conv = bell_g_from_f if self.side == "f" else bell_f_from_g
            seq = conv(np.array(given))
            self._cache[key] = seq
        return seq[nu - 1]

    def _apply_shift(self, vals, log_p, nu):
        if not self.shift:
            return vals
        return vals * np.exp(1j * self.shift * np.asarray(nu) * np.asarray(log_p))

    def f_values(self, system, k, nu):
        """``f(p_k^nu)`` for arrays of 0-based prime indices and exponents."""
        k = np.asarray(k, dtype=np.int64)
        return self._apply_shift(self._base("f", k, nu), system.log_primes[k], nu)

    def g_values(self, system, k, nu):
        """``g(p_k^nu)``, the density of ``dG`` against ``dPi`` at that atom."""
        k = np.asarray(k, dtype=np.int64)
        return self._apply_shift(self._base("g", k, nu), system.log_primes[k], nu)


def preset(name, **params):
    return PrimePowerFunction.preset(name, **params)


@dataclass(frozen=True, eq=False)
class MeasureValues:
    """Weights of a measure on the entries of a table, in table order."""

    table: object
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=complex)
        if w.shape != (len(self.table),):
            raise ValueError(f"expected {len(self.table)} weights, got shape {w.shape}")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_support(cls, table, support):
        """Measure with the given ``{entry index: weight}`` atoms and zero elsewhere."""
        w = np.zeros(len(table), dtype=complex)
        for i, v in support.items():
            w[i] = v
        return cls(table, w)

    def summatory(self, x):
        return fsum(self.weights[: self.table.count(x)])

    def summatories(self, xs):
        stops = [self.table.count(x) for x in xs]
        order = np.argsort(stops, kind="stable")
        sums = prefix_fsums(self.weights, [stops[i] for i in order])
        out = [0j] * len(xs)
        for i, s in zip(order, sums):
            out[i] = s
        return out

    def write_csv(self, fh):
        fh.write("value,re_weight,im_weight\n")
        vals = self.table.values
        for v, w in zip(vals.tolist(), self.weights.tolist()):
            fh.write(f"{fmt(v)},{fmt(w.real)},{fmt(w.imag)}\n")


def evaluate(f, n):
    """``prod_k f(p_k^{e_k})`` at a single :class:`GeneralizedInteger`."""
    if not n.exponents:
        return 1 + 0j
    ks = np.array(list(n.exponents), dtype=np.int64)
    es = np.array(list(n.exponents.values()), dtype=np.int64)
    vals = f.f_values(n.system, ks, es)
    out = 1 + 0j
    for v in vals.tolist():
        out *= v
    return out


def measure(f, table):
    """Weights ``f(n_k)`` of the multiplicative measure ``f dN`` on the table."""
    fv = np.ones(len(table), dtype=complex)
    if len(table) > 1:
        base = f._base("f", table.lead[1:], table.lead_exp[1:])
        fv[1:] = base
    w = table.multiplicative(fv)
    if f.shift:
        w = w * np.exp(1j * f.shift * table.log_values)
    return MeasureValues(table, w)


def summatory(f, table, x):
    """``G(x) = sum_{n_k <= x} f(n_k)`` with compensated summation."""
    table.check_x(x)
    return measure(f, table).summatory(x)


def unit_measure(table):
    """The identity of multiplicative convolution: a unit atom at ``n = 1``."""
    return MeasureValues.from_support(table, {0: 1.0})


def _prime_power_divisor_pairs(table):
    """Arrays ``(entry, divisor_index, k, nu)``: ``table[divisor] = table[entry] / p_k^nu``."""
    hit = table._cache.get("ppdiv")
    if hit is None:
        ent, ks, es = table.factor_triples()
        ent_r = np.repeat(ent, es)
        k_r = np.repeat(ks, es)
        starts = np.cumsum(es) - es
        nu_r = np.arange(ent_r.size) - np.repeat(starts, es) + 1
        div_keys = table.keys[ent_r] - table.prime_keys[k_r] * nu_r.astype(np.uint64)
        div = table.lookup_keys(div_keys)
        if np.any(div < 0):
            raise NumericalError("table is not divisor-closed")
        hit = (ent_r, div, k_r, nu_r)
        table._cache["ppdiv"] = hit
    return hit


def exp_star(g, table, cap=DEFAULT_CAP):
    """Weights of ``exp*(g dPi) = sum_m (g dPi)^{*m} / m!`` restricted to the table.

    The atom of ``g dPi`` at ``p^nu`` has mass ``g(p^nu)/nu``.  Each round
    convolves the previous term with ``g dPi`` over the prime-power divisors
    of every entry; atoms above ``x_max`` never enter.  The series stops at
    ``M = ceil(log x_max / log p_min)`` or as soon as a term vanishes
    identically (after the largest number of prime factors in the table).
    """
    n = len(table)
    ent, div, k_r, nu_r = _prime_power_divisor_pairs(table)
    if ent.size > cap:
        raise ResourceError(f"exp* convolution needs {ent.size} atom pairs, above cap={cap}")
    coef = g.g_values(table.system, k_r, nu_r) / nu_r
    total = np.zeros(n, dtype=complex)
    total[0] = 1.0
    if n == 1 or not len(table.system):
        return MeasureValues(table, total)
    p_min = float(table.system.primes[0])
    rounds = max(1, math.ceil(math.log(table.x_max) / math.log(p_min)))
    term = total.copy()
    for m in range(1, rounds + 1):
        contrib = term[div] * coef
        term = (
            np.bincount(ent, weights=contrib.real, minlength=n)
            + 1j * np.bincount(ent, weights=contrib.imag, minlength=n)
        ) / m
        total += term
        if not np.any(term):
            break
    return MeasureValues(table, total)


def dirichlet_convolve(a, b, cap=DEFAULT_CAP, chunk=1 << 22):
    """Multiplicative convolution of two measures on the same table.

    Pairs ``(d, d')`` are enumerated on the exponent lattice (products are
    located by their lattice key, not by value), so distinct integers that
    share a value are kept apart.
    """
    table = a.table
    if b.table is not table:
        raise ValueError("measures must share the same table")
    if np.count_nonzero(b.weights) < np.count_nonzero(a.weights):
        a, b = b, a
    n = len(table)
    out_re = np.zeros(n)
    out_im = np.zeros(n)
    support = np.nonzero(a.weights)[0]
    if not support.size:
        return MeasureValues(table, np.zeros(n, dtype=complex))
    if table.exact_mode:
        X = int(math.floor(table.x_max))
        counts = np.searchsorted(table.values, X // table.values[support], side="right")
    else:
        thr = log_threshold(table.x_max)
        counts = np.searchsorted(table.log_values, thr - table.log_values[support] + 1e-9, side="right")
    total = int(counts.sum())
    if total > cap:
        raise ResourceError(f"convolution needs {total} divisor pairs, above cap={cap}")
    bw = b.weights
    start = 0
    while start < support.size:
        csum = np.cumsum(counts[start:])
        stop = start + max(1, int(np.searchsorted(csum, chunk, side="right")))
        d = support[start:stop]
        c = counts[start:stop]
        offs = np.cumsum(c) - c
        m = np.arange(int(c.sum())) - np.repeat(offs, c)
        d_r = np.repeat(d, c)
        prod = table.lookup_keys(table.keys[d_r] + table.keys[m])
        ok = prod >= 0
        contrib = a.weights[d_r[ok]] * bw[m[ok]]
        out_re += np.bincount(prod[ok], weights=contrib.real, minlength=n)
        out_im += np.bincount(prod[ok], weights=contrib.imag, minlength=n)
        start = stop
    return MeasureValues(table, out_re + 1j * out_im)


def mobius(table, cap=DEFAULT_CAP):
    """The Möbius measure ``dM = exp*(-dPi)``, the convolution inverse of ``dN``.

    Its weights are integers (0 or +-1 per exponent vector); the exp*
    series result is snapped to them after checking it is within 1e-6.
    """
    w = exp_star(PrimePowerFunction.preset("gconst", c=-1), table, cap).weights
    snapped = np.rint(w.real)
    err = float(np.max(np.abs(w - snapped))) if w.size else 0.0
    if err > 1e-6:
        raise NumericalError(f"exp* Möbius weights deviate from integers by {err:.3g}")
    return MeasureValues(table, snapped.astype(complex))


@dataclass(frozen=True)
class RankinBound:
    x: float
    lhs: float
    rhs: float

    @property
    def ratio(self):
        return self.lhs / self.rhs


def rankin_bound(g, table, x):
    """Both sides of the Rankin-type bound with ``beta = 1``.

    ``lhs = |G(x)|/x`` and ``rhs = exp(sum_{p^nu <= x} |g(p^nu)| / (nu p^nu))``.
    """
    if x < 1:
        raise RangeError("x must be >= 1")
    table.check_x(x)
    lhs = abs(summatory(g, table, x)) / x
    pp = table.system.prime_powers(x)
    gv = np.abs(g.g_values(table.system, pp.index, pp.nu))
    rhs = math.exp(fsum(gv * np.exp(-pp.log_value) / pp.nu))
    return RankinBound(float(x), lhs, rhs)


def max_abs_g(g, system, x):
    pp = system.prime_powers(x)
    if not pp.nu.size:
        return 0.0
    return float(np.max(np.abs(g.g_values(system, pp.index, pp.nu))))


__all__ = [
    "PRESETS",
    "PrimePowerFunction",
    "MeasureValues",
    "RankinBound",
    "preset",
    "evaluate",
    "measure",
    "summatory",
    "unit_measure",
    "exp_star",
    "dirichlet_convolve",
    "mobius",
    "rankin_bound",
]
