"""Generalized prime systems and the semigroup of generalized integers.

A system is a non-decreasing sequence of reals ``1 < p_1 <= p_2 <= ...``
(repeats allowed).  Its integers are all finite products ``prod p_k^{e_k}``,
counted once per exponent vector, so two distinct vectors with the same value
are two distinct entries.

Tables are stored column-wise.  Every entry ``n`` other than ``1`` is recorded
as ``n = rest * p_lead^e`` where ``lead`` is the largest prime index dividing
``n``; this factorization tree lets multiplicative functions be evaluated with
a handful of vectorized passes.
"""

from __future__ import annotations

import hashlib
import itertools
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.special import expi

from .errors import ConfigError, NumericalError, RangeError, ResourceError

KINDS = ("classical", "explicit", "li_spaced")

DEFAULT_CAP = 10**8
DEFAULT_SIEVE_CAP = 10**8
REL_TOL = 1e-12
# uint64 keys make the additive hash wrap around silently
_KEY_SEED = 20190101
_BYTES_PER_ENTRY = 40


def log_threshold(x):
    """Largest log-value admitted as ``<= x`` under the floating tolerance."""
    lx = math.log(x)
    return lx + REL_TOL * abs(lx)


@dataclass(frozen=True)
class SystemSpec:
    kind: str
    limit: float | None = None
    primes: tuple | None = None


class PrimePowers(NamedTuple):
    """Prime powers ``p_k^nu <= x`` sorted by value (ties by k, then nu)."""

    index: np.ndarray
    nu: np.ndarray
    log_value: np.ndarray

    @property
    def log_prime(self):
        return self.log_value / self.nu


@dataclass(frozen=True, eq=False)
class GeneralizedPrimeSystem:
    primes: np.ndarray
    kind: str
    limit: float
    exact_mode: bool = False
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        primes = np.array(self.primes, dtype=float)
        if primes.ndim != 1:
            raise ConfigError("primes must be a flat sequence")
        if self.kind not in KINDS:
            raise ConfigError(f"unknown system kind {self.kind!r}")
        if primes.size:
            if not np.all(np.isfinite(primes)) or primes.min() <= 1.0:
                bad = primes[~(primes > 1.0)][0] if np.any(~(primes > 1.0)) else primes.min()
                raise ConfigError(f"every prime must be a finite real > 1, got {bad!r}")
            if np.any(np.diff(primes) < 0):
                i = int(np.nonzero(np.diff(primes) < 0)[0][0])
                raise ConfigError(
                    f"primes must be non-decreasing: p[{i + 1}]={primes[i]!r} > p[{i + 2}]={primes[i + 1]!r}"
                )
        if self.exact_mode and primes.size and not np.all(primes == np.floor(primes)):
            raise ConfigError("exact_mode requires integer primes")
        if not self.limit > 0:
            raise ConfigError("limit must be positive")
        primes.setflags(write=False)
        object.__setattr__(self, "primes", primes)
        logs = np.log(primes)
        logs.setflags(write=False)
        object.__setattr__(self, "log_primes", logs)
        if self.exact_mode:
            ints = primes.astype(np.int64)
            ints.setflags(write=False)
            object.__setattr__(self, "int_primes", ints)

    def __len__(self):
        return len(self.primes)

    def __repr__(self):
        head = ", ".join(f"{p:g}" for p in self.primes[:5])
        more = ", ..." if len(self) > 5 else ""
        return f"GeneralizedPrimeSystem(kind={self.kind!r}, limit={self.limit:g}, n={len(self)}, primes=[{head}{more}])"

    def covers(self, x):
        """True when every prime ``<= x`` of the intended system is present."""
        return self.kind == "explicit" or x <= self.limit * (1 + REL_TOL)

    def digest(self):
        h = hashlib.sha256()
        h.update(self.kind.encode())
        h.update(np.ascontiguousarray(self.primes).tobytes())
        return h.hexdigest()

    def prime_powers(self, x):
        """All prime powers ``p_k^nu <= x`` under the membership rule."""
        key = ("pp", float(x))
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        idx_parts, nu_parts, log_parts = [], [], []
        if x >= 1 and len(self):
            if self.exact_mode:
                X = int(math.floor(x))
                pr = self.int_primes
                live = np.nonzero(pr <= X)[0]
                pw = pr[live].copy()
                nu = 1
                while live.size:
                    idx_parts.append(live)
                    nu_parts.append(np.full(live.size, nu, dtype=np.int64))
                    log_parts.append(nu * self.log_primes[live])
                    ok = pw <= X // pr[live]
                    live, pw = live[ok], pw[ok] * pr[live[ok]]
                    nu += 1
            else:
                thr = log_threshold(x)
                lp = self.log_primes
                live = np.nonzero(lp <= thr)[0]
                nu = 1
                while live.size:
                    lv = nu * lp[live]
                    ok = lv <= thr
                    live, lv = live[ok], lv[ok]
                    if not live.size:
                        break
                    idx_parts.append(live)
                    nu_parts.append(np.full(live.size, nu, dtype=np.int64))
                    log_parts.append(lv)
                    nu += 1
        if idx_parts:
            index = np.concatenate(idx_parts)
            nus = np.concatenate(nu_parts)
            logs = np.concatenate(log_parts)
            order = np.lexsort((nus, index, logs))
            out = PrimePowers(index[order], nus[order], logs[order])
        else:
            out = PrimePowers(np.zeros(0, np.int64), np.zeros(0, np.int64), np.zeros(0))
        self._cache[key] = out
        return out


def _sieve(limit):
    n = int(math.floor(limit))
    flags = np.ones(n + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return np.nonzero(flags)[0]


def _li_spaced_primes(limit):
    """Solve ``li(p) - li(2) = k`` for every k with root ``<= limit``."""
    li2 = float(expi(math.log(2.0)))
    count = int(math.floor(float(expi(math.log(limit))) - li2 + 1e-12))
    if count <= 0:
        return np.zeros(0)
    k = np.arange(1, count + 1, dtype=float)
    lo = np.full(count, 2.0)
    hi = np.full(count, float(limit))
    # bracket check: li(2) - li(2) = 0 < k and li(limit) - li(2) >= k
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        below = expi(np.log(mid)) - li2 < k
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.all(hi - lo <= 4 * np.spacing(hi)):
            break
    return 0.5 * (lo + hi)


def build_system(spec, sieve_cap=DEFAULT_SIEVE_CAP):
    """Construct a validated :class:`GeneralizedPrimeSystem` from a spec.

    ``classical`` sieves the rational primes up to ``limit``; ``li_spaced``
    places the k-th prime at the root of ``int_2^p dt/log t = k``;
    ``explicit`` takes the listed primes as the whole system.
    """
    if isinstance(spec, dict):
        spec = SystemSpec(**spec)
    kind = spec.kind
    if kind not in KINDS:
        raise ConfigError(f"system.kind must be one of {KINDS}, got {kind!r}")
    if kind == "explicit":
        if spec.primes is None:
            raise ConfigError("explicit system requires a 'primes' list")
        primes = np.asarray(list(spec.primes), dtype=float)
        # validation of values and order happens in the system constructor
        tmp = GeneralizedPrimeSystem(primes, "explicit", math.inf)
        if spec.limit is None:
            return tmp
        if not spec.limit > 0:
            raise ConfigError("system.limit must be positive")
        keep = tmp.primes[tmp.primes <= spec.limit]
        return GeneralizedPrimeSystem(keep, "explicit", float(spec.limit))
    if spec.primes is not None:
        raise ConfigError(f"'primes' is only valid for explicit systems, not {kind!r}")
    if spec.limit is None or not spec.limit > 2:
        raise ConfigError(f"system.limit must be > 2 for kind {kind!r}, got {spec.limit!r}")
    if spec.limit > sieve_cap:
        raise ResourceError(f"limit {spec.limit:g} exceeds the sieve cap {sieve_cap:g}")
    if kind == "classical":
        return GeneralizedPrimeSystem(_sieve(spec.limit).astype(float), "classical", float(spec.limit), True)
    return GeneralizedPrimeSystem(_li_spaced_primes(spec.limit), "li_spaced", float(spec.limit))


@dataclass(frozen=True)
class GeneralizedInteger:
    """A generalized integer as a sparse exponent map over prime indices.

    Indices are 0-based positions in the system's prime sequence.
    """

    exponents: dict
    log_value: float
    value: float
    system: GeneralizedPrimeSystem | None = field(default=None, repr=False, compare=False)

    @classmethod
    def from_exponents(cls, system, exponents):
        exps = {int(k): int(e) for k, e in sorted(exponents.items()) if e}
        for k, e in exps.items():
            if e < 0 or not 0 <= k < len(system):
                raise RangeError(f"invalid exponent entry {k}:{e}")
        log_value = math.fsum(e * float(system.log_primes[k]) for k, e in exps.items())
        if system.exact_mode:
            value = 1
            for k, e in exps.items():
                value *= int(system.int_primes[k]) ** e
        else:
            value = math.exp(log_value)
        return cls(exps, log_value, value, system)

    def vector(self, length=None):
        n = length if length is not None else (max(self.exponents) + 1 if self.exponents else 0)
        return tuple(self.exponents.get(k, 0) for k in range(n))


def divisors(n):
    """All generalized divisors of ``n`` (componentwise-dominated exponent maps), sorted by value."""
    if n.system is None:
        raise RangeError("divisors() needs an integer bound to a prime system")
    ks = list(n.exponents)
    out = []
    for es in itertools.product(*(range(n.exponents[k] + 1) for k in ks)):
        out.append(GeneralizedInteger.from_exponents(n.system, dict(zip(ks, es))))
    out.sort(key=lambda d: (d.log_value, d.vector(max(ks) + 1 if ks else 0)))
    return out


def _prime_keys(count):
    rng = np.random.default_rng(_KEY_SEED)
    return rng.integers(1, 2**63, size=count, dtype=np.uint64) | np.uint64(1)


class IntegerTable:
    """Sorted, immutable enumeration of the generalized integers ``<= x_max``.

    Entries are ordered by ``(log_value, exponent vector)`` and stored as
    parallel arrays; ``table[i]`` materializes a :class:`GeneralizedInteger`.
    """

    def __init__(self, system, x_max, log_values, values, rest, lead, lead_exp, omega, keys, prime_keys):
        self.system = system
        self.x_max = float(x_max)
        self.log_values = log_values
        self.values = values
        self.rest = rest
        self.lead = lead
        self.lead_exp = lead_exp
        self.omega = omega
        self.keys = keys
        self.prime_keys = prime_keys
        for arr in (log_values, values, rest, lead, lead_exp, omega, keys, prime_keys):
            arr.setflags(write=False)
        self._cache = {}

    @property
    def exact_mode(self):
        return self.system.exact_mode

    def __len__(self):
        return len(self.log_values)

    def __repr__(self):
        return f"IntegerTable(x_max={self.x_max:g}, count={len(self)}, system={self.system!r})"

    def exponents(self, i):
        out = {}
        while i > 0:
            out[int(self.lead[i])] = int(self.lead_exp[i])
            i = int(self.rest[i])
        return dict(sorted(out.items()))

    def __getitem__(self, i):
        if not -len(self) <= i < len(self):
            raise IndexError(i)
        i %= len(self)
        value = int(self.values[i]) if self.exact_mode else float(self.values[i])
        return GeneralizedInteger(self.exponents(i), float(self.log_values[i]), value, self.system)

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    def check_x(self, x):
        if x > self.x_max * (1 + REL_TOL):
            raise RangeError(f"x={x:g} exceeds the table range x_max={self.x_max:g}")

    def count(self, x):
        """N(x): number of entries with value ``<= x`` (multiset count)."""
        self.check_x(x)
        if x < 1:
            return 0
        if self.exact_mode:
            return int(np.searchsorted(self.values, int(math.floor(x)), side="right"))
        return int(np.searchsorted(self.log_values, log_threshold(x), side="right"))

    def counts(self, xs):
        return [self.count(x) for x in xs]

    # -- lookups on the exponent lattice ---------------------------------

    def _sorted_keys(self):
        hit = self._cache.get("keyorder")
        if hit is None:
            order = np.argsort(self.keys, kind="stable")
            hit = (order, self.keys[order])
            self._cache["keyorder"] = hit
        return hit

    def lookup_keys(self, keys):
        """Table indices of the given lattice keys, ``-1`` where absent."""
        order, sk = self._sorted_keys()
        keys = np.asarray(keys, dtype=np.uint64)
        pos = np.searchsorted(sk, keys)
        pos_c = np.minimum(pos, len(sk) - 1)
        found = sk[pos_c] == keys
        return np.where(found, order[pos_c], -1)

    def key_of(self, exponents):
        key = np.zeros(1, dtype=np.uint64)
        for k, e in exponents.items():
            key += np.uint64(e) * self.prime_keys[k : k + 1]
        return key[0]

    def index_of(self, exponents):
        """Index of the entry with this exponent map, or ``-1``."""
        return int(self.lookup_keys(np.array([self.key_of(exponents)], dtype=np.uint64))[0])

    def levels(self):
        """Entry indices grouped by number of distinct prime factors."""
        hit = self._cache.get("levels")
        if hit is None:
            order = np.argsort(self.omega, kind="stable")
            bounds = np.searchsorted(self.omega[order], np.arange(int(self.omega.max()) + 2))
            hit = [order[bounds[d] : bounds[d + 1]] for d in range(1, len(bounds) - 1)]
            self._cache["levels"] = hit
        return hit

    def factor_triples(self):
        """Arrays ``(entry, prime_index, exponent)`` listing every prime-power factor."""
        hit = self._cache.get("triples")
        if hit is None:
            ent, ks, es = [], [], []
            cur = np.arange(len(self))
            live = cur > 0
            who, cur = cur[live], cur[live]
            while who.size:
                ent.append(who)
                ks.append(self.lead[cur])
                es.append(self.lead_exp[cur])
                cur = self.rest[cur]
                live = cur > 0
                who, cur = who[live], cur[live]
            if ent:
                hit = (np.concatenate(ent), np.concatenate(ks).astype(np.int64), np.concatenate(es).astype(np.int64))
            else:
                z = np.zeros(0, np.int64)
                hit = (z, z, z)
            self._cache["triples"] = hit
        return hit

    def multiplicative(self, factor_values):
        """Weights ``w(n) = prod_k h(p_k^{e_k})`` given ``h`` at each entry's lead factor.

        ``factor_values`` is a complex array aligned with the table, holding
        ``h(p_lead^lead_exp)`` (the root entry's slot is ignored).
        """
        w = np.zeros(len(self), dtype=complex)
        w[0] = 1.0
        for idx in self.levels():
            w[idx] = w[self.rest[idx]] * factor_values[idx]
        return w

    def digest(self):
        h = hashlib.sha256()
        h.update(self.system.digest().encode())
        h.update(repr(self.x_max).encode())
        for arr in (self.log_values, self.values, self.rest, self.lead, self.lead_exp):
            h.update(np.ascontiguousarray(arr).tobytes())
        return h.hexdigest()


def enumerate_integers(system, x_max, cap=DEFAULT_CAP, max_bytes=None):
    """Enumerate every generalized integer ``<= x_max``.

    Primes with ``p^2 <= x_max`` are folded in one at a time (each extends
    the entries built from earlier primes by ``p^e``); every larger prime can
    only appear to the first power on top of an entry ``<= x_max/p``, which
    is necessarily built from the small primes alone, so those are generated
    in a single vectorized pass.  The result is then sorted.

    Raises :class:`ResourceError` rather than truncating when the count would
    exceed ``cap`` (or the memory estimate would exceed ``max_bytes``).
    """
    if not x_max >= 1:
        raise RangeError(f"x_max must be >= 1, got {x_max!r}")
    if cap <= 0:
        raise ConfigError("cap must be positive")
    exact = system.exact_mode
    logp = system.log_primes
    thr = log_threshold(x_max)
    salt = _prime_keys(len(system))

    if exact:
        X = int(math.floor(x_max))
        if X >= 2**62:
            raise ResourceError(f"x_max={x_max:g} overflows exact 64-bit arithmetic")
        pint = system.int_primes
        n_rel = int(np.searchsorted(pint, X, side="right"))
        n_small = int(np.searchsorted(pint, math.isqrt(X), side="right"))
    else:
        n_rel = int(np.searchsorted(logp, thr, side="right"))
        n_small = int(np.searchsorted(2.0 * logp, thr, side="right"))

    def guard(count):
        if count > cap:
            raise ResourceError(f"enumeration exceeds cap={cap} entries (reached {count} before stopping)")
        if max_bytes is not None and count * _BYTES_PER_ENTRY > max_bytes:
            raise ResourceError(
                f"enumeration exceeds the memory estimate cap {max_bytes:g} bytes (reached {count} entries)"
            )

    logs = np.zeros(1)
    vals = np.ones(1, dtype=np.int64) if exact else np.ones(1)
    keys = np.zeros(1, dtype=np.uint64)
    rest = np.full(1, -1, dtype=np.int64)
    lead = np.full(1, -1, dtype=np.int64)
    lexp = np.zeros(1, dtype=np.int64)
    omega = np.zeros(1, dtype=np.int64)
    guard(1)

    for k in range(n_small):
        parts = []
        e = 1
        while True:
            if exact:
                pe = int(pint[k]) ** e
                if pe > X:
                    break
                idx = np.nonzero(vals <= X // pe)[0]
                new_log = logs[idx] + e * logp[k]
            else:
                cand = logs + e * logp[k]
                idx = np.nonzero(cand <= thr)[0]
                new_log = cand[idx]
            if not idx.size:
                break
            parts.append((idx, e, new_log, vals[idx] * (pe if exact else system.primes[k] ** e)))
            e += 1
        if not parts:
            continue
        added = sum(p[0].size for p in parts)
        guard(len(logs) + added)
        logs = np.concatenate([logs] + [p[2] for p in parts])
        vals = np.concatenate([vals] + [p[3] for p in parts])
        keys = np.concatenate([keys] + [keys[p[0]] + salt[k : k + 1] * np.uint64(p[1]) for p in parts])
        omega = np.concatenate([omega] + [omega[p[0]] + 1 for p in parts])
        rest = np.concatenate([rest] + [p[0] for p in parts])
        lead = np.concatenate([lead] + [np.full(p[0].size, k, dtype=np.int64) for p in parts])
        lexp = np.concatenate([lexp] + [np.full(p[0].size, p[1], dtype=np.int64) for p in parts])

    if n_rel > n_small:
        large = np.arange(n_small, n_rel)
        if exact:
            order = np.argsort(vals, kind="stable")
            counts = np.searchsorted(vals[order], X // pint[large], side="right")
        else:
            order = np.argsort(logs, kind="stable")
            # generous bound, the exact rule is re-applied to the computed sums
            counts = np.searchsorted(logs[order], thr - logp[large] + 1e-9, side="right")
        total = int(counts.sum())
        guard(len(logs) + total)
        rep_k = np.repeat(large, counts)
        starts = np.cumsum(counts) - counts
        within = np.arange(total) - np.repeat(starts, counts)
        src = order[within]
        new_log = logs[src] + logp[rep_k]
        if exact:
            new_val = vals[src] * pint[rep_k]
        else:
            ok = new_log <= thr
            src, rep_k, new_log = src[ok], rep_k[ok], new_log[ok]
            new_val = vals[src] * system.primes[rep_k]
        logs = np.concatenate([logs, new_log])
        vals = np.concatenate([vals, new_val])
        keys = np.concatenate([keys, keys[src] + salt[rep_k]])
        omega = np.concatenate([omega, omega[src] + 1])
        rest = np.concatenate([rest, src])
        lead = np.concatenate([lead, rep_k])
        lexp = np.concatenate([lexp, np.ones(src.size, dtype=np.int64)])

    if exact:
        perm = np.argsort(vals, kind="stable")
        logs = np.log(vals.astype(float))
    else:
        perm = np.argsort(logs, kind="stable")
        perm = _break_ties(perm, logs, rest, lead, lexp)

    inv = np.empty_like(perm)
    inv[perm] = np.arange(perm.size)
    old_rest = rest[perm]
    new_rest = np.where(old_rest >= 0, inv[np.maximum(old_rest, 0)], -1)

    if np.unique(keys).size != keys.size:
        raise NumericalError("exponent-lattice key collision; change the key seed")

    return IntegerTable(
        system,
        x_max,
        logs[perm],
        vals[perm],
        new_rest,
        lead[perm].astype(np.int64),
        lexp[perm].astype(np.int16),
        omega[perm].astype(np.int16),
        keys[perm],
        salt,
    )


def _break_ties(perm, logs, rest, lead, lexp):
    s = logs[perm]
    if s.size < 2:
        return perm
    close = np.diff(s) <= REL_TOL * np.maximum(1.0, np.abs(s[1:]))
    if not close.any():
        return perm
    perm = perm.copy()
    edges = np.diff(np.concatenate(([0], close.astype(np.int8), [0])))
    starts = np.nonzero(edges == 1)[0]
    stops = np.nonzero(edges == -1)[0] + 1

    def exps(i):
        out = {}
        while rest[i] >= 0:
            out[int(lead[i])] = int(lexp[i])
            i = int(rest[i])
        return out

    for a, b in zip(starts, stops):
        group = [(int(i), exps(int(i))) for i in perm[a:b]]
        span = sorted(set().union(*(g[1] for g in group)))
        group.sort(key=lambda g: tuple(g[1].get(k, 0) for k in span))
        perm[a:b] = [g[0] for g in group]
    return perm
