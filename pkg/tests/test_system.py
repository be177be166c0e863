import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import brute_force_integers, li_anchor_root, primes_upto

from beurling import (
    ConfigError,
    GeneralizedInteger,
    RangeError,
    ResourceError,
    build_system,
    divisors,
    enumerate_integers,
)
from beurling.system import GeneralizedPrimeSystem


def values(table):
    return [table[i].value for i in range(len(table))]


class TestBuildSystem:
    def test_classical_small(self):
        assert build_system({"kind": "classical", "limit": 10}).primes.tolist() == [2, 3, 5, 7]

    def test_classical_matches_sieve(self):
        s = build_system({"kind": "classical", "limit": 10**5})
        assert s.exact_mode
        assert s.primes.astype(int).tolist() == primes_upto(10**5)

    def test_explicit_duplicates_allowed(self):
        s = build_system({"kind": "explicit", "primes": [2, 2, 3]})
        assert len(s) == 3 and s.primes[0] == s.primes[1] == 2
        assert not s.exact_mode

    def test_li_spaced_first_prime(self):
        s = build_system({"kind": "li_spaced", "limit": 10})
        assert 2.7 < s.primes[0] < 3.0
        assert s.primes[0] == pytest.approx(li_anchor_root(1), abs=1e-9)

    def test_li_spaced_against_quadrature(self):
        s = build_system({"kind": "li_spaced", "limit": 200})
        for k in (1, 2, 7, len(s)):
            assert s.primes[k - 1] == pytest.approx(li_anchor_root(k), rel=1e-11)
        assert s.primes[-1] <= 200 < li_anchor_root(len(s) + 1)

    @pytest.mark.parametrize("primes", [[3, 2], [2, 1.0], [0.5], [2, float("nan")]])
    def test_explicit_rejects(self, primes):
        with pytest.raises(ConfigError):
            build_system({"kind": "explicit", "primes": primes})

    def test_limit_must_exceed_two(self):
        with pytest.raises(ConfigError):
            build_system({"kind": "classical", "limit": 2})

    def test_sieve_cap(self):
        with pytest.raises(ResourceError):
            build_system({"kind": "classical", "limit": 1e6}, sieve_cap=1e5)

    def test_unknown_kind(self):
        with pytest.raises(ConfigError):
            build_system({"kind": "gaussian", "limit": 10})

    def test_explicit_limit_truncates(self):
        s = build_system({"kind": "explicit", "primes": [2, 3, 5, 7], "limit": 5})
        assert s.primes.tolist() == [2, 3, 5]


class TestEnumerate:
    def test_two_primes(self):
        s = build_system({"kind": "explicit", "primes": [2, 3]})
        assert values(enumerate_integers(s, 10)) == [1, 2, 3, 4, 6, 8, 9]

    def test_duplicate_primes_are_distinct_entries(self):
        s = build_system({"kind": "explicit", "primes": [2, 2]})
        t = enumerate_integers(s, 4)
        assert values(t) == [1, 2, 2, 4, 4, 4]
        vecs = [t[i].vector(2) for i in range(len(t))]
        assert vecs == [(0, 0), (0, 1), (1, 0), (0, 2), (1, 1), (2, 0)]

    def test_empty_system(self):
        s = GeneralizedPrimeSystem(np.zeros(0), "explicit", math.inf)
        t = enumerate_integers(s, 100)
        assert len(t) == 1 and t[0].value == 1 and t[0].exponents == {}

    def test_classical_counts_exact(self, classical_1e5):
        _, t = classical_1e5
        assert len(t) == 10**5
        assert np.array_equal(t.values, np.arange(1, 10**5 + 1))
        for x in (1, 1.5, 99.999, 1000, 54321.7, 1e5):
            assert t.count(x) == math.floor(x)

    def test_cap_is_never_silent(self):
        s = build_system({"kind": "classical", "limit": 100})
        with pytest.raises(ResourceError, match="reached"):
            enumerate_integers(s, 100, cap=10)

    def test_memory_cap(self):
        s = build_system({"kind": "classical", "limit": 1e4})
        with pytest.raises(ResourceError):
            enumerate_integers(s, 1e4, max_bytes=1000)

    def test_x_max_below_one(self):
        s = build_system({"kind": "classical", "limit": 10})
        with pytest.raises(RangeError):
            enumerate_integers(s, 0.5)

    def test_count_beyond_range(self, classical_1e5):
        with pytest.raises(RangeError):
            classical_1e5[1].count(2e5)

    def test_deterministic(self):
        s = build_system({"kind": "li_spaced", "limit": 1e4})
        assert enumerate_integers(s, 1e4).digest() == enumerate_integers(s, 1e4).digest()

    def test_sorted_with_lexicographic_ties(self):
        s = build_system({"kind": "explicit", "primes": [2, 2, 3, 4]})
        t = enumerate_integers(s, 64)
        keys = [(t.log_values[i], t[i].vector(4)) for i in range(len(t))]
        for (la, va), (lb, vb) in zip(keys, keys[1:]):
            assert la < lb - 1e-12 or (abs(la - lb) <= 1e-12 and va < vb)

    @settings(max_examples=60, deadline=None)
    @given(
        primes=st.lists(st.floats(1.05, 12, allow_nan=False), min_size=1, max_size=3).map(sorted),
        x_max=st.floats(1, 100),
    )
    def test_matches_brute_force(self, primes, x_max):
        s = build_system({"kind": "explicit", "primes": primes})
        t = enumerate_integers(s, x_max)
        oracle = brute_force_integers(primes, x_max)
        got = sorted((t[i].vector(len(primes)) for i in range(len(t))))
        assert got == sorted(vec for _, vec in oracle)
        assert np.allclose(np.sort(t.values), [v for v, _ in oracle], rtol=1e-12)

    def test_divisor_closed(self, li_1e5):
        _, t = li_1e5
        rng = np.random.default_rng(1)
        for i in rng.choice(len(t), 200, replace=False):
            for d in divisors(t[int(i)]):
                assert t.index_of(d.exponents) >= 0

    def test_log_value_compensated(self):
        s = build_system({"kind": "li_spaced", "limit": 1e3})
        n = GeneralizedInteger.from_exponents(s, {0: 3, 5: 2, 17: 1})
        exact = math.fsum([3 * math.log(s.primes[0]), 2 * math.log(s.primes[5]), math.log(s.primes[17])])
        assert n.log_value == pytest.approx(exact, rel=1e-12)

    def test_entry_values_match_logs(self, li_1e5):
        _, t = li_1e5
        assert np.allclose(np.log(t.values), t.log_values, rtol=1e-12, atol=1e-13)


class TestDivisors:
    def setup_method(self):
        self.s = build_system({"kind": "classical", "limit": 10})

    def test_six(self):
        n = GeneralizedInteger.from_exponents(self.s, {0: 1, 1: 1})
        assert [d.value for d in divisors(n)] == [1, 2, 3, 6]

    def test_one(self):
        n = GeneralizedInteger.from_exponents(self.s, {})
        assert n.value == 1 and [d.value for d in divisors(n)] == [1]

    def test_prime_power(self):
        n = GeneralizedInteger.from_exponents(self.s, {0: 3})
        assert [d.value for d in divisors(n)] == [1, 2, 4, 8]

    def test_count_is_product(self):
        n = GeneralizedInteger.from_exponents(self.s, {0: 2, 1: 1, 3: 3})
        assert len(divisors(n)) == 3 * 2 * 4
