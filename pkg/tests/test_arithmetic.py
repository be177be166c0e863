import io
import math

import numpy as np
import pytest
from oracles import mobius_upto

from beurling import (
    ConfigError,
    DomainError,
    GeneralizedInteger,
    MeasureValues,
    PrimePowerFunction,
    RangeError,
    ResourceError,
    build_system,
    dirichlet_convolve,
    enumerate_integers,
    evaluate,
    exp_star,
    measure,
    mobius,
    preset,
    rankin_bound,
    summatory,
)
from beurling.arithmetic import unit_measure
from beurling.bell import bell_f_from_g
from beurling.counting import log_grid


@pytest.fixture(scope="module")
def small():
    s = build_system({"kind": "classical", "limit": 1000})
    return s, enumerate_integers(s, 1000)


def integer(system, **exps):
    return GeneralizedInteger.from_exponents(system, {int(k[1:]): v for k, v in exps.items()})


class TestPresets:
    def test_unknown(self):
        with pytest.raises(ConfigError):
            preset("dirichlet")

    def test_twist_needs_alpha(self):
        with pytest.raises(ConfigError):
            preset("twist")

    def test_no_stray_params(self):
        with pytest.raises(ConfigError):
            preset("moebius", alpha=1)

    def test_g_sides(self, small):
        s, _ = small
        k, nu = np.zeros(4, int), np.arange(1, 5)
        assert np.allclose(preset("moebius").g_values(s, k, nu), -1)
        assert np.allclose(preset("squarefree").g_values(s, k, nu), [1, -1, 1, -1])
        assert np.allclose(preset("liouville").f_values(s, k, nu), [-1, 1, -1, 1])

    def test_presets_match_bell(self, small):
        s, _ = small
        k, nu = np.full(8, 3), np.arange(1, 9)
        for name in ("unity", "moebius", "liouville", "squarefree"):
            f = preset(name)
            assert np.allclose(bell_f_from_g(f.g_values(s, k, nu)), f.f_values(s, k, nu), atol=1e-12), name
        g = preset("gconst", c=0.5 - 0.25j)
        assert np.allclose(bell_f_from_g(g.g_values(s, k, nu)), g.f_values(s, k, nu))


class TestEvaluate:
    def test_moebius(self, small):
        s, _ = small
        mu = preset("moebius")
        assert evaluate(mu, integer(s, k0=1, k1=1)) == 1
        assert evaluate(mu, integer(s, k0=2)) == 0

    def test_liouville(self, small):
        assert evaluate(preset("liouville"), integer(small[0], k0=2, k1=1)) == -1

    def test_one(self, small):
        assert evaluate(preset("moebius"), integer(small[0])) == 1

    def test_twist(self, small):
        s, _ = small
        n = integer(s, k0=3, k2=1, k5=2)
        assert abs(evaluate(preset("twist", alpha=0.7), n) - n.value ** 0.7j) <= 1e-10

    def test_table_missing_value(self, small):
        f = PrimePowerFunction.from_table({(0, 1): 0.5})
        with pytest.raises(DomainError):
            evaluate(f, integer(small[0], k1=1))

    def test_table_other_side_needs_lower_powers(self, small):
        g = PrimePowerFunction.from_table({(0, 2): 1.0}, side="g")
        with pytest.raises(DomainError):
            evaluate(g, integer(small[0], k0=2))

    def test_completely_multiplicative(self, small):
        f = PrimePowerFunction.completely_multiplicative([0.5, -1j])
        assert evaluate(f, integer(small[0], k0=2, k1=3)) == pytest.approx(0.25 * 1j)


class TestSummatory:
    def test_unity(self, small):
        assert summatory(preset("unity"), small[1], 1000) == 1000

    def test_moebius(self, classical_1e5):
        assert summatory(preset("moebius"), classical_1e5[1], 1e4) == -23 == mobius_upto(10**4).sum()

    def test_squarefree(self, classical_1e6):
        count = summatory(preset("squarefree"), classical_1e6[1], 1e6).real
        oracle = int(np.count_nonzero(mobius_upto(10**6)))
        assert count == oracle
        assert abs(count - 6e6 / math.pi**2) <= 0.005 * 1e6

    def test_range(self, small):
        with pytest.raises(RangeError):
            summatory(preset("unity"), small[1], 2000)

    def test_measure_matches_evaluate(self, li_1e5):
        s, t = li_1e5
        f = PrimePowerFunction.completely_multiplicative(np.exp(1j * np.arange(len(s))))
        w = measure(f, t).weights
        for i in np.random.default_rng(0).choice(len(t), 50, replace=False):
            assert w[i] == pytest.approx(evaluate(f, t[int(i)]), abs=1e-12)


class TestExpStar:
    def test_unity_recovers_dN(self):
        s = build_system({"kind": "explicit", "primes": [2, 3]})
        t = enumerate_integers(s, 10)
        assert np.allclose(exp_star(preset("unity"), t).weights, 1)

    def test_moebius_entries(self):
        s = build_system({"kind": "explicit", "primes": [2, 3]})
        t = enumerate_integers(s, 10)
        w = exp_star(preset("moebius"), t).weights
        expected = [evaluate(preset("moebius"), t[i]) for i in range(len(t))]
        assert np.allclose(w, expected)
        assert np.allclose(w, [1, -1, -1, 0, 1, 0, 0])

    def test_zero(self, small):
        w = exp_star(preset("gconst", c=0), small[1]).weights
        assert w[0] == 1 and not np.any(w[1:])

    def test_duplicate_primes(self):
        s = build_system({"kind": "explicit", "primes": [2, 2, 3]})
        t = enumerate_integers(s, 40)
        w = exp_star(preset("unity"), t).weights
        assert np.allclose(w, 1)

    def test_coherence_random(self):
        rng = np.random.default_rng(3)
        for primes in ([2, 3, 5, 7], [1.5, 2.5, 2.5], [1.1, 3.7]):
            s = build_system({"kind": "explicit", "primes": primes})
            t = enumerate_integers(s, 1000)
            top = int(math.log(1000) / math.log(min(primes))) + 1
            for _ in range(20):
                vals = rng.uniform(0, 1, (len(primes), top)) * np.exp(2j * np.pi * rng.uniform(0, 1, (len(primes), top)))
                g = PrimePowerFunction.from_table(
                    {(k, nu + 1): vals[k, nu] for k in range(len(primes)) for nu in range(top)}, "g"
                )
                expected = np.array([evaluate(g, t[i]) for i in range(len(t))])
                assert np.max(np.abs(exp_star(g, t).weights - expected)) <= 1e-9

    def test_cap(self, small):
        with pytest.raises(ResourceError):
            exp_star(preset("moebius"), small[1], cap=10)


class TestConvolution:
    def test_moebius_inversion_exact(self, classical_1e5):
        t = classical_1e5[1]
        out = dirichlet_convolve(mobius(t), measure(preset("unity"), t)).weights
        assert np.array_equal(out, unit_measure(t).weights)

    def test_divisor_count(self, small):
        t = small[1]
        one = measure(preset("unity"), t)
        d = dirichlet_convolve(one, one).weights
        assert d[t.count(12) - 1] == 6
        assert d[t.count(720) - 1] == 30

    def test_two_three_entrywise(self):
        s = build_system({"kind": "explicit", "primes": [2, 3]})
        t = enumerate_integers(s, 10)
        mu = exp_star(preset("moebius"), t)
        out = dirichlet_convolve(mu, measure(preset("unity"), t)).weights
        # exhaustive divisor-pair oracle on exponent vectors
        vecs = [t[i].vector(2) for i in range(len(t))]
        for i, v in enumerate(vecs):
            total = 0
            for j, d in enumerate(vecs):
                q = tuple(a - b for a, b in zip(v, d))
                if min(q) >= 0:
                    total += mu.weights[j] * 1
            assert out[i] == pytest.approx(total)
        assert np.allclose(out, [1, 0, 0, 0, 0, 0, 0])

    def test_equal_values_kept_apart(self):
        s = build_system({"kind": "explicit", "primes": [2, 2]})
        t = enumerate_integers(s, 4)
        one = measure(preset("unity"), t)
        # entries of value 4 are p1^2, p1p2, p2^2: each has 3, 4, 3 divisor pairs
        d = dirichlet_convolve(one, one).weights
        assert sorted(d[3:].real.tolist()) == [3, 3, 4]

    def test_wintner_transfer(self, classical_1e5):
        t = classical_1e5[1]
        A = MeasureValues.from_support(t, {0: 1, 1: -0.5, 3: 0.25})
        D = dirichlet_convolve(A, measure(preset("unity"), t))
        a_hat = 1 - 1 / 4 + 1 / 16
        assert abs(D.summatory(1e5).real / 1e5 - a_hat) <= 0.05

    def test_tables_must_match(self, small, classical_1e5):
        with pytest.raises(ValueError):
            dirichlet_convolve(unit_measure(small[1]), unit_measure(classical_1e5[1]))


class TestMobius:
    def test_values(self, classical_1e5):
        t = classical_1e5[1]
        assert np.array_equal(mobius(t).weights.real, mobius_upto(10**5)[1:])

    def test_power_of_two_system(self):
        s = build_system({"kind": "explicit", "primes": [2]})
        mv = mobius(enumerate_integers(s, 1000))
        for x in (2, 10, 1000):
            assert mv.summatory(x) == 0

    def test_csv(self):
        s = build_system({"kind": "explicit", "primes": [2, 3]})
        buf = io.StringIO()
        mobius(enumerate_integers(s, 10)).write_csv(buf)
        assert buf.getvalue().splitlines()[:3] == ["value,re_weight,im_weight", "1,1,0", "2,-1,0"]


class TestRankin:
    def test_unity(self, classical_1e6):
        t = classical_1e6[1]
        for x in log_grid(1e2, 1e6, 9):
            r = rankin_bound(preset("unity"), t, x)
            assert r.lhs == pytest.approx(1, abs=1 / x + 1e-12)
            assert r.ratio <= 10

    def test_zero(self, small):
        r = rankin_bound(preset("gconst", c=0), small[1], 1000)
        assert r.lhs == pytest.approx(1e-3) and r.rhs == 1

    def test_moebius(self, classical_1e6):
        r = rankin_bound(preset("moebius"), classical_1e6[1], 1e6)
        assert r.lhs == pytest.approx(212e-6) and r.lhs <= r.rhs
