import io
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import primes_upto

from beurling import (
    DomainError,
    HypothesisWarning,
    PrimePowerFunction,
    RangeError,
    build_system,
    compare,
    criterion,
    enumerate_integers,
    find_alpha,
    predict_halasz,
    preset,
    wirsing,
)
from beurling.counting import log_grid
from beurling.meanvalue import doubling_points, slope_verdict

GRID6 = log_grid(1e3, 1e6, 16)


@pytest.fixture(scope="module")
def small():
    s = build_system({"kind": "classical", "limit": 1e4})
    return s, enumerate_integers(s, 1e4)


class TestSlopeVerdict:
    def test_points(self):
        assert doubling_points(2.0**16) == pytest.approx([4, 16, 256, 65536])

    @pytest.mark.parametrize(
        "sums,verdict",
        [([0, 0, 0, 0], "converges"), ([0, 0.7, 1.4, 2.1], "diverges"), ([0, 0.1, 0.15, 0.2], "inconclusive")],
    )
    def test_cases(self, sums, verdict):
        assert slope_verdict(sums) == verdict

    def test_loglog_growth(self):
        # c log log x with c = 1 gains log 2 per doubling of log x
        x = 1e6
        sums = [math.log(math.log(p)) for p in doubling_points(x)]
        assert slope_verdict(sums) == "diverges"


class TestCriterion:
    def test_unity_is_identically_zero(self, classical_1e6):
        r = criterion(preset("unity"), 0, classical_1e6[0], GRID6)
        assert all(s == 0 for _, s in r.partial_sums)
        assert r.verdict == "converges" and r.limit_estimate == 0

    def test_twist_converges_at_its_alpha(self, classical_1e6):
        r = criterion(preset("twist", alpha=1.0), 1.0, classical_1e6[0], GRID6)
        assert r.verdict == "converges" and r.limit_estimate == pytest.approx(0, abs=1e-15)

    def test_liouville_diverges(self, classical_1e6):
        r = criterion(preset("liouville"), 0, classical_1e6[0], GRID6)
        assert r.verdict == "diverges"
        # odd powers contribute 2/(nu p^nu), even powers nothing
        oracle = math.fsum(
            2 / (nu * p**nu) for p in primes_upto(10**6) for nu in range(1, 40, 2) if p**nu <= 10**6
        )
        assert r.limit_estimate == pytest.approx(oracle, rel=1e-12)

    def test_moebius_diverges(self, classical_1e6):
        assert criterion(preset("moebius"), 0, classical_1e6[0], GRID6).verdict == "diverges"

    def test_squarefree_converges(self, classical_1e6):
        r = criterion(preset("squarefree"), 0, classical_1e6[0], GRID6)
        assert r.verdict == "converges"
        assert math.exp(-r.limit_estimate) == pytest.approx(6 / math.pi**2, abs=1e-3)

    def test_partial_sums_monotone_for_bounded_g(self, classical_1e6):
        r = criterion(preset("twist", alpha=0.5), 0, classical_1e6[0], GRID6)
        sums = [s for _, s in r.partial_sums]
        assert all(b >= a - 1e-15 for a, b in zip(sums, sums[1:]))

    def test_warns_when_g_exceeds_one(self, small):
        with pytest.warns(HypothesisWarning):
            r = criterion(preset("gconst", c=2), 0, small[0], log_grid(10, 1e4, 8))
        assert r.notes

    def test_no_warning_for_bounded_g(self, small):
        with warnings.catch_warnings():
            warnings.simplefilter("error", HypothesisWarning)
            criterion(preset("moebius"), 0, small[0], log_grid(10, 1e4, 8))

    def test_grid_beyond_limit(self, small):
        with pytest.raises(RangeError):
            criterion(preset("unity"), 0, small[0], [10, 1e5])

    def test_csv(self, small):
        buf = io.StringIO()
        criterion(preset("unity"), 0, small[0], [10, 100]).write_csv(buf)
        assert buf.getvalue() == "x,partial_sum\n10,0\n100,0\n"


class TestFindAlpha:
    def test_twist(self, classical_1e6):
        res = find_alpha(preset("twist", alpha=-0.75), classical_1e6[0], np.arange(-2, 2.001, 0.25), 1e6)
        assert res.best_alpha == -0.75 and res.any_convergent and res.note == ""

    def test_liouville_has_no_convergent_alpha(self, classical_1e6):
        res = find_alpha(preset("liouville"), classical_1e6[0], np.arange(-2, 2.001, 0.5), 1e6)
        assert not res.any_convergent
        assert res.note == "no convergent alpha on grid"

    def test_ties_prefer_small_then_positive(self, small):
        zero = preset("gconst", c=0)
        assert find_alpha(zero, small[0], [-1.0, 1.0, 2.0], 1e4).best_alpha == 1.0
        assert find_alpha(zero, small[0], [-1.0, 0.0, 1.0], 1e4).best_alpha == 0.0

    def test_empty_grid(self, small):
        with pytest.raises(RangeError):
            find_alpha(preset("unity"), small[0], [], 1e4)


class TestPredict:
    def test_unity_is_x(self, classical_1e6):
        pred = predict_halasz(preset("unity"), 0, *classical_1e6, GRID6)
        assert all(v == x for x, v in pred.samples)
        assert pred.c == 1

    def test_squarefree(self, classical_1e6):
        pred = predict_halasz(preset("squarefree"), 0, *classical_1e6, [1e6])
        assert abs(pred.at(1e6) / 1e6 - 6 / math.pi**2) <= 0.005

    def test_twist_modulus(self, classical_1e6):
        pred = predict_halasz(preset("twist", alpha=1.0), 1.0, *classical_1e6, [1e3, 1e6])
        for x, v in pred.samples:
            assert abs(v) / x == pytest.approx(2**-0.5, rel=1e-12)

    def test_zero_mode(self, small):
        pred = predict_halasz(preset("moebius"), 0, *small, [10, 100], mode="zero")
        assert [v for _, v in pred.samples] == [0, 0]

    def test_modes_agree(self, classical_1e5):
        for name in ("squarefree", "unity"):
            f = preset(name)
            a = predict_halasz(f, 0, *classical_1e5, [1e5]).at(1e5)
            b = predict_halasz(f, 0, *classical_1e5, [1e5], mode="euler_product").at(1e5)
            assert abs(a - b) / abs(a) <= 0.02, name

    def test_unity_euler_product_is_mertens(self, classical_1e5):
        # prod (1 - 1/p)(1 + 1/p + ... ) over p <= x, truncated powers: close to 1
        v = predict_halasz(preset("unity"), 0, *classical_1e5, [1e5], mode="euler_product").at(1e5) / 1e5
        assert abs(v - 1) <= 1e-3

    def test_density_scales(self, li_1e5):
        f = preset("squarefree")
        one = predict_halasz(f, 0, *li_1e5, [1e5], density=1.0)
        auto = predict_halasz(f, 0, *li_1e5, [1e5])
        assert 0.7 < auto.density < 0.8
        assert auto.at(1e5) == pytest.approx(auto.density * one.at(1e5), rel=1e-14)

    def test_euler_factor_zero(self):
        s = build_system({"kind": "explicit", "primes": [2]})
        f = PrimePowerFunction.from_table({(0, 1): -2.0})
        with pytest.raises(DomainError, match="p_1"):
            predict_halasz(f, 0, s, None, [3], mode="euler_product", density=1)

    def test_bad_mode(self, small):
        with pytest.raises(ValueError):
            predict_halasz(preset("unity"), 0, *small, [10], mode="taylor")

    def test_dichotomy_identity(self, classical_1e6):
        # |pred (1 + i alpha) / x^{1+i alpha}| = exp(-S_alpha(x)) at every grid point
        f, alpha = preset("twist", alpha=0.5), 0.25
        system, table = classical_1e6
        crit = criterion(f, alpha, system, GRID6)
        pred = predict_halasz(f, alpha, system, table, GRID6)
        for (x, v), (_, s) in zip(pred.samples, crit.partial_sums):
            assert abs(math.log(abs(v) * abs(complex(1, alpha)) / x) + s) <= 1e-9


class TestShiftCovariance:
    @pytest.mark.parametrize("beta", [0.5, -1.25, 2.0])
    def test_criterion_exact(self, classical_1e6, beta):
        f = preset("squarefree")
        base = criterion(f, 0.25, classical_1e6[0], GRID6)
        shifted = criterion(f.twisted(beta), 0.25 + beta, classical_1e6[0], GRID6)
        assert shifted.partial_sums == base.partial_sums
        assert shifted.verdict == base.verdict

    def test_prediction_rotates(self, classical_1e5):
        f, beta, alpha = preset("squarefree"), 0.5, 0.0
        p0 = predict_halasz(f, alpha, *classical_1e5, [1e5]).at(1e5)
        p1 = predict_halasz(f.twisted(beta), alpha + beta, *classical_1e5, [1e5]).at(1e5)
        expect = p0 * 1e5 ** (1j * beta) * complex(1, alpha) / complex(1, alpha + beta)
        assert p1 == pytest.approx(expect, rel=1e-12)


class TestWirsing:
    def test_squarefree(self, classical_1e6):
        assert abs(wirsing(preset("squarefree"), classical_1e6[0], 1e6) - 6 / math.pi**2) <= 1e-3

    def test_unity(self, small):
        assert wirsing(preset("unity"), small[0], 1e4) == 1.0

    def test_moebius_diverges_to_zero(self, classical_1e6):
        assert wirsing(preset("moebius"), classical_1e6[0], 1e6) == 0.0

    def test_density_factor(self, small):
        assert wirsing(preset("squarefree"), small[0], 1e4, density=0.5) == pytest.approx(
            0.5 * wirsing(preset("squarefree"), small[0], 1e4)
        )

    def test_complex_rejected(self, small):
        with pytest.raises(DomainError):
            wirsing(preset("twist", alpha=1.0), small[0], 1e4)

    def test_beyond_limit(self, small):
        with pytest.raises(RangeError):
            wirsing(preset("unity"), small[0], 1e5)

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.floats(-1, 1), min_size=30, max_size=30))
    def test_in_unit_interval(self, small, values):
        s = small[0]
        f = PrimePowerFunction.completely_multiplicative(np.resize(values, len(s)))
        assert 0 <= wirsing(f, s, 1e4) <= 1


class TestCompare:
    def test_moebius(self, classical_1e6, mobius_1e6):
        cmp = compare(preset("moebius"), classical_1e6[1], 0, GRID6, weights=mobius_1e6)
        assert cmp.mode == "zero" and cmp.verdict == "diverges"
        assert cmp.rows[-1].abs_err <= 1e-3

    def test_unity_exact_on_integers(self, classical_1e5):
        grid = [10, 100, 1000, 10**4, 10**5]
        cmp = compare(preset("unity"), classical_1e5[1], 0, grid)
        assert all(r.abs_err == 0 for r in cmp.rows)

    def test_twist(self, classical_1e6):
        cmp = compare(preset("twist", alpha=1.0), classical_1e6[1], 1.0, GRID6)
        assert cmp.mode == "exp_integral"
        assert cmp.rows[-1].abs_err <= 0.01

    def test_csv(self, classical_1e5):
        buf = io.StringIO()
        compare(preset("unity"), classical_1e5[1], 0, [10, 100]).write_csv(buf)
        assert buf.getvalue().splitlines() == [
            "x,re_G_over_x,im_G_over_x,re_pred,im_pred,abs_err",
            "10,1,0,1,0,0",
            "100,1,0,1,0,0",
        ]
