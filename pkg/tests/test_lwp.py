"""Admissible pairs, exponent thresholds and the well-posedness classifier."""

from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyperwave.errors import ValidationError
from hyperwave.lwp import (
    AdmissiblePair,
    Surd,
    admissible,
    boundary_distance,
    bruteforce_witness,
    classify,
    condts_feasible,
    coupling_ok,
    curve_C1,
    curve_C2,
    curve_C3,
    curve_C1_tilde,
    region_samples,
    sigma_min,
    thresholds,
)


class TestSurd:
    def test_perfect_square_collapses(self):
        assert Surd.make(F(1, 2), F(1, 4), 36).rational
        assert Surd.make(F(1, 2), F(1, 4), 36) == F(2)

    def test_ordering(self):
        s = Surd.make(3, 1, 6)
        assert F(5) < s < F(11, 2)
        assert str(s) == "3+sqrt(6)"

    def test_sign_of_mixed_terms(self):
        assert Surd.make(-3, 1, 8).sign() == -1
        assert Surd.make(-2, 1, 5).sign() == 1


class TestAdmissible:
    @pytest.mark.parametrize(
        "n, pair, ok",
        [
            (4, (F(1, 2), F(1, 6)), True),
            (3, (F(1, 2), F(0)), False),
            (2, (F(1, 20), F(1, 5)), False),
            (2, (F(1, 8), F(1, 4)), False),  # 2/p + 1/q = 1/2 exactly, strict in dimension two
            (3, (F(1, 2), F(1, 100)), True),
            (5, (F(1, 2), F(1, 2)), False),
        ],
    )
    def test_examples(self, n, pair, ok):
        assert admissible(n, AdmissiblePair(*pair)) is ok

    def test_range(self):
        with pytest.raises(ValidationError):
            AdmissiblePair(F(3, 2), F(1, 4))

    @settings(max_examples=200, deadline=None)
    @given(
        n=st.integers(3, 8),
        a=st.tuples(st.integers(1, 60), st.integers(1, 59)),
        b=st.tuples(st.integers(1, 60), st.integers(1, 59)),
        t=st.fractions(0, 1),
    )
    def test_convex(self, n, a, b, t):
        pa = AdmissiblePair(F(a[0], 120), F(a[1], 120))
        pb = AdmissiblePair(F(b[0], 120), F(b[1], 120))
        if admissible(n, pa) and admissible(n, pb):
            mix = AdmissiblePair(t * pa.inv_p + (1 - t) * pb.inv_p, t * pa.inv_q + (1 - t) * pb.inv_q)
            assert admissible(n, mix)


class TestThresholds:
    def test_n4(self):
        th = thresholds(4)
        assert (th.gamma1, th.gamma2, th.gamma_conf, th.gamma4) == (F(7, 4), F(25, 13), F(7, 3), F(19, 7))
        assert th.gamma3 == F(5, 2)
        assert th.gamma3.rational
        assert th.gamma_inf == F(5, 2)
        assert th.gamma_tilde_inf == F(17, 5)

    def test_n3(self):
        d = thresholds(3).as_dict()
        assert d["gamma1"] == "2"
        assert d["gamma_conf"] == "3"
        assert d["gamma3"] == "(11+sqrt(73))/6"
        assert d["gamma3_float"] == pytest.approx((11 + np.sqrt(73)) / 6)

    def test_n2(self):
        th = thresholds(2)
        assert th.gamma_conf == 5
        assert str(th.gamma_inf) == "3+sqrt(6)"
        assert th.gamma1 is None

    def test_gamma_inf_switch(self):
        assert thresholds(5).gamma_inf == thresholds(5).gamma3
        assert thresholds(6).gamma_inf == F(43, 23)

    @pytest.mark.parametrize("n", range(4, 13))
    def test_ordering(self, n):
        th = thresholds(n)
        assert th.gamma1 < th.gamma2 < th.gamma_conf
        assert th.gamma_conf < th.gamma_inf
        assert th.gamma_inf == min(th.gamma3, th.gamma4, key=float)
        assert th.gamma_inf <= th.gamma_tilde_inf


class TestSigmaMin:
    @pytest.mark.parametrize("n", range(4, 10))
    def test_junctions(self, n):
        th = thresholds(n)
        assert curve_C1(n, th.gamma1) == 0
        assert curve_C1(n, th.gamma2) == curve_C2(n, th.gamma2)
        assert curve_C2(n, th.gamma_conf) == curve_C3(n, th.gamma_conf) == F(1, 2)

    def test_n3_remark(self):
        sm = sigma_min(3, F(5, 2))
        assert sm.value == F(1, 3)
        assert not sm.strict

    def test_n2_curve(self):
        assert curve_C1_tilde(F(3)) == F(1, 4)
        assert sigma_min(2, F(5, 2)).value == curve_C1_tilde(F(5, 2))

    @pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
    def test_nondecreasing(self, n):
        top = float(thresholds(n).gamma_inf)
        gs = np.linspace(1.01, top - 1e-3, 200)
        vals = [float(sigma_min(n, F(repr(float(g)))).value) for g in gs]
        assert np.all(np.diff(vals) >= -1e-15)

    def test_outside(self):
        assert sigma_min(4, 3).outside
        assert sigma_min(4, F(5, 2)).outside

    def test_gamma_must_exceed_one(self):
        with pytest.raises(ValidationError):
            sigma_min(4, 1)


class TestConditions:
    def test_case_a_witness(self):
        ok, diag = condts_feasible(4, F(3, 2), (F(1, 2), F(3, 10), F(1, 5), F(1, 2)))
        assert not ok  # 1/q~ = 1/2 is excluded
        quad = classify(4, F(3, 2), F(1, 10)).witness
        ok, diag = condts_feasible(4, F(3, 2), quad)
        assert ok
        assert set(diag) == {"i", "ii", "iii", "iv", "v", "vi", "vii"}

    def test_q_half_rejected(self):
        ok, diag = condts_feasible(4, F(3, 2), (F(1, 2), F(1, 2), F(1, 2), F(1, 3)))
        assert not ok
        assert not diag["vi"]

    def test_i_strict(self):
        # gamma/p = 1 - 1/p~ exactly
        ok, diag = condts_feasible(4, F(3, 2), (F(2, 5), F(3, 10), F(2, 5), F(2, 5)))
        assert not diag["i"]
        assert not ok

    def test_third_tenth_has_no_companions(self):
        # (ii) with (vii) forces gamma/q >= 1 - 1/q~ > 1/2, i.e. 1/q > 1/3 at gamma = 3/2
        found = any(
            condts_feasible(4, F(3, 2), (F(a, 120), F(3, 10), F(b, 120), F(c, 120)))[0]
            for a in range(1, 61)
            for b in range(1, 61)
            for c in range(1, 60)
        )
        assert not found

    def test_witness_above_third(self):
        w = bruteforce_witness(4, F(3, 2), F(1), 60)
        assert w is not None
        assert w[1] > F(1, 3)

    def test_coupling(self):
        assert coupling_ok(4, F(1, 2), F(3, 10))
        assert not coupling_ok(4, F(1, 4), F(1, 10))


class TestClassify:
    def test_case_a(self):
        v = classify(4, F(3, 2), F(1, 10))
        assert v.status == "LWP"
        assert v.case_label == "A"
        assert condts_feasible(4, F(3, 2), v.witness)[0]
        assert set(v.as_dict()["witness"]) == {"1/p", "1/q", "1/p~", "1/q~"}

    @pytest.mark.parametrize("sigma, status", [(F(2, 5), "LWP"), (F(3, 10), "not-covered")])
    def test_n3(self, sigma, status):
        assert classify(3, F(5, 2), sigma).status == status

    def test_outside(self):
        v = classify(4, 3, 1)
        assert v.status == "outside-theorem-range"
        assert v.witness is None

    @pytest.mark.parametrize("n", [2, 3, 4, 5, 6, 7])
    def test_witnesses_validate(self, n):
        top = float(thresholds(n).gamma_inf)
        for g in np.linspace(1.05, top - 0.01, 9):
            g = F(repr(float(g)))
            sm = sigma_min(n, g)
            v = classify(n, g, sm.value + F(1, 50))
            assert v.status == "LWP"
            assert condts_feasible(n, g, v.witness)[0]
            assert coupling_ok(n, sm.value + F(1, 50), v.witness[1])

    def test_region_samples(self):
        rows = region_samples(4, [1.5, 3.0], [0.0, 0.5])
        assert [r["status"] for r in rows] == ["not-covered", "LWP", "outside-theorem-range", "outside-theorem-range"]


class TestBruteforce:
    def test_far_gamma(self):
        assert bruteforce_witness(4, 10, 10, 200) is None

    @pytest.mark.parametrize("n", [4, 5])
    def test_large_sigma(self, n):
        top = float(thresholds(n).gamma_inf)
        for g in np.linspace(1.1, top - 0.05, 6):
            assert bruteforce_witness(n, F(repr(float(g))), 10, 120) is not None

    def test_denominator_bound(self):
        with pytest.raises(ValidationError):
            bruteforce_witness(4, 2, 1, 4)

    def test_witness_is_exact(self):
        w = bruteforce_witness(4, F(2), F(1, 2), 60)
        assert condts_feasible(4, F(2), w)[0]
        assert coupling_ok(4, F(1, 2), w[1])

    @pytest.mark.parametrize("n, gmax", [(4, 3.0), (3, 3.5), (2, 6.0)])
    def test_cross_validation(self, n, gmax):
        gammas = np.linspace(1.02, gmax, 20)
        sigmas = np.linspace(0.0, 1.5, 20)
        checked = 0
        for g in gammas:
            for s in sigmas:
                if boundary_distance(n, g, s) < 1e-3:
                    continue
                gq, sq = F(repr(float(g))), F(repr(float(s)))
                lwp = classify(n, gq, sq).status == "LWP"
                assert lwp == (bruteforce_witness(n, gq, sq, 200) is not None), (g, s)
                checked += 1
        assert checked > 350
