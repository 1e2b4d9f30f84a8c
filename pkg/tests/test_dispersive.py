"""Kunze-Stein bounds, radial convolution and dispersive decay."""

import math

import numpy as np
import pytest

from conftest import gaussian
from hyperwave.dispersive import (
    KSExponents,
    critical_sigma,
    decoupled_low_freq_check,
    delta_approximation,
    dispersive_decay_probe,
    ks_bound,
    radial_convolution,
    small_time_envelope,
)
from hyperwave.errors import DivergenceError, ValidationError
from hyperwave.space import SpaceParams
from hyperwave.transforms import RadialFunction


class TestKSExponents:
    def test_equal_exponents(self):
        ks = KSExponents(4.0, 4.0)
        assert ks.mu == 1.0
        assert ks.Q == 2.0

    def test_asymmetric(self):
        ks = KSExponents(3.0, 6.0)
        assert ks.mu == pytest.approx(2 / 3)
        assert ks.Q == pytest.approx(2.0)

    @pytest.mark.parametrize("q", [1.5, math.inf, float("nan")])
    def test_range(self, q):
        with pytest.raises(ValidationError):
            KSExponents(q, 4.0)


class TestKSBound:
    @pytest.mark.parametrize(
        "q, ref",
        [
            (4.0, 0.42133581854410429566),  # mpmath: sqrt(int r sinh r e^{-2r^2})
            (2.0, 0.56896894861718680888),  # mpmath: int r sinh r e^{-r^2}
        ],
    )
    def test_gaussian_n3(self, h3, q, ref):
        assert ks_bound(h3, gaussian(), KSExponents(q, q)) == pytest.approx(ref, rel=1e-8)

    def test_zero_kernel(self, h3):
        assert ks_bound(h3, gaussian(amplitude=0.0), KSExponents(4, 4)) == 0.0

    def test_monotone_in_kernel(self, params):
        ks = KSExponents(3.0, 5.0)
        assert ks_bound(params, gaussian(0.5), ks) < ks_bound(params, gaussian(1.0), ks)

    def test_homogeneous(self, params):
        ks = KSExponents(4.0, 4.0)
        assert ks_bound(params, gaussian(amplitude=3.0), ks) == pytest.approx(3 * ks_bound(params, gaussian(), ks))

    def test_non_decaying_kernel_rejected(self, h3):
        flat = RadialFunction.sample(lambda r: np.exp(-0.1 * r), r_max=8.0, decay="exponential")
        with pytest.raises(DivergenceError):
            ks_bound(h3, flat, KSExponents(2.0, 2.0))


class TestConvolution:
    def test_gaussians_n3(self, h3):
        f = gaussian(1.0)
        k = gaussian(0.5)
        rs = np.array([0.0, 0.5, 1.0, 2.0, 3.0])
        # mpmath: (e^{-r^2} * e^{-2r^2})(r) by the n = 3 convolution formula
        ref = [0.1012101901465187, 0.084037724229722332, 0.048259029221558431, 0.0054433112161480358, 0.00015564650502043459]
        out = radial_convolution(h3, f, k, rgrid=rs)
        np.testing.assert_allclose(out.values.real, ref, rtol=1e-4, atol=1e-9)

    def test_commutative(self, params):
        f, k = gaussian(1.0), gaussian(0.3)
        rs = np.linspace(0, 3, 7)
        a = radial_convolution(params, f, k, rgrid=rs).values
        b = radial_convolution(params, k, f, rgrid=rs).values
        np.testing.assert_allclose(a, b, rtol=1e-6, atol=1e-10)

    def test_approximate_identity(self, h3):
        f = gaussian(1.0)
        rs = np.linspace(0, 2, 5)
        out = radial_convolution(h3, f, delta_approximation(h3, 1e-4), rgrid=rs)
        np.testing.assert_allclose(out.values.real, np.exp(-rs**2), atol=1e-3)


class TestDecay:
    def test_critical_sigma(self):
        assert critical_sigma(3, 4.0) == pytest.approx(1.0)

    def test_small_time_envelope(self):
        t = np.array([0.1, 0.2])
        np.testing.assert_allclose(small_time_envelope(3, 4.0, t), t**-0.5)
        assert small_time_envelope(2, 4.0, 0.1) > 0.1**-0.25

    def test_validation(self, h3):
        with pytest.raises(ValidationError):
            dispersive_decay_probe(h3, 2.0)
        with pytest.raises(ValidationError):
            dispersive_decay_probe(h3, 4.0, sigma=0.5)
        with pytest.raises(ValidationError):
            dispersive_decay_probe(h3, 4.0, times=[0.0, 1.0])

    def test_probe_below_upper_bound(self, h3):
        rep = dispersive_decay_probe(h3, 4.0, times=[0.1, 0.5, 1.0])
        assert np.all(rep.lower <= rep.upper)
        assert np.all(rep.lower > 0)

    def test_small_time_slope_n3(self, h3):
        rep = dispersive_decay_probe(h3, 4.0, times=np.geomspace(0.02, 0.5, 6), probe=False)
        assert rep.small_slope == pytest.approx(-0.5, abs=0.1)

    def test_large_time_slope_n3(self, h3):
        rep = dispersive_decay_probe(h3, 4.0, times=np.geomspace(2, 40, 6), probe=False, window="large")
        assert rep.large_slope == pytest.approx(-2.0, abs=0.25)

    def test_n2_envelope_bounded(self):
        params = SpaceParams(2)
        t = np.geomspace(0.005, 0.5, 5)
        rep = dispersive_decay_probe(params, 4.0, times=t, probe=False)
        ratio = rep.upper / rep.envelope
        # no growth as t -> 0
        assert np.all(np.diff(ratio) > 0)


class TestDecoupled:
    def test_tau0_bounded(self, h3):
        rep = decoupled_low_freq_check(h3, 1.0, 0.0, 4.0, 4.0, np.geomspace(2, 60, 6))
        assert rep.passed

    def test_regular_at_zero(self, h3):
        rep = decoupled_low_freq_check(h3, 1.0, 1.0, 4.0, 4.0, [0.0, 0.5])
        assert np.all(np.isfinite(rep.bounds))

    def test_tau1_late_slope(self, h3):
        rep = decoupled_low_freq_check(h3, 1.0, 1.0, 4.0, 4.0, np.geomspace(15, 80, 6), slope_from=15)
        assert rep.slope == pytest.approx(-2.0, abs=0.25)
        assert rep.passed

    def test_range(self, h3):
        with pytest.raises(ValidationError):
            decoupled_low_freq_check(h3, 1.0, 1.0, 2.0, 4.0, [1.0])
