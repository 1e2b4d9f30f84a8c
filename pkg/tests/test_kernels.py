"""Low- and high-frequency wave kernels and their pointwise envelopes."""

import numpy as np
import pytest

from hyperwave.errors import ValidationError
from hyperwave.kernels import (
    REGIMES,
    KernelParams,
    full_kernel_n3,
    large_time_sup_ratio,
    multiplier,
    regime_table,
    regularizing_factor,
    w0,
    w0_grid,
    w_inf_grid,
    w_inf_tilde,
    w_inf_tilde_grid,
)
from hyperwave.space import SpaceParams


class TestParams:
    @pytest.mark.parametrize("tau", [-0.1, 1.5, 2.0])
    def test_tau_range(self, h3, tau):
        with pytest.raises(ValidationError):
            KernelParams(1.0, tau, 1.0, h3)

    def test_multiplier(self, h3):
        lam = np.array([0.5, 1.0, 3.0])
        np.testing.assert_allclose(multiplier(h3, 2.0, 1.0, lam), lam**-1 * (lam**2 + 4) ** -0.5, rtol=1e-14)

    @pytest.mark.parametrize(
        "n, sigma, ref",
        [
            (3, 2 + 1j, -20.35049581882800851 + 32.693929040354504423j),  # mpmath
            (4, 1.5 - 0.5j, 2.7696586026792582302 - 8.5040073527974993084j),  # mpmath
        ],
    )
    def test_regularizing_factor(self, n, sigma, ref):
        assert regularizing_factor(n, sigma) == pytest.approx(ref, rel=1e-12)


class TestLowFrequency:
    @pytest.mark.parametrize(
        "sigma, tau, t, r, ref",
        [
            (2, 1, 1, 1.0, 0.12167733093500851708 + 0.17005776507124124679j),
            (1, 0, 3, 0.5, -0.16513182344676390225 - 0.059309571089978388097j),
            (1, 1, -2, 2.0, 0.0050724239423179843652 - 0.13655577477083334545j),
        ],
    )
    def test_n3_closed_density_oracle(self, h3, sigma, tau, t, r, ref):
        # mpmath: (2/pi) int_0^2 chi0 lam^{2-tau} (lam^2+4)^{(tau-sigma)/2} sin(lam r)/(lam sinh r) e^{i t lam}
        assert w0(KernelParams(sigma, tau, t, h3), r) == pytest.approx(ref, rel=1e-8)

    def test_conjugation(self, params):
        ts = np.array([0.5, 3.0, 12.0])
        rs = np.linspace(0, 4, 9)
        np.testing.assert_allclose(w0_grid(params, 1.0, 0.5, -ts, rs), np.conj(w0_grid(params, 1.0, 0.5, ts, rs)),
                                   atol=1e-14)

    def test_bounded_by_phi0(self, params):
        tab = regime_table(params, "low-bounded", tau=1.0)
        assert tab.passed
        assert tab.constant < 5

    @pytest.mark.parametrize("regime", ["low-inner", "low-outer"])
    def test_large_time_envelopes_n4(self, regime):
        tab = regime_table(SpaceParams(4), regime, tau=1.0)
        assert tab.passed, tab.as_dict()

    def test_sup_ratio_decays(self, h3):
        ts = np.array([10.0, 20.0, 40.0])
        s = large_time_sup_ratio(h3, 1.0, 1.0, ts)
        assert np.all(np.diff(s) < 0)


class TestHighFrequency:
    def test_large_sigma_suppressed(self, h3):
        assert abs(w_inf_grid(h3, 30.0, 0.0, [1.0], [1.0])[0, 0]) < 1e-10

    def test_regularized_vanishes_at_gamma_poles(self, h3):
        # 1/Gamma((n+1)/2 - sigma) vanishes at sigma = (n+1)/2
        assert w_inf_tilde(KernelParams(2.0, 0.0, 1.0, h3), 1.0) == 0
        with pytest.raises(ValidationError):
            w_inf_tilde(KernelParams(2.5, 0.0, 1.0, h3), 1.0)

    def test_conjugation(self, h3):
        ts = np.array([0.7, 4.0])
        rs = np.array([0.2, 1.0, 2.5])
        np.testing.assert_allclose(w_inf_grid(h3, 1.5, 0.5, -ts, rs), np.conj(w_inf_grid(h3, 1.5, 0.5, ts, rs)),
                                   rtol=1e-8, atol=1e-12)

    def test_split_reproduces_full_kernel(self, h3):
        ts = np.array([0.5, 1.5, 4.0])
        for r in (0.3, 1.0, 2.2):
            full = full_kernel_n3(1.5, 0.5, ts, r)
            split = w0_grid(h3, 1.5, 0.5, ts, [r])[:, 0] + w_inf_grid(h3, 1.5, 0.5, ts, [r])[:, 0]
            np.testing.assert_allclose(split, full, rtol=1e-6, atol=1e-9)

    def test_small_time_n3(self, h3):
        tab = regime_table(h3, "high-near")
        assert tab.passed
        t, ratio = tab.rows[:, 0], tab.rows[:, 4]
        # the envelope t^{-1} is attained: ratios do not vanish as t -> 0
        assert ratio[t == t.min()].max() > 0.1 * tab.constant

    def test_small_time_n2_log_envelope(self):
        tab = regime_table(SpaceParams(2), "high-near")
        assert tab.passed

    def test_rapid_decay_off_cone(self, h3):
        rs = np.linspace(5, 15, 41)
        sigma = 2 + 1j
        W = np.abs(w_inf_tilde_grid(h3, sigma, 0.0, [10.0], rs)[0])
        env = (1 + np.abs(rs - 10)) ** -5.0 * np.exp(-rs)
        refined = np.abs(w_inf_tilde_grid(h3, sigma, 0.0, [10.0], np.linspace(5, 15, 81))[0])
        env2 = (1 + np.abs(np.linspace(5, 15, 81) - 10)) ** -5.0 * np.exp(-np.linspace(5, 15, 81))
        assert np.max(refined / env2) <= 1.25 * np.max(W / env)

    def test_regime_names(self):
        assert len(REGIMES) == 6
        with pytest.raises(ValidationError):
            regime_table(SpaceParams(3), "nope")
