"""Linear propagator, energy identities and the Picard scheme."""

import numpy as np
import pytest

from conftest import gaussian
from hyperwave.errors import DivergenceError, ValidationError
from hyperwave.space import SpaceParams
from hyperwave.transforms import lq_norm
from hyperwave.wave import (
    WaveState,
    conserved_pair,
    dalembert_n3,
    energy,
    energy_history,
    nlw_picard,
    propagate,
    sobolev_norm,
)


@pytest.fixture
def zero():
    return gaussian(amplitude=0.0)


class TestState:
    def test_grids_must_match(self):
        with pytest.raises(ValidationError):
            WaveState(gaussian(r_max=8.0), gaussian(r_max=6.0))


class TestPropagate:
    def test_time_zero_is_identity(self, params, gauss, zero):
        st = propagate(params, gauss, zero, 0.0)
        np.testing.assert_array_equal(st.u.values, gauss.values)

    @pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
    def test_dalembert_n3(self, h3, gauss, zero, t):
        st = propagate(h3, gauss, zero, t)
        ref = dalembert_n3(lambda r: np.exp(-r * r), t, st.u.grid)
        err = np.max(np.abs(st.u.values.real - ref)) / np.max(np.abs(ref))
        assert err < 1e-5

    def test_time_reversal(self, h3, gauss, zero):
        fwd = propagate(h3, gauss, zero, 1.5)
        back = propagate(h3, fwd.u, fwd.ut, -1.5, rgrid=gauss.grid)
        np.testing.assert_allclose(back.u.values.real, gauss.values, atol=1e-7)

    def test_group_property(self, h3, gauss, zero):
        one = propagate(h3, gauss, zero, 1.0)
        two = propagate(h3, one.u, one.ut, 1.0)
        direct = propagate(h3, gauss, zero, 2.0, rgrid=two.u.grid)
        np.testing.assert_allclose(two.u.values.real, direct.u.values.real, atol=1e-7)

    def test_mismatched_data(self, h3):
        with pytest.raises(ValidationError):
            propagate(h3, gaussian(r_max=8.0), gaussian(r_max=6.0), 1.0)


class TestSobolev:
    def test_parseval(self, params, gauss):
        # sigma = tau = 0 is the L^2 norm
        assert sobolev_norm(params, gauss, 0.0, 0.0) == pytest.approx(lq_norm(params, gauss, 2.0), rel=1e-5)

    def test_monotone_in_sigma(self, h3, gauss):
        vals = [sobolev_norm(h3, gauss, s, 0.0) for s in (0.0, 0.5, 1.0, 2.0)]
        assert np.all(np.diff(vals) > 0)

    def test_linear(self, h3, gauss):
        assert sobolev_norm(h3, gaussian(amplitude=2.5), 1.0, 0.5) == pytest.approx(2.5 * sobolev_norm(h3, gauss, 1.0, 0.5))

    def test_tau_range(self, h3, gauss):
        with pytest.raises(ValidationError):
            sobolev_norm(h3, gauss, 0.0, 1.5)


class TestEnergy:
    def test_zero(self, h3, zero):
        assert energy(h3, WaveState(zero, zero)) == 0.0

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_drift(self, n):
        p = SpaceParams(n)
        rep = energy_history(p, gaussian(), gaussian(0.5, 0.3), np.linspace(0, 10, 6))
        assert rep.max_rel_drift < 1e-5

    def test_conserved_pair(self, h3, gauss):
        rep = energy_history(h3, gauss, gaussian(0.5), np.linspace(0, 10, 6), sigma=1.0, tau=-0.5)
        assert rep.max_rel_drift < 1e-5
        assert rep.energies[0] == pytest.approx(conserved_pair(h3, WaveState(gauss, gaussian(0.5)), 1.0, -0.5), rel=1e-6)

    def test_quadratic(self, h3, gauss, zero):
        e1 = energy(h3, WaveState(gauss, zero))
        e2 = energy(h3, WaveState(gaussian(amplitude=2.0), zero))
        assert e2 == pytest.approx(4 * e1)


class TestPicard:
    def test_zero_data(self, h3, zero):
        rep = nlw_picard(h3, zero, zero, 3.0, 0.2)
        assert rep.converged
        assert rep.iterations == 1

    def test_contraction(self, h3, zero):
        rep = nlw_picard(h3, gaussian(amplitude=0.5), zero, 3.0, 0.2)
        assert rep.converged
        assert max(rep.ratios[1:]) <= 0.5
        assert rep.residual < 1e-4

    def test_shorter_interval_contracts_faster(self, h3, zero):
        f = gaussian(amplitude=2.0)
        long = nlw_picard(h3, f, zero, 3.0, 0.4)
        short = nlw_picard(h3, f, zero, 3.0, 0.2)
        assert short.ratios[1] < long.ratios[1]

    def test_divergence(self, h3, zero):
        with pytest.raises(DivergenceError):
            nlw_picard(h3, gaussian(amplitude=10.0), zero, 3.0, 2.0)

    def test_norm_pair_recorded(self, h3, zero):
        rep = nlw_picard(h3, gaussian(amplitude=0.5), zero, 3.0, 0.2, norm_pair=(4.0, 3.0))
        assert rep.norm_pair == (4.0, 3.0)
        assert rep.converged

    @pytest.mark.parametrize("kw", [{"gamma": 1.0, "T": 0.2}, {"gamma": 3.0, "T": 0.0}])
    def test_validation(self, h3, zero, kw):
        with pytest.raises(ValidationError):
            nlw_picard(h3, zero, zero, **kw)
