"""Kernels of the wave propagators ``D^{-tau} Dt^{tau-sigma} e^{itD}``.

The kernel is split into a low-frequency part ``w0`` (``lam in [0, 2]``)
and a high-frequency part ``w_inf`` (``lam >= 1``) with the cutoffs of
:mod:`hyperwave.cutoffs`. The regularized family ``w_inf_tilde`` carries
the prefactor ``exp(sigma^2)/Gamma((n+1)/2 - sigma)``.

Every kernel is the inverse spherical transform of its symbol, so it
carries the inversion constant ``C_inv``. This makes ``f * w_t`` equal to
the propagator applied to ``f``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import rgamma, roots_jacobi

from .cutoffs import chi0, chi_inf
from .errors import ValidationError
from .oscillatory import SymbolSpec, _build_panels, _contour_tail
from .quadrature import gauss_legendre
from .space import SpaceParams, _logsinh, _theta_rule, c_inverse, gamma_table, phi_matrix
from .transforms import constants

CONE_GAP = 1e-8
HC_MIN_RADIUS = 0.5


@dataclass(frozen=True)
class KernelParams:
    sigma: complex
    tau: float
    t: float
    space: SpaceParams

    def __post_init__(self):
        if not 0.0 <= self.tau < 1.5:
            raise ValidationError(f"tau must lie in [0, 3/2), got {self.tau}")
        if not np.isfinite(self.t):
            raise ValidationError("t must be finite")
        object.__setattr__(self, "sigma", complex(self.sigma))

    @property
    def real_sigma(self) -> bool:
        return self.sigma.imag == 0.0


def multiplier(params: SpaceParams, sigma: complex, tau: float, lam):
    """``lam^{-tau} (lam^2 + rho_tilde^2)^{(tau - sigma)/2}``, principal branches."""
    lam = np.asarray(lam, dtype=complex)
    # exp-log form underflows cleanly where complex ``**`` returns nan
    with np.errstate(over="ignore", under="ignore"):
        return lam ** (-tau) * np.exp(0.5 * (tau - complex(sigma)) * np.log(lam * lam + params.rho_tilde**2))


def regularizing_factor(n: int, sigma: complex) -> complex:
    """``exp(sigma^2) / Gamma((n+1)/2 - sigma)``."""
    sigma = complex(sigma)
    return complex(np.exp(sigma * sigma) * rgamma(0.5 * (n + 1) - sigma))


# ---------------------------------------------------------------------------
# low frequencies


def _low_rule(tau: float, tmax: float):
    """Nodes/weights on (0, 2) absorbing the ``lam^{2-tau}`` endpoint factor.

    The Plancherel density vanishes like ``lam^2``, so the weights carry
    ``lam^{2-tau}`` and the integrand is ``|c|^{-2}/lam^2`` times smooth terms.
    """
    beta = 2.0 - tau
    n1 = int(48 + 2.0 * tmax)
    x, w = roots_jacobi(n1, 0.0, beta)
    lam1 = 0.5 * (x + 1.0)
    w1 = w * 0.5 ** (1.0 + beta)  # (1+x)^beta = (2 lam)^beta
    n2 = int(20 + tmax / 4.0)
    xg, wg = gauss_legendre(n2)
    edges = np.linspace(1.0, 2.0, 9)
    lam2 = np.concatenate([0.5 * (b - a) * xg + 0.5 * (a + b) for a, b in zip(edges[:-1], edges[1:])])
    w2 = np.concatenate([0.5 * (b - a) * wg for a, b in zip(edges[:-1], edges[1:])]) * lam2**beta
    return np.concatenate([lam1, lam2]), np.concatenate([w1, w2])


def w0_grid(params: SpaceParams, sigma: complex, tau: float, ts, rs) -> np.ndarray:
    """Low-frequency kernel on a (t, r) grid, shape ``(len(ts), len(rs))``."""
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    rs = np.atleast_1d(np.asarray(rs, dtype=float))
    KernelParams(sigma, tau, 0.0, params)
    lam, w = _low_rule(tau, float(np.max(np.abs(ts))) if ts.size else 0.0)
    dens = np.abs(c_inverse(params, lam)) ** 2 / (lam * lam)
    amp = chi0(lam) * dens * (lam * lam + params.rho_tilde**2) ** (0.5 * (tau - complex(sigma)))
    Phi = phi_matrix(params, lam, rs)  # (L, R)
    E = np.exp(1j * np.outer(ts, lam))  # (T, L)
    return constants(params)["C_inv"] * ((E * (w * amp)[None, :]) @ Phi)


def w0(kp: KernelParams, r: float) -> complex:
    """Low-frequency kernel ``w_t^0(r)``."""
    return complex(w0_grid(kp.space, kp.sigma, kp.tau, [kp.t], [r])[0, 0])


# ---------------------------------------------------------------------------
# high frequencies


def _nudge(x: np.ndarray) -> np.ndarray:
    return np.where(np.abs(x) < CONE_GAP, np.where(x < 0, -CONE_GAP, CONE_GAP), x)


def _hc_branches(params, sigma, tau, r, K):
    """Analytic amplitudes ``A(lam)`` of the two HC branches at radius r.

    ``|c|^{-2} phi_lam(r) = (2 sinh r)^{-rho} [A+(lam) e^{i lam r} + A-(lam) e^{-i lam r}]``;
    the radial prefactor is left out so that panel tolerances stay relative.
    """
    q = np.exp(-2.0 * r * np.arange(K + 1))

    def branch(sign):
        def amp(lam):
            lam = np.asarray(lam, dtype=complex)
            g = gamma_table(params, sign * lam.ravel(), K)
            series = (q @ g).reshape(lam.shape)
            return multiplier(params, sigma, tau, lam) * c_inverse(params, -sign * lam) * series

        return amp

    return branch(1.0), branch(-1.0)


def _hc_terms(r: float) -> int:
    return int(math.ceil(19.0 / r)) + 2


def _symbol_transform(evaluate, tail, xs, tol):
    """``int_0^inf chi_inf(lam) a(lam) e^{i lam x} dlam`` for analytic ``a``."""
    panels = _build_panels(lambda lam: chi_inf(lam) * evaluate(lam), [1.0, 1.5, 2.0], tol)
    return panels.transform(xs) + _contour_tail(tail, 2.0, xs, 0.0)


def w_inf_grid(params: SpaceParams, sigma: complex, tau: float, ts, rs, tol: float = 1e-11) -> np.ndarray:
    """Unregularized high-frequency kernel on a (t, r) grid.

    Radii ``r >= 0.5`` (or ``|t| < 2r``) use the Harish-Chandra split into
    two one-dimensional transforms at ``x = t +- r``. Small radii with
    ``|t| >= 2r`` average the full transform over the nodes of the
    finite-interval representation of ``phi_lam(r)``.
    """
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    rs = np.atleast_1d(np.asarray(rs, dtype=float))
    out = np.zeros((ts.size, rs.size), dtype=complex)

    def full(lam):
        lam = np.asarray(lam, dtype=complex)
        return c_inverse(params, lam) * c_inverse(params, -lam) * multiplier(params, sigma, tau, lam)

    for j, r in enumerate(rs):
        theta = (r < HC_MIN_RADIUS) & (np.abs(ts) >= 2.0 * r)
        if r == 0.0:
            theta = np.ones_like(ts, dtype=bool)
        if np.any(theta):
            tt = ts[theta]
            if r == 0.0:
                out[theta, j] = _symbol_transform(full, full, _nudge(tt), tol)
            else:
                u, w = _theta_rule(params, r, 48)
                xs = np.concatenate([np.add.outer(tt, u), np.subtract.outer(tt, u)], axis=1)
                K = _symbol_transform(full, full, _nudge(xs.ravel()), tol).reshape(xs.shape)
                ww = np.concatenate([w, w]) * 0.5
                out[theta, j] = K @ ww
        rest = ~theta
        if np.any(rest):
            tt = ts[rest]
            Ap, Am = _hc_branches(params, sigma, tau, r, _hc_terms(r))
            pref = math.exp(-params.rho * (math.log(2.0) + float(_logsinh(r))))
            out[rest, j] = pref * (
                _symbol_transform(Ap, Ap, _nudge(tt + r), tol) + _symbol_transform(Am, Am, _nudge(tt - r), tol)
            )
    return constants(params)["C_inv"] * out


def w_inf_tilde_grid(params: SpaceParams, sigma: complex, tau: float, ts, rs, tol: float = 1e-11) -> np.ndarray:
    """Regularized high-frequency kernel on a (t, r) grid."""
    sigma = complex(sigma)
    if not 0.0 <= sigma.real <= 0.5 * (params.n + 1):
        raise ValidationError("Re(sigma) must lie in [0, (n+1)/2]")
    KernelParams(sigma, tau, 0.0, params)
    pref = regularizing_factor(params.n, sigma)
    if pref == 0:
        return np.zeros((np.size(ts), np.size(rs)), dtype=complex)
    return pref * w_inf_grid(params, sigma, tau, ts, rs, tol)


def w_inf_tilde(kp: KernelParams, r: float, tol: float = 1e-11) -> complex:
    """Regularized high-frequency kernel at one point."""
    return complex(w_inf_tilde_grid(kp.space, kp.sigma, kp.tau, [kp.t], [r], tol)[0, 0])


def w_inf(kp: KernelParams, r: float, tol: float = 1e-11) -> complex:
    return complex(w_inf_grid(kp.space, kp.sigma, kp.tau, [kp.t], [r], tol)[0, 0])


def full_kernel_n3(sigma: complex, tau: float, ts, r: float, rho_tilde: float = 2.0, tol: float = 1e-11) -> np.ndarray:
    """Whole kernel for n = 3 from the closed forms, without any cutoff.

    ``|c|^{-2} phi_lam(r) = lam sin(lam r) / sinh r``; used to check that
    ``w0 + w_inf`` reproduces the unsplit integral.
    """
    params = SpaceParams(3, rho_tilde)
    ts = np.atleast_1d(np.asarray(ts, dtype=float))

    def a(lam):
        lam = np.asarray(lam, dtype=complex)
        return lam * multiplier(params, sigma, tau, lam) / (2j * math.sinh(r))

    spec = SymbolSpec(a, 1.0 - complex(sigma).real, breakpoints=(1.0,), tail=a, tail_start=2.0)
    from .oscillatory import fourier_many

    val = fourier_many(spec, _nudge(ts + r), tol) - fourier_many(spec, _nudge(ts - r), tol)
    return constants(params)["C_inv"] * val


# ---------------------------------------------------------------------------
# envelope verification

REGIMES = ("low-bounded", "low-inner", "low-outer", "high-near", "high-far", "high-large")


@dataclass
class RegimeTable:
    """Ratios ``|kernel| / envelope`` on a base grid and a refined grid."""

    regime: str
    rows: np.ndarray  # columns: t, r, |value|, envelope, ratio
    constant: float
    argmax: tuple
    refined_constant: float
    growth_tolerance: float = 1.25

    @property
    def passed(self) -> bool:
        return bool(
            np.isfinite(self.constant)
            and np.isfinite(self.refined_constant)
            and self.refined_constant <= self.growth_tolerance * self.constant
        )

    def as_dict(self) -> dict:
        return {
            "regime": self.regime,
            "constant": self.constant,
            "argmax_t": self.argmax[0],
            "argmax_r": self.argmax[1],
            "refined_constant": self.refined_constant,
            "verdict": "PASS" if self.passed else "FAIL",
        }


def _phi0(params, rs):
    return phi_matrix(params, [0.0], rs)[0]


def _regime_samples(params, regime, sigma, tau, nt, nr, order):
    """Return arrays (t, r, |kernel|, envelope) for one regime."""
    n, rho = params.n, params.rho
    ts_list, rs_list, vals, envs = [], [], [], []
    if regime == "low-bounded":
        ts = np.linspace(-2.0, 2.0, nt)
        rs = np.linspace(0.0, 5.0, nr)
        W = np.abs(w0_grid(params, sigma, tau, ts, rs))
        env = np.broadcast_to(_phi0(params, rs), W.shape)
        T, R = np.meshgrid(ts, rs, indexing="ij")
        return T.ravel(), R.ravel(), W.ravel(), env.ravel()
    if regime in ("low-inner", "low-outer"):
        for t in np.geomspace(4.0, 40.0, nt):
            if regime == "low-inner":
                rs = np.linspace(0.0, t / 2, nr)
                env = t ** (tau - 3.0) * _phi0(params, rs)
            else:
                rs = np.linspace(t / 2, t + 10.0, nr)
                env = (1.0 + np.abs(rs - t)) ** (tau - 2.0) * np.exp(-rho * rs)
            ts_list.append(np.full(rs.size, t))
            rs_list.append(rs)
            vals.append(np.abs(w0_grid(params, sigma, tau, [t], rs)[0]))
            envs.append(env)
    elif regime in ("high-near", "high-far"):
        ts = np.geomspace(0.05, 2.0, nt)
        rs = np.linspace(0.0, 3.0, nr) if regime == "high-near" else np.linspace(3.0, 10.0, nr)
        W = np.abs(w_inf_tilde_grid(params, sigma, tau, ts, rs))
        T, R = np.meshgrid(ts, rs, indexing="ij")
        if regime == "high-near":
            env = T ** (-0.5 * (n - 1)) if n >= 3 else T**-0.5 * (1.0 - np.log(T))
        else:
            env = R ** (-float(order)) * np.exp(-rho * R)
        return T.ravel(), R.ravel(), W.ravel(), env.ravel()
    elif regime == "high-large":
        for t in np.geomspace(2.0, 20.0, nt):
            # keep the radial spacing fixed so long windows stay resolved
            rs = np.linspace(0.0, t + 10.0, int(nr * (t + 10.0) / 10.0))
            ts_list.append(np.full(rs.size, t))
            rs_list.append(rs)
            vals.append(np.abs(w_inf_tilde_grid(params, sigma, tau, [t], rs)[0]))
            envs.append((1.0 + np.abs(rs - t)) ** (-float(order)) * np.exp(-rho * rs))
    else:
        raise ValidationError(f"unknown regime {regime!r}")
    return (np.concatenate(ts_list), np.concatenate(rs_list), np.concatenate(vals), np.concatenate(envs))


def regime_table(params: SpaceParams, regime: str, sigma=None, tau: float = 0.0, nt: int = 8, nr: int = 24, order: int = 5):
    """Ratio table for one regime plus the max ratio under x2 refinement.

    ``sigma`` defaults to 1 for the low-frequency regimes and to
    ``(n+1)/2 + i`` on the critical line for the regularized kernel.
    """
    if sigma is None:
        sigma = 1.0 if regime.startswith("low") else 0.5 * (params.n + 1) + 1j
    base = _regime_samples(params, regime, sigma, tau, nt, nr, order)
    fine = _regime_samples(params, regime, sigma, tau, 2 * nt, 2 * nr, order)
    ratio = base[2] / base[3]
    k = int(np.argmax(ratio))
    rows = np.column_stack([base[0], base[1], base[2], base[3], ratio])
    return RegimeTable(regime, rows, float(ratio[k]), (float(base[0][k]), float(base[1][k])), float(np.max(fine[2] / fine[3])))


def kernel_envelope_report(params: SpaceParams, tau: float = 0.0, regimes=REGIMES, nt: int = 8, nr: int = 24, order: int = 5, sigma_low=1.0, sigma_high=None) -> list:
    """Ratio tables for the requested low- and high-frequency regimes."""
    out = []
    for reg in regimes:
        sigma = sigma_low if reg.startswith("low") else sigma_high
        out.append(regime_table(params, reg, sigma, tau, nt, nr, order))
    return out


def large_time_sup_ratio(params: SpaceParams, sigma, tau: float, ts, nr: int = 80) -> np.ndarray:
    """``sup_{r <= t/2} |w_t^0(r)| / phi_0(r)`` for each ``t``."""
    out = []
    for t in np.asarray(ts, dtype=float):
        rs = np.linspace(0.0, abs(t) / 2, nr)
        out.append(np.max(np.abs(w0_grid(params, sigma, tau, [t], rs)[0]) / _phi0(params, rs)))
    return np.array(out)
