"""Kunze-Stein convolution bounds and dispersive decay of the wave propagator.

Operator norms ``L^{q'} -> L^q`` are bracketed rather than computed: the
Kunze-Stein integral of the kernel (plus an interpolation bound for the
high-frequency part) gives an upper value, and a Gaussian test function
gives a lower value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import rgamma

from .errors import DivergenceError, ValidationError
from .kernels import multiplier, w0_grid, w_inf_tilde_grid
from .oscillatory import fit_loglog_slope
from .quadrature import panel_grid, uniform_panels
from .space import SpaceParams, SpectralGrid, phi_matrix
from .transforms import (
    RadialFunction,
    adaptive_spectral_grid,
    SpectralFunction,
    inverse_spherical_transform,
    lq_norm,
    radial_grid,
    spherical_transform,
    volume_weights,
)


@dataclass(frozen=True)
class KSExponents:
    """Exponents of the Kunze-Stein criterion for ``L^{q_tilde'} -> L^q``."""

    q: float
    q_tilde: float

    def __post_init__(self):
        for v in (self.q, self.q_tilde):
            if not (2.0 <= v < math.inf):
                raise ValidationError(f"Kunze-Stein exponents must lie in [2, inf), got {v}")

    @property
    def mu(self) -> float:
        return 2.0 * min(self.q, self.q_tilde) / (self.q + self.q_tilde)

    @property
    def Q(self) -> float:
        return self.q * self.q_tilde / (self.q + self.q_tilde)


def _phi0(params: SpaceParams, rs) -> np.ndarray:
    return phi_matrix(params, [0.0], np.asarray(rs, dtype=float))[0]


def _ks_integral(params: SpaceParams, rs, w, values, ks: KSExponents) -> float:
    """``sum w sinh^{n-1} phi_0^mu |kappa|^Q`` (no final root)."""
    dens = np.sinh(rs) ** (params.n - 1) * _phi0(params, rs) ** ks.mu
    return float(np.sum(w * dens * np.abs(values) ** ks.Q))


def ks_bound(params: SpaceParams, kappa: RadialFunction, ks: KSExponents, tol: float = 1e-6) -> float:
    """Kunze-Stein integral ``(int sinh^{n-1} phi_0^mu |kappa|^Q dr)^{1/Q}``.

    Raises
    ------
    DivergenceError
        If the integrand is not decaying at the end of the grid, i.e. the
        truncated integral cannot be trusted to ``tol``.
    """
    rs = kappa.grid
    dens = np.sinh(rs) ** (params.n - 1) * _phi0(params, rs) ** ks.mu * np.abs(kappa.values) ** ks.Q
    total = float(np.sum(kappa.weights * dens))
    if total == 0.0:
        return 0.0
    if kappa.decay != "compactly-supported":
        # end-of-grid decay rate of the integrand gives the tail mass
        k = max(1, rs.size // 20)
        a, b = dens[-1 - k], dens[-1]
        if b > 0:
            rate = math.log(a / b) / (rs[-1] - rs[-1 - k]) if a > b else 0.0
            if rate <= 0 or b / rate > tol * total:
                raise DivergenceError("Kunze-Stein integrand does not decay on the grid")
    return total ** (1.0 / ks.Q)


# ---------------------------------------------------------------------------
# convolution


def radial_convolution(params: SpaceParams, f: RadialFunction, kappa: RadialFunction, rgrid=None, tol: float = 1e-10) -> RadialFunction:
    """``f * kappa`` for radial pairs, computed as ``H^{-1}(Hf Hkappa)``.

    The result is sampled on ``rgrid`` (default: the grid of ``f``).
    """
    cache = {}

    def product(g):
        Hf = spherical_transform(params, f, g)
        Hk = spherical_transform(params, kappa, g)
        cache["v"] = Hf.values * Hk.values
        return cache["v"]

    g = adaptive_spectral_grid(params, product, tol)
    prod = SpectralFunction(g, product(g))
    if rgrid is None:
        return inverse_spherical_transform(params, prod, f.grid, tol=max(tol, 1e-8), decay=f.decay, weights=f.weights)
    return inverse_spherical_transform(params, prod, rgrid, tol=max(tol, 1e-8), decay=f.decay)


def delta_approximation(params: SpaceParams, eps: float = 1e-4, r_max: float = 1.0) -> RadialFunction:
    """Approximate identity with ``H kappa(lam) = exp(-eps lam^2)``.

    The kernel is normalized so that ``H kappa(0) = 1``; it is sampled on
    a grid refined near the origin where it concentrates.
    """
    width = 0.25 * math.sqrt(eps)
    breaks = np.concatenate([uniform_panels(0.0, 12 * math.sqrt(eps), width), [r_max]])
    grid, w = panel_grid(np.unique(breaks), 12)
    lam_max = math.sqrt(40.0 / eps)
    sg = SpectralGrid.build(params, lam_max, lam_max / 256, 12)
    F = SpectralFunction(sg, np.exp(-eps * sg.lambdas**2))
    kappa = inverse_spherical_transform(params, F, grid, tol=1e-6, decay="compactly-supported", weights=w)
    mass = float(np.sum(volume_weights(params, kappa) * kappa.values * _phi0(params, grid)))
    return kappa.with_values(kappa.values / mass)


# ---------------------------------------------------------------------------
# dispersive decay


def critical_sigma(n: int, q: float) -> float:
    """Smallest admissible regularity ``(n+1)(1/2 - 1/q)``."""
    return (n + 1) * (0.5 - 1.0 / q)


def _r_rule(a: float, b: float, width: float = 0.25, m: int = 8):
    if b <= a:
        return np.zeros(0), np.zeros(0)
    return panel_grid(uniform_panels(a, b, width), m)


def ks_w0(params: SpaceParams, sigma, tau: float, t: float, ks: KSExponents, r_lo: float = 0.0, r_hi: float | None = None) -> float:
    """Kunze-Stein integral of ``w_t^0`` restricted to ``r_lo <= r <= r_hi``."""
    if r_hi is None:
        r_hi = abs(t) + 40.0
    rs, w = _r_rule(r_lo, r_hi)
    if rs.size == 0:
        return 0.0
    vals = w0_grid(params, sigma, tau, [t], rs)[0]
    return _ks_integral(params, rs, w, vals, ks) ** (1.0 / ks.Q)


_INTERP_IMAG = (0.5, 1.0, 2.0)


def _l2_bound(params: SpaceParams, tau: float, y: float) -> float:
    """Sup of the regularized high-frequency symbol on ``Re sigma = 0``."""
    lam = np.linspace(1.0, 50.0, 2000)
    sig = 1j * y
    m = np.abs(multiplier(params, sig, tau, lam)) * abs(np.exp(sig * sig) * rgamma(0.5 * (params.n + 1) - sig))
    return float(np.max(m))


def _sup_bound(params: SpaceParams, tau: float, y: float, ts, rmax_of) -> np.ndarray:
    """``sup_r |w~_t|`` on ``Re sigma = (n+1)/2`` for each ``t``."""
    sig = 0.5 * (params.n + 1) + 1j * y
    out = []
    for t in ts:
        rs = np.unique(np.concatenate([np.linspace(0.0, rmax_of(t), 33), [abs(t)]]))
        out.append(np.max(np.abs(w_inf_tilde_grid(params, sig, tau, [t], rs)[0])))
    return np.array(out)


def interpolation_bound(params: SpaceParams, tau: float, q: float, ts, large_time: bool = False) -> np.ndarray:
    """Three-lines bound on the high-frequency part at the critical sigma.

    ``M0^{1-theta} M1(t)^theta`` with ``theta = 1 - 2/q``, divided by the
    regularizing factor at ``sigma = theta (n+1)/2``. The sup over the
    imaginary direction is taken on a few sample lines.
    """
    ts = np.asarray(ts, dtype=float)
    theta = 1.0 - 2.0 / q
    n = params.n
    M0 = max(_l2_bound(params, tau, y) for y in _INTERP_IMAG)
    rmax_of = (lambda t: abs(t) + 10.0) if large_time else (lambda t: max(3.0, abs(t) + 1.0))
    M1 = np.max([_sup_bound(params, tau, y, ts, rmax_of) for y in _INTERP_IMAG], axis=0)
    sc = critical_sigma(n, q)
    reg = abs(math.exp(sc * sc) * rgamma(0.5 * (n + 1) - sc)) if sc < 0.5 * (n + 1) else 1.0
    return M0 ** (1.0 - theta) * M1**theta / reg


def _gaussian(s: float) -> RadialFunction:
    return RadialFunction.sample(lambda r: np.exp(-r * r / s), r_max=max(8.0, 6.0 * math.sqrt(s)))


def probe_ratio(params: SpaceParams, q: float, sigma, tau: float, t: float, scales=(0.5, 1.0, 2.0)) -> float:
    """``max_s ||f_s * w_t||_q / ||f_s||_{q'}`` over Gaussian bumps ``f_s``."""
    qp = q / (q - 1.0)
    best = 0.0
    rgrid, rw = radial_grid(abs(t) + 12.0, 0.25, 12)
    for s in scales:
        f = _gaussian(s)
        sg = SpectralGrid.build(params, max(16.0, 40.0 / math.sqrt(s)), 0.5, 16)
        Hf = spherical_transform(params, f, sg)
        lam = sg.lambdas
        sym = np.zeros(lam.size, dtype=complex)
        pos = lam > 0
        sym[pos] = multiplier(params, sigma, tau, lam[pos]) * np.exp(1j * t * lam[pos])
        u = inverse_spherical_transform(params, SpectralFunction(sg, Hf.values * sym), rgrid, tol=1e-6, weights=rw)
        best = max(best, lq_norm(params, u, q) / lq_norm(params, f, qp))
    return best


@dataclass
class DecayProbeReport:
    """Upper and lower brackets of the dispersive norm along ``times``."""

    times: np.ndarray
    upper: np.ndarray
    lower: np.ndarray
    envelope: np.ndarray
    small_slope: float | None
    large_slope: float | None
    parts: dict = field(default_factory=dict)

    def rows(self) -> list:
        return [
            {"t": float(t), "upper_bound": float(u), "probe": float(p), "envelope": float(e)}
            for t, u, p, e in zip(self.times, self.upper, self.lower, self.envelope)
        ]

    def as_dict(self) -> dict:
        return {"small_time_slope": self.small_slope, "large_time_slope": self.large_slope, "rows": self.rows()}


def small_time_envelope(n: int, q: float, t):
    t = np.abs(np.asarray(t, dtype=float))
    if n == 2:
        return t ** -(0.5 - 1.0 / q) * (1.0 - np.log(t)) ** (1.0 - 2.0 / q)
    return t ** -((n - 1) * (0.5 - 1.0 / q))


def dispersive_decay_probe(
    params: SpaceParams, q: float, sigma=None, tau: float = 1.0, times=None, probe: bool = True, window: str = "auto"
) -> DecayProbeReport:
    """Bracket ``||D^{-tau} Dt^{tau-sigma} e^{itD}||_{q' -> q}`` over ``times``.

    Small times use the Kunze-Stein integral of the whole low-frequency
    kernel plus the interpolation bound. Large times split ``w_t^0`` at
    ``r = t/2`` and add the (rapidly decaying) interpolation bound.
    ``window`` is ``"small"``, ``"large"`` or ``"auto"`` (small for
    ``t <= 2``). Log-log slopes are fitted separately on each window.
    """
    n = params.n
    if not q > 2:
        raise ValidationError("q must exceed 2")
    sc = critical_sigma(n, q)
    sigma = sc if sigma is None else sigma
    if complex(sigma).real < sc - 1e-12:
        raise ValidationError(f"sigma must be at least (n+1)(1/2-1/q) = {sc:g}")
    if not 0.0 <= tau < 1.5:
        raise ValidationError("tau must lie in [0, 3/2)")
    times = np.asarray([0.05, 0.1, 0.2, 0.5, 1.0, 2.0] if times is None else times, dtype=float)
    if np.any(times <= 0):
        raise ValidationError("times must be positive")
    ks = KSExponents(q, q)
    if window == "auto":
        mask_s = times <= 2.0
    elif window in ("small", "large"):
        mask_s = np.full(times.size, window == "small")
    else:
        raise ValidationError(f"unknown window {window!r}")
    small, large = times[mask_s], times[~mask_s]
    parts = {"ks_inner": np.zeros(times.size), "ks_outer": np.zeros(times.size), "high": np.zeros(times.size)}
    if small.size:
        parts["ks_inner"][mask_s] = [ks_w0(params, sigma, tau, t, ks) for t in small]
        parts["high"][mask_s] = interpolation_bound(params, tau, q, small)
    if large.size:
        parts["ks_inner"][~mask_s] = [ks_w0(params, sigma, tau, t, ks, 0.0, t / 2) for t in large]
        parts["ks_outer"][~mask_s] = [ks_w0(params, sigma, tau, t, ks, t / 2, t + 40.0) for t in large]
        parts["high"][~mask_s] = interpolation_bound(params, tau, q, large, large_time=True)
    upper = parts["ks_inner"] + parts["ks_outer"] + parts["high"]
    lower = np.array([probe_ratio(params, q, sigma, tau, t) for t in times]) if probe else np.full(times.size, np.nan)
    envelope = np.where(mask_s, small_time_envelope(n, q, times), times ** (tau - 3.0))
    ss = fit_loglog_slope(small, upper[mask_s])[0] if small.size >= 2 else None
    ls = fit_loglog_slope(large, upper[~mask_s])[0] if large.size >= 2 else None
    return DecayProbeReport(times, upper, lower, envelope, ss, ls, parts)


@dataclass
class LowFrequencyReport:
    times: np.ndarray
    bounds: np.ndarray
    envelope: np.ndarray
    ratios: np.ndarray
    slope: float | None
    growth_tolerance: float = 1.25

    @property
    def passed(self) -> bool:
        # bounded: no growth over the final third of the time samples
        r = self.ratios
        if not np.all(np.isfinite(r)):
            return False
        tail = r[-max(2, r.size // 3):] if r.size > 1 else r
        return bool(np.max(tail) <= self.growth_tolerance * tail[0])

    def as_dict(self) -> dict:
        return {
            "slope": self.slope,
            "max_ratio": float(np.max(self.ratios)),
            "verdict": "PASS" if self.passed else "FAIL",
            "rows": [
                {"t": float(t), "bound": float(b), "envelope": float(e), "ratio": float(r)}
                for t, b, e, r in zip(self.times, self.bounds, self.envelope, self.ratios)
            ],
        }


def decoupled_low_freq_check(params: SpaceParams, sigma, tau: float, q: float, q_tilde: float, times, slope_from: float = 2.0) -> LowFrequencyReport:
    """Kunze-Stein bound of ``chi_0(D)``-localized kernels against ``(1+|t|)^{tau-3}``.

    The slope is fitted on ``|t| >= slope_from``.
    """
    if not (2 < q < math.inf and 2 < q_tilde < math.inf):
        raise ValidationError("q and q_tilde must lie in (2, inf)")
    if not 0.0 <= tau < 1.5:
        raise ValidationError("tau must lie in [0, 3/2)")
    ks = KSExponents(q, q_tilde)
    times = np.asarray(times, dtype=float)
    bounds = np.array([ks_w0(params, sigma, tau, t, ks) for t in times])
    env = (1.0 + np.abs(times)) ** (tau - 3.0)
    big = np.abs(times) >= slope_from
    slope = fit_loglog_slope(times[big], bounds[big])[0] if np.count_nonzero(big) >= 2 else None
    return LowFrequencyReport(times, bounds, env, bounds / env, slope)
