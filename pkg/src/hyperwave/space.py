"""Spherical analysis on real hyperbolic space H^n.

c-function, Plancherel density, spherical functions (by quadrature and by
the Harish-Chandra series) and the Gamma_k coefficient recurrence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import gammaln, loggamma

from .errors import NonConvergenceError, PoleError, ValidationError
from .quadrature import gauss_legendre, panel_grid, uniform_panels


@dataclass(frozen=True)
class SpaceParams:
    """Dimension ``n`` and shift parameter ``rho_tilde`` of H^n.

    ``rho_tilde`` defaults to ``rho + 1``.
    """

    n: int
    rho_tilde: float | None = None

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or isinstance(self.n, bool):
            raise ValidationError(f"dimension must be an integer, got {self.n!r}")
        if self.n < 2:
            raise ValidationError(f"dimension must be >= 2, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        rt = self.rho + 1.0 if self.rho_tilde is None else float(self.rho_tilde)
        if not np.isfinite(rt) or rt <= self.rho:
            raise ValidationError(f"rho_tilde must exceed rho={self.rho}, got {rt}")
        object.__setattr__(self, "rho_tilde", rt)

    @property
    def rho(self) -> float:
        return 0.5 * (self.n - 1)

    @property
    def odd(self) -> bool:
        return self.n % 2 == 1


# ---------------------------------------------------------------------------
# c-function and Plancherel density


def _c_const(params: SpaceParams) -> float:
    """Gamma(rho)/Gamma(2 rho)."""
    rho = params.rho
    return math.exp(gammaln(rho) - gammaln(2 * rho))


def c_inverse(params: SpaceParams, lam):
    """Reciprocal Harish-Chandra c-function.

    ``c(lam)^{-1} = Gamma(rho)/Gamma(2 rho) * Gamma(i lam + rho)/Gamma(i lam)``.
    Odd dimensions use the exact Pochhammer product; even dimensions use
    complex log-Gamma. Accepts scalars or arrays.
    """
    z = 1j * np.asarray(lam, dtype=complex)
    const = _c_const(params)
    if params.odd:
        out = np.ones_like(z)
        for j in range(int(params.rho)):
            out = out * (z + j)
        out = const * out
    else:
        rho = params.rho
        num = z + rho
        # poles of Gamma(i lam + rho): i lam + rho in {0, -1, -2, ...}
        if np.any(_near_nonpositive_integer(num)):
            raise PoleError("c_inverse has a pole at the requested lambda")
        zero = _near_nonpositive_integer(z)
        zs = np.where(zero, 1.0, z)
        out = const * np.exp(loggamma(zs + rho) - loggamma(zs))
        out = np.where(zero, 0.0, out)
    return out[()] if out.ndim == 0 else out


def _near_nonpositive_integer(z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    re = np.round(z.real)
    return (re <= 0) & (np.abs(z.imag) <= 1e-14) & (np.abs(z.real - re) <= 1e-14 * np.maximum(1.0, np.abs(re)))


def c_function(params: SpaceParams, lam):
    """Harish-Chandra c-function, ``1 / c_inverse``."""
    ci = c_inverse(params, lam)
    if np.any(ci == 0):
        raise PoleError("c-function has a pole at the requested lambda")
    return 1.0 / ci


def plancherel_density(params: SpaceParams, lam):
    """``|c(lam)|^{-2}`` for real ``lam >= 0`` (0 at the origin)."""
    lam = np.asarray(lam, dtype=float)
    if np.any(lam < 0):
        raise ValidationError("plancherel_density needs lambda >= 0")
    out = np.abs(c_inverse(params, lam)) ** 2
    out = np.where(lam == 0, 0.0, out)
    return out[()] if np.ndim(out) == 0 else out


def plancherel_envelope_constant(params: SpaceParams, lambdas) -> float:
    """Smallest C with density <= C lam^2 (1+lam)^(n-3) on the samples."""
    lam = np.asarray(lambdas, dtype=float)
    lam = lam[lam > 0]
    env = lam**2 * (1.0 + lam) ** (params.n - 3)
    return float(np.max(plancherel_density(params, lam) / env))


@dataclass(frozen=True)
class SpectralGrid:
    """Nonnegative spectral nodes with quadrature weights and density."""

    lambdas: np.ndarray
    weights: np.ndarray
    plancherel: np.ndarray

    def __post_init__(self):
        lam = np.asarray(self.lambdas, dtype=float)
        if lam.ndim != 1 or lam.size < 2:
            raise ValidationError("spectral grid needs at least two nodes")
        if lam[0] < 0 or np.any(np.diff(lam) <= 0):
            raise ValidationError("spectral nodes must be nonnegative and increasing")
        if np.any(np.asarray(self.plancherel) < 0):
            raise ValidationError("Plancherel values must be nonnegative")

    @classmethod
    def build(cls, params: SpaceParams, lam_max: float, width: float = 0.5, m: int = 12):
        """Composite Lobatto grid on ``[0, lam_max]``."""
        nodes, w = panel_grid(uniform_panels(0.0, lam_max, width), m)
        return cls(nodes, w, plancherel_density(params, nodes))

    @classmethod
    def from_nodes(cls, params: SpaceParams, nodes):
        from .quadrature import spline_weights

        nodes = np.asarray(nodes, dtype=float)
        return cls(nodes, spline_weights(nodes), plancherel_density(params, nodes))

    def __len__(self):
        return len(self.lambdas)


# ---------------------------------------------------------------------------
# spherical functions by quadrature


def _kappa(n: int) -> float:
    return math.exp(
        -0.5 * math.log(math.pi) + 0.5 * (n - 3) * math.log(2.0) + gammaln(n / 2) - gammaln((n - 1) / 2)
    )


def _logsinh(x):
    return x + np.log(-np.expm1(-2.0 * x)) - math.log(2.0)


def _theta_rule(params: SpaceParams, r: float, N: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes ``u`` in (0, r) and weights so that phi_lam(r) = sum w cos(lam u).

    Uses the finite-interval representation with ``u = r sin(theta)``,
    which turns the endpoint factor (cosh r - cosh u)^{(n-3)/2} into an
    analytic integrand on [0, pi/2] for every n.
    """
    n = params.n
    x, gw = gauss_legendre(N)
    th = 0.25 * math.pi * (x + 1.0)
    s, c = np.sin(th), np.cos(th)
    a = 0.5 * r * (1.0 + s)
    b = 0.5 * r * c * c / (1.0 + s)
    log_sinhc_b = _logsinh(b) - np.log(b)
    log_R = math.log(r) + _logsinh(a) + log_sinhc_b - np.log1p(s)
    logw = (
        math.log(_kappa(n))
        + (2 - n) * float(_logsinh(r))
        + math.log(2.0 * r)
        + 0.5 * (n - 3) * log_R
        + (n - 2) * np.log(c)
        + np.log(0.25 * math.pi * gw)
    )
    return r * s, np.exp(logw)


def _initial_nodes(r: float, lam_abs: float) -> int:
    return int(24 + 1.5 * lam_abs * r + 3.0 * r)


def _small_radius(params: SpaceParams, lam_abs: float, r: float) -> bool:
    # the r^4 terms of the Taylor expansion are below 1e-16 here
    return (lam_abs + params.rho + 1.0) * r < 1e-4


def _phi_taylor(params: SpaceParams, lam, r: float):
    """``1 - (lam^2 + rho^2) r^2 / (2n)`` near the origin."""
    return 1.0 - (np.asarray(lam) ** 2 + params.rho**2) * r * r / (2.0 * params.n)


def phi(params: SpaceParams, lam, r: float, tol: float = 1e-13, max_nodes: int = 1 << 15) -> complex:
    """Spherical function ``phi_lam(r)`` by adaptive Gauss-Legendre quadrature.

    For real ``lam`` the real value is returned as a complex number with zero
    imaginary part.
    """
    r = float(r)
    if r < 0:
        raise ValidationError("phi needs r >= 0")
    lam = complex(lam)
    if r == 0.0:
        return 1.0 + 0j
    real = lam.imag == 0.0
    if _small_radius(params, abs(lam), r):
        val = complex(_phi_taylor(params, lam, r))
        return complex(val.real, 0.0) if real else val
    N = _initial_nodes(r, abs(lam))
    prev = None
    while N <= max_nodes:
        u, w = _theta_rule(params, r, N)
        val = np.sum(w * np.cos(lam * u))
        scale = np.sum(w * np.cosh(abs(lam.imag) * u))
        if not (np.isfinite(val) and np.isfinite(scale)):
            raise NonConvergenceError(f"phi quadrature produced non-finite values (lambda={lam}, r={r})")
        if prev is not None and abs(val - prev) <= tol * scale:
            return complex(val.real, 0.0) if real else complex(val)
        prev = val
        N = int(N * 1.5) + 1
    raise NonConvergenceError(f"phi quadrature did not converge (lambda={lam}, r={r})")


def phi_matrix(params: SpaceParams, lambdas, rs, tol: float = 1e-13) -> np.ndarray:
    """``phi_lam(r)`` for real ``lambdas`` (rows) and ``rs`` (columns).

    Each column uses one quadrature rule, refined until the largest
    frequency converges.
    """
    lam = np.asarray(lambdas, dtype=float)
    rs = np.asarray(rs, dtype=float)
    if np.any(rs < 0):
        raise ValidationError("radii must be nonnegative")
    out = np.empty((lam.size, rs.size))
    # Harish-Chandra series where it converges fast and c(lam) is tame
    hi = np.abs(lam) >= _HC_LAMBDA
    quad_lam = lam[~hi]
    if np.any(hi):
        far = rs >= _HC_RADIUS
        if np.any(far):
            out[np.ix_(hi, far)] = _phi_hc_matrix(params, np.abs(lam[hi]), rs[far])
    for j, r in enumerate(rs):
        if r == 0.0:
            out[:, j] = 1.0
            continue
        sel = slice(None) if r < _HC_RADIUS else ~hi
        sub = lam if r < _HC_RADIUS else quad_lam
        if sub.size:
            out[sel, j] = _phi_column(params, sub, r, tol)
    return out


_HC_LAMBDA = 0.5
_HC_RADIUS = 1.0


def _phi_hc_matrix(params: SpaceParams, lam: np.ndarray, rs: np.ndarray) -> np.ndarray:
    """Real spherical functions from the series, lam > 0 and r >= 1."""
    K = int(math.ceil(19.0 / rs.min())) + 2
    g = gamma_table(params, lam, K)  # (K+1, L)
    q = np.exp(-2.0 * np.outer(rs, np.arange(K + 1)))  # (R, K+1)
    series = q @ g  # (R, L)
    c = 1.0 / c_inverse(params, lam)
    amp = np.exp(-params.rho * (math.log(2.0) + _logsinh(rs)))
    val = 2.0 * np.real(c[None, :] * np.exp(1j * np.outer(rs, lam)) * series) * amp[:, None]
    return val.T


def _phi_column(params: SpaceParams, lam: np.ndarray, r: float, tol: float) -> np.ndarray:
    lmax = float(np.max(np.abs(lam)))
    if _small_radius(params, lmax, r):
        return _phi_taylor(params, lam, r)
    probe = np.unique(np.array([0.0, lmax]))
    N = _initial_nodes(r, lmax)
    prev = None
    while True:
        u, w = _theta_rule(params, r, N)
        val = np.cos(np.outer(probe, u)) @ w
        if not np.all(np.isfinite(val)):
            raise NonConvergenceError(f"phi_matrix produced non-finite values at r={r}")
        if prev is not None and np.max(np.abs(val - prev)) <= tol * np.sum(w):
            break
        if N > (1 << 16):
            raise NonConvergenceError(f"phi_matrix did not converge at r={r}")
        prev = val
        N = int(N * 1.5) + 1
    return np.cos(np.outer(lam, u)) @ w


def phi0_envelope_constant(params: SpaceParams, rs) -> float:
    """Smallest C with phi_0(r) <= C (1+r) e^{-rho r} on the samples."""
    rs = np.asarray(rs, dtype=float)
    p0 = phi_matrix(params, [0.0], rs)[0]
    return float(np.max(p0 / ((1.0 + rs) * np.exp(-params.rho * rs))))


# ---------------------------------------------------------------------------
# Harish-Chandra expansion


@dataclass(frozen=True)
class GammaCoefficients:
    """Coefficients Gamma_0..Gamma_K of the Harish-Chandra series."""

    lam: complex
    values: np.ndarray
    fitted_nu: float = field(default=float("nan"))

    @property
    def K(self) -> int:
        return len(self.values) - 1


def gamma_table(params: SpaceParams, lambdas, K: int) -> np.ndarray:
    """Gamma_k(lam) for k = 0..K as an array of shape (K+1, len(lambdas)).

    Uses running sums so the recurrence costs O(K) per lambda.
    """
    if K < 0:
        raise ValidationError("K must be >= 0")
    lam = np.atleast_1d(np.asarray(lambdas, dtype=complex))
    k = np.arange(1, K + 1)
    den = k[:, None] - 1j * lam[None, :]
    if np.any(np.abs(den) == 0):
        raise PoleError("Gamma_k recurrence hits k - i lambda = 0")
    rho = params.rho
    coef = rho * (rho - 1.0)
    out = np.zeros((K + 1, lam.size), dtype=complex)
    out[0] = 1.0
    A = np.zeros(lam.size, dtype=complex)  # sum_{j<k} Gamma_j
    S = np.zeros(lam.size, dtype=complex)  # sum_{j<k} (k-j) Gamma_j
    for kk in range(1, K + 1):
        A = A + out[kk - 1]
        S = S + A
        out[kk] = coef * S / (kk * den[kk - 1])
    return out


def gamma_recurrence_residual(params: SpaceParams, values, lam) -> float:
    """Max abs residual of the recurrence using the direct (quadratic) sum."""
    g = np.asarray(values, dtype=complex)
    rho = params.rho
    res = abs(g[0] - 1.0)
    for k in range(1, len(g)):
        rhs = rho * (rho - 1) / (k * (k - 1j * lam)) * np.sum((k - np.arange(k)) * g[:k])
        res = max(res, abs(g[k] - rhs) / max(1.0, abs(g[k])))
    return float(res)


@lru_cache(maxsize=32)
def fit_gamma_bound(n: int, K: int = 100) -> tuple[float, float]:
    """Fitted ``(C, nu)`` with |Gamma_k(lam)|(1+|lam|) <= C k^nu.

    nu comes from a log-log least-squares fit of the worst case over
    lam in [1, 100]; C is then the smallest constant covering all samples.
    """
    params = SpaceParams(n)
    lam = np.linspace(1.0, 100.0, 400)
    tab = np.abs(gamma_table(params, lam, K))[1:] * (1.0 + lam)[None, :]
    k = np.arange(1, K + 1, dtype=float)
    worst = tab.max(axis=1)
    if np.all(worst == 0):
        return 0.0, 0.0
    nu = float(np.polyfit(np.log(k), np.log(worst), 1)[0])
    nu = max(nu, 0.0)
    C = float(np.max(worst / k**nu))
    return C, nu


def gamma_coeffs(params: SpaceParams, lam, K: int) -> GammaCoefficients:
    """Coefficient sequence Gamma_0..Gamma_K at ``lam``."""
    vals = gamma_table(params, [lam], K)[:, 0]
    _, nu = fit_gamma_bound(params.n)
    vals.setflags(write=False)
    return GammaCoefficients(complex(lam), vals, nu)


def _Phi(params: SpaceParams, lam, r, K: int):
    lam = np.asarray(lam, dtype=complex)
    g = gamma_table(params, np.atleast_1d(lam), K)
    q = np.exp(-2.0 * np.arange(K + 1) * r)
    series = q @ g
    pref = np.exp(-params.rho * (math.log(2.0) + _logsinh(r)) + 1j * np.atleast_1d(lam) * r)
    return pref * series


def phi_hc(params: SpaceParams, lam: float, r: float, K: int = 20) -> complex:
    """Spherical function from the truncated Harish-Chandra expansion."""
    if r <= 0:
        raise ValidationError("phi_hc needs r > 0")
    if lam == 0:
        raise PoleError("phi_hc is undefined at lambda = 0")
    lams = np.array([lam, -lam], dtype=complex)
    c = 1.0 / c_inverse(params, lams)
    Ph = _Phi(params, lams, r, K)
    return complex(c[0] * Ph[0] + c[1] * Ph[1])


def phi_hc_tail_bound(params: SpaceParams, lam: float, r: float, K: int) -> float:
    """Bound on the discarded terms k > K using the fitted Gamma_k envelope."""
    C, nu = fit_gamma_bound(params.n)
    k = np.arange(K + 1, K + 400, dtype=float)
    tail = C * np.sum(k**nu * np.exp(-2.0 * k * r)) / (1.0 + abs(lam))
    pref = 2.0 * abs(1.0 / c_inverse(params, lam)) * math.exp(-params.rho * (math.log(2.0) + float(_logsinh(r))))
    return float(pref * tail)
