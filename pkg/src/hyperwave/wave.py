"""Spectral solver for the shifted wave equation with radial data.

``u_tt - (Delta + rho^2) u = F`` is diagonal in the spherical transform:
``u^(t, lam) = cos(t lam) f^ + sin(t lam)/lam g^ + Duhamel``. Everything
is done on one spectral grid and one radial grid, with the transform
matrices built once per solve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import cumulative_simpson

from .errors import DivergenceError, ValidationError
from .quadrature import simpson_weights
from .space import SpaceParams, SpectralGrid, phi_matrix
from .transforms import RadialFunction, adaptive_spectral_grid, constants, radial_grid, volume_weights


@dataclass(frozen=True)
class WaveState:
    """Cauchy data ``(u, u_t)`` at time ``t`` on a common radial grid."""

    u: RadialFunction
    ut: RadialFunction
    t: float = 0.0

    def __post_init__(self):
        if self.u.grid.shape != self.ut.grid.shape or np.any(self.u.grid != self.ut.grid):
            raise ValidationError("u and u_t must share the radial grid")


@dataclass
class EnergyReport:
    times: np.ndarray
    energies: np.ndarray
    max_rel_drift: float

    def as_dict(self) -> dict:
        return {"times": list(map(float, self.times)), "energies": list(map(float, self.energies)), "max_rel_drift": self.max_rel_drift}


def _sinc_t(t, lam):
    """``sin(t lam) / lam`` with the value ``t`` at ``lam = 0``."""
    t = np.asarray(t, dtype=float)
    return np.expand_dims(t, -1) * np.sinc(np.multiply.outer(t, lam) / math.pi)


class _Spectral:
    """Transform matrices between a radial grid and a spectral grid."""

    def __init__(self, params: SpaceParams, sgrid: SpectralGrid, rgrid: np.ndarray, rweights: np.ndarray):
        self.params = params
        self.grid = sgrid
        self.rgrid = rgrid
        self.rweights = rweights
        c = constants(params)
        self.Phi = phi_matrix(params, sgrid.lambdas, rgrid)  # (L, R)
        self.vol = rweights * np.sinh(rgrid) ** (params.n - 1)
        self.c_h, self.c_inv, self.c_p = c["C_H"], c["C_inv"], c["C_P"]
        self.inv_w = sgrid.weights * sgrid.plancherel

    def forward(self, values):
        """Rows of ``values`` (..., R) to spectral samples (..., L)."""
        return self.c_h * (np.asarray(values) * self.vol) @ self.Phi.T

    def inverse(self, spec):
        return self.c_inv * (np.asarray(spec) * self.inv_w) @ self.Phi

    def l2sq(self, spec, mult=1.0):
        return self.c_p * np.sum(self.inv_w * np.abs(mult * spec) ** 2, axis=-1)


def _solver_grids(params, funcs, t_span: float, rgrid=None, tol: float = 1e-12):
    base = funcs[0]
    if rgrid is None:
        need = base.grid[-1] + abs(t_span)
        if need > base.grid[-1] + 1e-12:
            rgrid, rw = radial_grid(need, 0.25, 12)
        else:
            rgrid, rw = base.grid, base.weights
    else:
        rgrid = np.asarray(rgrid, dtype=float)
        rw = RadialFunction(rgrid, np.zeros_like(rgrid)).weights

    def profile(g):
        Phi = phi_matrix(params, g.lambdas, base.grid)
        return sum(np.abs(Phi @ (volume_weights(params, h) * h.values)) for h in funcs)

    sgrid = adaptive_spectral_grid(params, profile, tol)
    return sgrid, rgrid, rw


# ---------------------------------------------------------------------------
# norms


def sobolev_norm(params: SpaceParams, f: RadialFunction, sigma: float, tau: float, tol: float = 1e-12) -> float:
    """``||(lam^2 + rho_tilde^2)^{sigma/2} lam^tau Hf||`` in the Plancherel L^2 sense.

    Parameters
    ----------
    sigma, tau : float
        Regularity exponents; ``tau < 3/2`` keeps the integral finite
        near ``lam = 0``, where the density vanishes like ``lam^2``.
    """
    if tau >= 1.5:
        raise ValidationError("tau must be below 3/2")
    if tau <= -1.5:
        raise DivergenceError("lam^tau is not square integrable against the Plancherel density")
    sp = _Spectral(params, *_solver_grids(params, [f], 0.0, tol=tol)[:1], f.grid, f.weights)
    return float(math.sqrt(sp.l2sq(sp.forward(f.values), _mult(params, sp.grid.lambdas, sigma, tau))))


def _mult(params, lam, sigma, tau):
    with np.errstate(divide="ignore"):
        m = (lam * lam + params.rho_tilde**2) ** (0.5 * sigma) * np.where(lam > 0, lam, 1.0) ** tau
    return np.where(lam > 0, m, 0.0 if tau > 0 else m)


def _energy_spec(sp: _Spectral, uh, uth):
    lam = sp.grid.lambdas
    return 0.5 * (sp.l2sq(uth) + sp.l2sq(uh, lam))


def energy(params: SpaceParams, state: WaveState, tol: float = 1e-12) -> float:
    """``E = 1/2 (||u_t||^2 + int lam^2 |u^|^2 dPlancherel)``."""
    sgrid = _solver_grids(params, [state.u, state.ut], 0.0, tol=tol)[0]
    sp = _Spectral(params, sgrid, state.u.grid, state.u.weights)
    return float(_energy_spec(sp, sp.forward(state.u.values), sp.forward(state.ut.values)))


def conserved_pair(params: SpaceParams, state: WaveState, sigma: float, tau: float, tol: float = 1e-12) -> float:
    """``||u_t||^2_{H^{sigma,tau}} + ||u||^2_{H^{sigma,tau+1}}``."""
    sgrid = _solver_grids(params, [state.u, state.ut], 0.0, tol=tol)[0]
    sp = _Spectral(params, sgrid, state.u.grid, state.u.weights)
    lam = sgrid.lambdas
    uh, uth = sp.forward(state.u.values), sp.forward(state.ut.values)
    return float(sp.l2sq(uth, _mult(params, lam, sigma, tau)) + sp.l2sq(uh, _mult(params, lam, sigma, tau + 1.0)))


# ---------------------------------------------------------------------------
# propagation


def _time_nodes(t: float, lam_max: float, ds_factor: float = 0.1) -> np.ndarray:
    """Odd number of equispaced nodes on ``[0, t]`` with ``|ds| <= 0.1/lam_max``."""
    m = max(2, int(math.ceil(abs(t) * lam_max / ds_factor)))
    m += m % 2
    return np.linspace(0.0, t, m + 1)


def _evolve(lam, fh, gh, ts, Fh=None, s_nodes=None):
    """Spectral solution and time derivative at each of ``ts``.

    ``Fh`` (S, L) are forcing transforms on ``s_nodes`` that start at 0
    and contain ``ts`` (cumulative Simpson is evaluated at every node).
    """
    ts = np.asarray(ts, dtype=float)
    C = np.cos(np.multiply.outer(ts, lam))
    Sl = _sinc_t(ts, lam)
    u = C * fh + Sl * gh
    ut = -lam * np.sin(np.multiply.outer(ts, lam)) * fh + C * gh
    if Fh is not None:
        cs = np.cos(np.multiply.outer(s_nodes, lam))
        ss = _sinc_t(s_nodes, lam)
        A = cumulative_simpson(cs * Fh, x=s_nodes, axis=0, initial=0.0)
        B = cumulative_simpson(ss * Fh, x=s_nodes, axis=0, initial=0.0)
        idx = np.searchsorted(s_nodes, ts) if s_nodes[-1] >= s_nodes[0] else np.searchsorted(-s_nodes, -ts)
        A, B = A[idx], B[idx]
        u = u + Sl * A - C * B
        ut = ut + C * A + lam * lam * Sl * B
    return u, ut


def propagate(
    params: SpaceParams,
    f: RadialFunction,
    g: RadialFunction,
    t: float,
    F: Callable | None = None,
    rgrid=None,
    tol: float = 1e-12,
) -> WaveState:
    """Solve ``u_tt - (Delta + rho^2) u = F`` from ``(f, g)`` at time 0 to ``t``.

    Parameters
    ----------
    F : callable, optional
        Forcing ``F(s, r) -> array`` sampled on the radial output grid.
    rgrid : array, optional
        Output nodes (must start at 0). Defaults to the data grid, extended
        by ``|t|`` so the outgoing wave stays on the grid.
    """
    if not np.array_equal(f.grid, g.grid):
        raise ValidationError("f and g must share the radial grid")
    if t == 0.0 and F is None and rgrid is None:
        return WaveState(f, g, 0.0)
    sgrid, rg, rw = _solver_grids(params, [f, g], t, rgrid, tol)
    sp_in = _Spectral(params, sgrid, f.grid, f.weights)
    fh, gh = sp_in.forward(f.values), sp_in.forward(g.values)
    sp = sp_in if rg is f.grid else _Spectral(params, sgrid, rg, rw)
    lam = sgrid.lambdas
    if F is None:
        uh, uth = _evolve(lam, fh, gh, [t])
    else:
        s = _time_nodes(t, lam[-1])
        Fh = sp.forward(np.array([F(si, rg) for si in s]))
        uh, uth = _evolve(lam, fh, gh, [t], Fh, s)
    u = RadialFunction(rg, sp.inverse(uh[0]), f.decay, rw)
    ut = RadialFunction(rg, sp.inverse(uth[0]), f.decay, rw)
    return WaveState(u, ut, float(t))


def energy_history(params: SpaceParams, f: RadialFunction, g: RadialFunction, times, sigma=None, tau=None) -> EnergyReport:
    """Energy (or the ``(sigma, tau)`` conserved pair) of the free flow.

    Every state is inverse transformed to the radial grid and transformed
    back, so the drift measures the full round trip, not just the exact
    spectral phase rotation.
    """
    times = np.asarray(times, dtype=float)
    span = float(np.max(np.abs(times)))
    sgrid, rg, rw = _solver_grids(params, [f, g], span)
    sp_in = _Spectral(params, sgrid, f.grid, f.weights)
    sp = _Spectral(params, sgrid, rg, rw)
    lam = sgrid.lambdas
    uh, uth = _evolve(lam, sp_in.forward(f.values), sp_in.forward(g.values), times)
    u, ut = sp.inverse(uh), sp.inverse(uth)
    uh2, uth2 = sp.forward(u), sp.forward(ut)
    if sigma is None:
        E = _energy_spec(sp, uh2, uth2)
    else:
        E = sp.l2sq(uth2, _mult(params, lam, sigma, tau)) + sp.l2sq(uh2, _mult(params, lam, sigma, tau + 1.0))
    E = np.asarray(E, dtype=float)
    drift = float(np.max(np.abs(E - E[0])) / E[0]) if E[0] > 0 else float(np.max(np.abs(E)))
    return EnergyReport(times, E, drift)


def dalembert_n3(f: Callable, t: float, r):
    """Free ``n = 3`` solution with ``g = 0`` from the 1D wave equation.

    ``v = sinh(r) u`` solves ``v_tt = v_rr``, so with ``V(s) = sinh(s) f(|s|)``
    ``u = (V(r+t) + V(r-t)) / (2 sinh r)``; ``r = 0`` uses the limit ``V'(t)``.
    """
    r = np.asarray(r, dtype=float)

    def V(s):
        return np.sinh(s) * f(np.abs(s))

    out = np.empty_like(r)
    pos = r > 0
    rp = r[pos]
    out[pos] = (V(rp + t) + V(rp - t)) / (2.0 * np.sinh(rp))
    h = 1e-5
    out[~pos] = (V(t + h) - V(t - h)) / (2 * h)
    return out


# ---------------------------------------------------------------------------
# semilinear problem


def power_nonlinearity(gamma: float) -> Callable:
    """Defocusing ``F(u) = -|u|^{gamma-1} u``."""
    return lambda u: -np.abs(u) ** (gamma - 1.0) * u


@dataclass
class PicardReport:
    times: np.ndarray
    rgrid: np.ndarray
    history: list
    differences: list
    energy_differences: list
    ratios: list
    converged: bool
    iterations: int
    residual: float
    norm_pair: tuple
    extra: dict = field(default_factory=dict)

    @property
    def solution(self) -> np.ndarray:
        return self.history[-1]

    def as_dict(self) -> dict:
        return {
            "converged": self.converged,
            "iterations": self.iterations,
            "differences": [float(d) for d in self.differences],
            "energy_differences": [float(d) for d in self.energy_differences],
            "ratios": [float(r) for r in self.ratios],
            "duhamel_residual": self.residual,
            "norm_pair": {"p": self.norm_pair[0], "q": self.norm_pair[1]},
            **self.extra,
        }


def _lp_lq(sp: _Spectral, U, p: float, q: float, s_weights) -> float:
    """Discrete ``L^p([0,T]; L^q)`` of space-time samples ``U`` (S, R)."""
    lq = np.sum(sp.vol * np.abs(U) ** q, axis=1) ** (1.0 / q)
    return float(np.sum(s_weights * lq**p) ** (1.0 / p))


def nlw_picard(
    params: SpaceParams,
    f: RadialFunction,
    g: RadialFunction,
    gamma: float,
    T: float,
    max_iters: int = 30,
    tol: float = 1e-10,
    nonlinearity: Callable | None = None,
    norm_pair: tuple | None = None,
    r_extra: float = 2.0,
) -> PicardReport:
    """Picard iteration ``u_{k+1} = u_free + Duhamel(F(u_k))`` on ``[0, T]``.

    Parameters
    ----------
    norm_pair : (p, q), optional
        Exponents of the space-time norm used for the successive
        differences; defaults to ``(inf, 2)``.

    Raises
    ------
    DivergenceError
        If the successive differences grow three times in a row.
    """
    if gamma <= 1:
        raise ValidationError("gamma must exceed 1")
    if T <= 0:
        raise ValidationError("T must be positive")
    F = nonlinearity or power_nonlinearity(gamma)
    p, q = norm_pair or (math.inf, 2.0)
    sgrid, rg, rw = _solver_grids(params, [f, g], T + r_extra)
    sp_in = _Spectral(params, sgrid, f.grid, f.weights)
    sp = _Spectral(params, sgrid, rg, rw)
    lam = sgrid.lambdas
    fh, gh = sp_in.forward(f.values), sp_in.forward(g.values)
    s = _time_nodes(T, lam[-1])
    sw = simpson_weights(s.size, s[1] - s[0])
    free_h, free_th = _evolve(lam, fh, gh, s)
    free = sp.inverse(free_h)

    def Phi(U):
        Fh = sp.forward(F(U))
        uh, uth = _evolve(lam, fh, gh, s, Fh, s)
        return sp.inverse(uh), uh, uth

    def spacetime(D):
        return _lp_lq(sp, D, p, q, sw) if math.isfinite(p) else float(np.max(np.sum(sp.vol * np.abs(D) ** q, axis=1) ** (1.0 / q)))

    U = np.zeros_like(free)
    Uh = np.zeros_like(free_h)
    Uth = np.zeros_like(free_th)
    history, diffs, ediffs, ratios = [U], [], [], []
    grow = 0
    converged = False
    scale = max(spacetime(free), 1e-300)
    for k in range(max_iters):
        Unew, uh, uth = Phi(U)
        d = spacetime(Unew - U)
        e = float(np.max(np.sqrt(_energy_spec(sp, uh - Uh, uth - Uth))))
        if diffs:
            ratios.append(d / diffs[-1] if diffs[-1] > 0 else 0.0)
            grow = grow + 1 if d > diffs[-1] else 0
        diffs.append(d)
        ediffs.append(e)
        U, Uh, Uth = Unew, uh, uth
        history.append(U)
        if grow >= 3:
            raise DivergenceError(f"Picard differences grew three times in a row (last {d:.3e})")
        if d <= tol * scale:
            converged = True
            break
    resid_map = Phi(U)[0]
    residual = spacetime(resid_map - U) / max(spacetime(U), 1e-300) if np.any(U) else spacetime(resid_map - U)
    return PicardReport(s, rg, history, diffs, ediffs, ratios, converged, len(diffs), float(residual), (p, q))
