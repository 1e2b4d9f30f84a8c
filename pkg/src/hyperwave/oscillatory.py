"""Fourier transforms of symbols, ``k(x) = int a(lam) e^{i lam x} dlam``.

The finite part is integrated with Filon-Legendre panels: the symbol is
interpolated on each panel by a Legendre series and the oscillatory factor
is integrated exactly via ``int_{-1}^1 P_k(s) e^{i w s} ds = 2 i^k j_k(w)``.
Panels are bisected until the series has converged, so the cost does not
grow with the frequency ``x``.

The unbounded part ``[L, inf)`` is handled in one of two ways. If the
symbol provides an analytic continuation (``tail``) the ray is rotated into
the complex plane, ``lam = L + i sgn(x) y``, and the exponentially damped
integral is computed with an exp-sinh rule. Otherwise two integrations by
parts are applied and ``L`` is doubled until the remainder bound is below
the tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from numpy.polynomial import legendre
from scipy.special import spherical_jn

from .errors import DivergenceError, NonConvergenceError, TailTruncationError, ValidationError
from .quadrature import gauss_legendre

SUPPORT_CLASSES = ("compact-homogeneous", "inhomogeneous-halfline", "inhomogeneous-full-line")


@dataclass(frozen=True)
class SymbolSpec:
    """A symbol ``a(lam)`` with its order and support class.

    Parameters
    ----------
    evaluate : callable
        Vectorized ``lam -> a(lam)`` on the real support.
    order : float
        Order ``d``: ``|a(lam)| <= C (1+|lam|)^d``.
    support : str
        ``compact-homogeneous`` (supported in ``[0, support_bound]``),
        ``inhomogeneous-halfline`` (``[0, inf)``) or
        ``inhomogeneous-full-line``.
    derivative_order_available : int
        Number of derivatives usable by the integration-by-parts tail.
    breakpoints : tuple
        Points where the symbol changes character (cutoff plateaus).
    tail : callable, optional
        Analytic continuation of ``a`` valid for ``|Re lam| >= tail_start``.
    """

    evaluate: Callable
    order: float
    support: str = "inhomogeneous-halfline"
    derivative_order_available: int = 2
    support_bound: float = 2.0
    breakpoints: tuple = ()
    tail: Callable | None = field(default=None, repr=False)
    tail_start: float = 2.0

    def __post_init__(self):
        if self.support not in SUPPORT_CLASSES:
            raise ValidationError(f"unknown support class {self.support!r}")
        if self.support == "compact-homogeneous" and self.support_bound <= 0:
            raise ValidationError("support_bound must be positive")
        if self.tail is not None and self.tail_start <= 0:
            raise ValidationError("tail_start must be positive")

    def check_order(self, lambdas=None) -> float:
        """Fitted ``C`` in ``|a| <= C (1+|lam|)^d`` on sample points."""
        if lambdas is None:
            top = self.support_bound if self.support == "compact-homogeneous" else 1e4
            lambdas = np.geomspace(1e-3, top, 400)
            if self.support == "inhomogeneous-full-line":
                lambdas = np.concatenate([-lambdas, lambdas])
        lam = np.asarray(lambdas, dtype=float)
        return float(np.max(np.abs(self.evaluate(lam)) / (1 + np.abs(lam)) ** self.order))


# ---------------------------------------------------------------------------
# Filon-Legendre panels

_M = 20


@lru_cache(maxsize=8)
def _legendre_matrix(M: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and the map from nodal values to Legendre coefficients."""
    x, w = gauss_legendre(M)
    V = legendre.legvander(x, M - 1)  # (M, M)
    T = (V * w[:, None]).T * ((2 * np.arange(M) + 1) / 2.0)[:, None]
    return x, T


@dataclass
class _Panels:
    mids: np.ndarray
    halfwidths: np.ndarray
    coefs: np.ndarray  # (P, M)

    def transform(self, xs: np.ndarray, chunk: int = 256) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        M = self.coefs.shape[1]
        k = np.arange(M)
        ik = (1j) ** k
        out = np.zeros(xs.shape, dtype=complex)
        flat = xs.ravel()
        res = np.zeros(flat.size, dtype=complex)
        for s in range(0, flat.size, chunk):
            x = flat[s : s + chunk]
            w = np.abs(self.halfwidths[None, :] * x[:, None])  # (X, P)
            sgn = np.sign(x)[:, None, None]
            J = spherical_jn(k[None, None, :], w[:, :, None])  # (X, P, M)
            # j_k is even/odd in its argument: fold the sign of x into i^k
            phase = np.where(k % 2 == 1, sgn, 1.0) * ik[None, None, :]
            S = np.sum(J * phase * self.coefs[None, :, :], axis=2)  # (X, P)
            res[s : s + chunk] = np.sum(
                2.0 * self.halfwidths[None, :] * np.exp(1j * self.mids[None, :] * x[:, None]) * S, axis=1
            )
        out[...] = res.reshape(xs.shape)
        return out


def _build_panels(func: Callable, breaks, tol: float, max_panels: int = 4000) -> _Panels:
    """Adaptive bisection until each Legendre series has converged."""
    s, T = _legendre_matrix(_M)
    total = breaks[-1] - breaks[0]
    stack = [(a, b) for a, b in zip(breaks[:-1], breaks[1:])][::-1]
    mids, hws, coefs = [], [], []
    count = 0
    while stack:
        a, b = stack.pop()
        count += 1
        if count > max_panels:
            raise NonConvergenceError("panel refinement stalled")
        m, h = 0.5 * (a + b), 0.5 * (b - a)
        vals = np.asarray(func(m + h * s), dtype=complex)
        if not np.all(np.isfinite(vals)):
            raise NonConvergenceError(f"symbol is not finite on [{a}, {b}]")
        c = T @ vals
        tail_err = 2.0 * h * (np.abs(c[-1]) + np.abs(c[-2]) + np.abs(c[-3]))
        vmax = np.max(np.abs(vals))
        # absolute budget plus a round-off floor relative to the panel size
        budget = tol * max(h / total, 1e-6) + 64 * np.finfo(float).eps * h * vmax
        small = 2.0 * h * vmax <= 1e-3 * tol
        if tail_err <= budget or small or h < 1e-14 * max(1.0, abs(m)):
            mids.append(m)
            hws.append(h)
            coefs.append(c)
        else:
            stack.append((m, b))
            stack.append((a, m))
    return _Panels(np.array(mids), np.array(hws), np.array(coefs))


# ---------------------------------------------------------------------------
# tails


@lru_cache(maxsize=4)
def _exp_sinh(h: float = 1.0 / 32, t0: float = -4.5, t1: float = 4.0):
    t = np.arange(t0, t1 + 0.5 * h, h)
    y = np.exp(0.5 * math.pi * np.sinh(t))
    w = h * 0.5 * math.pi * np.cosh(t) * y
    return y, w


def _contour_tail(tail: Callable, L: float, xs: np.ndarray, order: float) -> np.ndarray:
    """``int_L^inf a(lam) e^{i lam x} dlam`` by rotating the ray."""
    y, w = _exp_sinh()
    out = np.zeros(xs.shape, dtype=complex)
    for sgn in (1.0, -1.0):
        sel = np.sign(xs) == sgn
        if not np.any(sel):
            continue
        zeta = 1j * sgn
        with np.errstate(over="ignore", invalid="ignore"):
            a = np.asarray(tail(L + zeta * y), dtype=complex)
        x = np.abs(xs[sel])
        damp = np.exp(-np.outer(x, y))
        terms = np.where(damp > 0, damp * (w * a)[None, :], 0.0)
        out[sel] = zeta * np.exp(1j * L * xs[sel]) * terms.sum(axis=1)
    zero = xs == 0
    if np.any(zero):
        if order >= -1:
            raise DivergenceError("transform diverges at x = 0 for order >= -1")
        a = np.asarray(tail(L + y), dtype=complex)
        out[zero] = np.sum(w * a)
    return out


def _derivs(func: Callable, L: float) -> tuple[complex, complex, complex]:
    h = 1e-3 * L
    f = np.asarray(func(np.array([L - 2 * h, L - h, L, L + h, L + 2 * h])), dtype=complex)
    d1 = (f[0] - 8 * f[1] + 8 * f[3] - f[4]) / (12 * h)
    d2 = (-f[0] + 16 * f[1] - 30 * f[2] + 16 * f[3] - f[4]) / (12 * h * h)
    return f[2], d1, d2


def _ibp_tail(func: Callable, L: float, xs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Two integrations by parts; returns (value, remainder bound)."""
    a0, a1, _ = _derivs(func, L)
    ix = 1j * xs
    val = np.exp(1j * L * xs) * (-a0 / ix + a1 / ix**2)
    bound = np.abs(a1) / xs**2
    return val, bound


def _direct_tail(func: Callable, L: float, order: float) -> complex:
    """``int_L^inf a`` for integrable symbols via ``lam = L/u``."""
    if order >= -1:
        raise DivergenceError("transform diverges at x = 0 for order >= -1")
    x, w = gauss_legendre(200)
    u = 0.5 * (x + 1.0)
    return complex(0.5 * L * np.sum(w * np.asarray(func(L / u)) / u**2))


# ---------------------------------------------------------------------------
# public engine


def _halfline(func, order, breaks, tail, tail_start, xs, tol, bounded: float | None):
    if bounded is not None:
        br = sorted({0.0, bounded, *[b for b in breaks if 0.0 < b < bounded]})
        return _build_panels(func, br, tol).transform(xs)
    if tail is not None:
        L = tail_start
        br = sorted({0.0, L, *[b for b in breaks if 0.0 < b < L]})
        return _build_panels(func, br, tol).transform(xs) + _contour_tail(tail, L, xs, order)
    # integration by parts with doubling cut-off
    L = max([4.0, *breaks])
    nz = xs != 0
    while True:
        br = sorted({0.0, *[b for b in breaks if 0.0 < b < L]})
        br.extend(_geometric(br[-1], L))
        panels = _build_panels(func, sorted(set(br)), tol)
        out = panels.transform(xs)
        if np.any(nz):
            val, bound = _ibp_tail(func, L, xs[nz])
            out[nz] += val
            ok = np.all(bound <= tol)
        else:
            ok = True
        if ok:
            if np.any(~nz):
                out[~nz] += _direct_tail(func, L, order)
            return out
        L *= 4.0
        if L > 2.0**50:
            raise TailTruncationError("integration-by-parts remainder did not fall below tolerance")


def _geometric(a: float, b: float) -> list:
    pts = [a]
    while pts[-1] * 2 < b:
        pts.append(max(pts[-1] * 2, pts[-1] + 1.0))
    pts.append(b)
    return pts


def fourier_many(a: SymbolSpec, xs, tol: float = 1e-10) -> np.ndarray:
    """Vectorized :func:`oscillatory_fourier` over sample points ``xs``."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    if tol <= 0:
        raise ValidationError("tolerance must be positive")
    if a.support == "compact-homogeneous":
        return _halfline(a.evaluate, a.order, a.breakpoints, None, 0.0, xs, tol, a.support_bound)
    pos = _halfline(a.evaluate, a.order, a.breakpoints, a.tail, a.tail_start, xs, tol, None)
    if a.support == "inhomogeneous-halfline":
        return pos
    neg_eval = lambda lam: a.evaluate(-np.asarray(lam))  # noqa: E731
    neg_tail = None if a.tail is None else (lambda lam: a.tail(-np.asarray(lam)))
    neg = _halfline(neg_eval, a.order, tuple(-b for b in a.breakpoints if b < 0), neg_tail, a.tail_start, -xs, tol, None)
    return pos + neg


def oscillatory_fourier(a: SymbolSpec, x: float, tol: float = 1e-10) -> complex:
    """``k(x) = int a(lam) e^{i lam x} dlam`` over the symbol's support."""
    return complex(fourier_many(a, [x], tol)[0])


# ---------------------------------------------------------------------------
# decay diagnostics


@dataclass(frozen=True)
class DecayReport:
    xs: np.ndarray
    values: np.ndarray
    slope: float
    constant: float
    max_abs: float
    origin_sup: float | None = None
    log_coefficient: float | None = None

    def as_dict(self) -> dict:
        return {
            "slope": self.slope,
            "constant": self.constant,
            "max_abs": self.max_abs,
            "origin_sup": self.origin_sup,
            "log_coefficient": self.log_coefficient,
        }


def fit_loglog_slope(xs, ys) -> tuple[float, float]:
    """Least-squares slope and intercept of ``log|y|`` against ``log|x|``."""
    lx, ly = np.log(np.abs(xs)), np.log(np.abs(ys))
    slope, icpt = np.polyfit(lx, ly, 1)
    return float(slope), float(icpt)


def symbol_decay_check(
    a: SymbolSpec, xs, tol: float = 1e-12, m: int = 0, origin_xs=None, log_fit: bool = False
) -> DecayReport:
    """Fitted decay of ``|k(x)|`` on ``xs`` plus optional origin diagnostics.

    ``m`` selects the transform of ``(i lam)^m a(lam)`` (the m-th derivative
    of ``k``) for the boundedness check on ``origin_xs``. With ``log_fit``
    the origin samples are also fitted against ``log(1/|x|)``.
    """
    xs = np.asarray(xs, dtype=float)
    if np.max(np.abs(xs)) < 10 * np.min(np.abs(xs)):
        raise ValidationError("decay check needs xs spanning at least one decade")
    k = fourier_many(a, xs, tol)
    slope, _ = fit_loglog_slope(xs, k)
    const = float(np.max(np.abs(k) * np.abs(xs) ** (-slope)))
    origin_sup = None
    log_coef = None
    if origin_xs is not None:
        ox = np.asarray(origin_xs, dtype=float)
        b = a
        if m:
            b = _derivative_symbol(a, m)
        ko = fourier_many(b, ox, tol)
        origin_sup = float(np.max(np.abs(ko)))
        if log_fit:
            log_coef = float(np.polyfit(np.log(1.0 / np.abs(ox)), np.abs(ko), 1)[0])
    return DecayReport(xs, k, slope, const, float(np.max(np.abs(k))), origin_sup, log_coef)


def _derivative_symbol(a: SymbolSpec, m: int) -> SymbolSpec:
    f = a.evaluate
    tail = a.tail
    return SymbolSpec(
        evaluate=lambda lam: (1j * np.asarray(lam)) ** m * f(lam),
        order=a.order + m,
        support=a.support,
        derivative_order_available=a.derivative_order_available,
        support_bound=a.support_bound,
        breakpoints=a.breakpoints,
        tail=None if tail is None else (lambda lam: (1j * lam) ** m * tail(lam)),
        tail_start=a.tail_start,
    )
