"""Exact geometry of admissible couples and local well-posedness regions.

All region tests run in rational arithmetic. Thresholds with a square
root are kept as :class:`Surd` values and compared through squared
integer forms, so no boundary is decided in floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import ValidationError
from .space import SpaceParams

F = Fraction
HALF = F(1, 2)


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return F(x)
    if isinstance(x, str):
        return F(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValidationError("exponent must be finite")
        return F(x)
    raise ValidationError(f"cannot convert {x!r} to a rational")


def _dim(params) -> int:
    n = params.n if isinstance(params, SpaceParams) else int(params)
    if n < 2:
        raise ValidationError("dimension must be at least 2")
    return n


# ---------------------------------------------------------------------------
# quadratic surds


def _squarefree(m: int) -> tuple[int, int]:
    """``m = k^2 d`` with ``d`` squarefree; returns ``(k, d)``."""
    k, d = 1, m
    f = 2
    while f * f <= d:
        while d % (f * f) == 0:
            d //= f * f
            k *= f
        f += 1
    return k, d


@dataclass(frozen=True)
class Surd:
    """The real number ``a + b sqrt(d)`` with rational ``a, b`` and squarefree ``d``."""

    a: Fraction
    b: Fraction = F(0)
    d: int = 1

    @classmethod
    def make(cls, a, b, radicand: int) -> "Surd":
        """``a + b sqrt(radicand)`` with perfect squares folded into ``a``."""
        if radicand < 0:
            raise ValidationError("negative radicand")
        k, d = _squarefree(radicand)
        a, b = _frac(a), _frac(b) * k
        if d == 1:
            return cls(a + b, F(0), 1)
        if b == 0:
            return cls(a, F(0), 1)
        return cls(a, b, d)

    @property
    def rational(self) -> bool:
        return self.b == 0

    def __float__(self) -> float:
        return float(self.a) + float(self.b) * math.sqrt(self.d)

    def _coerce(self, other) -> "Surd":
        if isinstance(other, Surd):
            if other.b != 0 and self.b != 0 and other.d != self.d:
                raise ValidationError("cannot combine surds with different radicands")
            return other
        return Surd(_frac(other))

    def __sub__(self, other) -> "Surd":
        o = self._coerce(other)
        d = self.d if self.b != 0 else o.d
        return Surd.make(self.a - o.a, 0, 1) if self.b == o.b else Surd(self.a - o.a, self.b - o.b, d)

    def sign(self) -> int:
        """Exact sign of ``a + b sqrt(d)``."""
        sa = (self.a > 0) - (self.a < 0)
        sb = (self.b > 0) - (self.b < 0)
        if sb == 0 or sa == sb:
            return sa if sa != 0 else sb
        if sa == 0:
            return sb
        # opposite signs: compare a^2 with b^2 d
        lhs, rhs = self.a * self.a, self.b * self.b * self.d
        if lhs == rhs:
            return 0
        return sa if lhs > rhs else sb

    def _cmp(self, other) -> int:
        return (self - other).sign()

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __eq__(self, other):
        if isinstance(other, (Surd, Fraction, int)):
            return self._cmp(other) == 0
        return NotImplemented

    def __hash__(self):
        return hash((self.a, self.b, self.d))

    def __str__(self) -> str:
        if self.b == 0:
            return str(self.a)
        den = math.lcm(self.a.denominator, self.b.denominator)
        p, q = int(self.a * den), int(self.b * den)
        coef = "" if abs(q) == 1 else f"{abs(q)}*"
        sign = "+" if q > 0 else "-"
        body = f"{p}{sign}{coef}sqrt({self.d})" if p != 0 else f"{'-' if q < 0 else ''}{coef}sqrt({self.d})"
        return body if den == 1 else f"({body})/{den}"


def _cmp(x, y) -> int:
    """Exact three-way comparison of rationals and surds."""
    if isinstance(x, Surd):
        return x._cmp(y)
    if isinstance(y, Surd):
        return -y._cmp(x)
    return (x > y) - (x < y)


# ---------------------------------------------------------------------------
# admissibility


@dataclass(frozen=True)
class AdmissiblePair:
    inv_p: Fraction
    inv_q: Fraction

    def __post_init__(self):
        ip, iq = _frac(self.inv_p), _frac(self.inv_q)
        if not (0 <= ip <= 1 and 0 <= iq <= 1):
            raise ValidationError("1/p and 1/q must lie in [0, 1]")
        object.__setattr__(self, "inv_p", ip)
        object.__setattr__(self, "inv_q", iq)


def _admissible(n: int, ip: Fraction, iq: Fraction) -> bool:
    if not (0 < ip <= HALF and 0 < iq < HALF):
        return False
    if n == 2:
        return 2 * ip + iq > HALF
    return 2 * ip + (n - 1) * iq >= F(n - 1, 2)


def admissible(params, pair: AdmissiblePair) -> bool:
    """Membership of ``(1/p, 1/q)`` in the admissible region of dimension ``n``."""
    return _admissible(_dim(params), pair.inv_p, pair.inv_q)


# ---------------------------------------------------------------------------
# thresholds and curves


@dataclass(frozen=True)
class ExponentThresholds:
    n: int
    gamma1: Fraction | None
    gamma2: Fraction | None
    gamma_conf: Fraction
    gamma3: Surd
    gamma4: Fraction | None
    gamma_inf: Surd
    gamma_tilde_inf: Fraction | None

    def as_dict(self) -> dict:
        out = {}
        for k in ("gamma1", "gamma2", "gamma_conf", "gamma3", "gamma4", "gamma_inf", "gamma_tilde_inf"):
            v = getattr(self, k)
            if v is not None:
                out[k] = str(v)
                out[k + "_float"] = float(v)
        return out


def _gamma3(n: int) -> Surd:
    rad = n**4 + 2 * n**3 + 21 * n**2 - 12 * n + 4
    den = 2 * n * n - 2 * n
    return Surd.make(F(n * n + 5 * n - 2, den), F(1, den), rad)


@lru_cache(maxsize=None)
def _thresholds(n: int) -> ExponentThresholds:
    g3 = _gamma3(n)
    gconf = F(n + 3, n - 1)
    if n == 2:
        return ExponentThresholds(n, None, None, gconf, g3, None, g3, None)
    if n == 3:
        return ExponentThresholds(n, F(2), F(2), gconf, g3, None, g3, None)
    g4 = F(n * n + 2 * n - 5, n * n - 2 * n - 1)
    ginf = g3 if g3 <= g4 else Surd(g4)
    return ExponentThresholds(
        n, F(n + 3, n), F((n + 1) ** 2, (n - 1) ** 2 + 4), gconf, g3, g4, ginf, F(n * n + 2 * n - 7, (n + 1) * (n - 3))
    )


def thresholds(params) -> ExponentThresholds:
    """Closed-form exponent thresholds for dimension ``n``."""
    return _thresholds(_dim(params))


def curve_C1(n: int, gamma) -> Fraction:
    g = _frac(gamma)
    return F(n + 1, 4) * (1 - F(n + 5) / (2 * n * g - n - 1))


def curve_C2(n: int, gamma) -> Fraction:
    return F(n + 1, 4) - 1 / (_frac(gamma) - 1)


def curve_C3(n: int, gamma) -> Fraction:
    return F(n, 2) - 2 / (_frac(gamma) - 1)


def curve_C1_tilde(gamma) -> Fraction:
    """Dimension-two curve ``3/4 - 3/(2 gamma)``."""
    return F(3, 4) - F(3, 2) / _frac(gamma)


@dataclass(frozen=True)
class SigmaThreshold:
    value: Fraction | None
    strict: bool
    case: str
    outside: bool = False

    def admits(self, sigma) -> bool:
        if self.outside:
            return False
        s = _frac(sigma)
        return s > self.value if self.strict else s >= self.value

    def as_dict(self) -> dict:
        if self.outside:
            return {"outside": True}
        return {"value": str(self.value), "value_float": float(self.value), "strict": self.strict}


def sigma_min(params, gamma) -> SigmaThreshold:
    """Regularity threshold for local well-posedness at ``gamma``."""
    n = _dim(params)
    g = _frac(gamma)
    if g <= 1:
        raise ValidationError("gamma must exceed 1")
    th = thresholds(n)
    if _cmp(g, th.gamma_inf) >= 0:
        return SigmaThreshold(None, False, "none", True)
    if n == 2:
        if g <= 2:
            return SigmaThreshold(F(0), True, "n2-case")
        if g <= 3:
            return SigmaThreshold(curve_C1_tilde(g), True, "n2-case")
        if g < th.gamma_conf:
            return SigmaThreshold(curve_C2(n, g), False, "n2-case")
        return SigmaThreshold(curve_C3(n, g), True, "n2-case")
    if n == 3:
        if g <= 2:
            return SigmaThreshold(F(0), True, "n3-case")
        if g < th.gamma_conf:
            return SigmaThreshold(curve_C2(n, g), False, "n3-case")
        return SigmaThreshold(curve_C3(n, g), True, "n3-case")
    if g <= th.gamma1:
        return SigmaThreshold(F(0), True, "A")
    if g <= th.gamma2:
        return SigmaThreshold(curve_C1(n, g), False, "B")
    if g < th.gamma_conf:
        return SigmaThreshold(curve_C2(n, g), False, "C")
    return SigmaThreshold(curve_C3(n, g), True, "D")


# ---------------------------------------------------------------------------
# the exponent system


CONDITIONS = ("i", "ii", "iii", "iv", "v", "vi", "vii")


def _box(n: int, ip, iq) -> bool:
    """``(1/p, 1/q)`` in ``(0, 1/2] x [(n-3)/(2(n-1)), 1/2)`` with ``1/q > 0``."""
    return 0 < ip <= HALF and 0 < iq < HALF and iq >= F(n - 3, 2 * (n - 1))


def _triangle(n: int, ip, iq) -> bool:
    if n == 2:
        return 2 * ip + iq > HALF
    return 2 * ip + (n - 1) * iq >= F(n - 1, 2)


def condts_diagnostics(params, gamma, quad) -> dict:
    """Per-condition truth values of the exponent system for ``quad``.

    ``quad`` is ``(1/p, 1/q, 1/p~, 1/q~)``.
    """
    n = _dim(params)
    g = _frac(gamma)
    ip, iq, ipt, iqt = (_frac(x) for x in quad)
    iqt_dual = 1 - iqt
    return {
        "i": g * ip < 1 - ipt,
        "ii": 0 < iqt_dual <= g * iq < 1,
        "iii": F(n - 1, 2) - F(n + 1, 2) * (iq + iqt) <= n * (iqt_dual - g * iq),
        "iv": _triangle(n, ip, iq),
        "v": _triangle(n, ipt, iqt),
        "vi": _box(n, ip, iq),
        "vii": _box(n, ipt, iqt),
    }


def condts_feasible(params, gamma, quad) -> tuple[bool, dict]:
    """Exact check of the full exponent system; returns ``(ok, diagnostics)``."""
    diag = condts_diagnostics(params, gamma, quad)
    return all(diag.values()), diag


def coupling_ok(n: int, sigma, iq) -> bool:
    """Strichartz regularity ``sigma >= (n+1)/2 (1/2 - 1/q)``."""
    return _frac(sigma) >= F(n + 1, 2) * (HALF - _frac(iq))


# ---------------------------------------------------------------------------
# constructive witness (the case analysis of the proof)


@dataclass(frozen=True)
class _Window:
    lo: Fraction
    lo_open: bool
    hi: Fraction
    hi_open: bool

    def empty(self) -> bool:
        return self.lo > self.hi or (self.lo == self.hi and (self.lo_open or self.hi_open))

    def pick(self) -> Fraction:
        return self.lo if self.lo == self.hi else (self.lo + self.hi) / 2


def _window(lowers, uppers) -> _Window:
    """Intersect bounds given as ``(value, open)`` pairs."""
    lo, lo_open = max(lowers, key=lambda b: (b[0], b[1]))
    hi, hi_open = min(uppers, key=lambda b: (b[0], not b[1]))
    return _Window(lo, lo_open, hi, hi_open)


def _q_window(n: int, g: Fraction, sigma: Fraction) -> _Window:
    low = [(F(n - 3, 2 * (n - 1)), False), (F(0), True), (HALF - 2 * sigma / (n + 1), False)]
    if n >= 3:
        low.append((HALF - 2 / (g * (n - 1)), True))
    up = [
        (HALF, True),
        (1 / g, True),
        (2 / ((g - 1) * (n + 1)), False),
        (F(n + 5) / (2 * (2 * n * g - n - 1)), False),
    ]
    if n >= 3:
        up.append(((n + 7 - g * (n - 1)) / (2 * (g - 1) * (n + 1)), True))
    return _window(low, up)


def _toward(w: _Window, high: bool, k: int) -> Fraction:
    """Point of ``w`` at relative distance ``2^-k`` from one end (the end itself if closed)."""
    if w.lo == w.hi:
        return w.lo
    if high:
        return w.hi if not w.hi_open else w.hi - (w.hi - w.lo) / 2**k
    return w.lo if not w.lo_open else w.lo + (w.hi - w.lo) / 2**k


def _complete(n: int, g: Fraction, iq: Fraction):
    """Choose ``1/q~``, ``1/p``, ``1/p~`` from their windows given ``1/q``.

    A larger ``1/q~`` and smaller ``1/p``, ``1/p~`` only relax the other
    constraints, so each is pushed toward that end of its window; near
    the top of the gamma range the feasible set is thin there.
    """
    wq = _window(
        [(F(n - 3, 2 * (n - 1)), False), (F(0), True), (g / 2 + F(n - 5, 2 * (n - 1)) - g * iq, True), (1 - g * iq, False)],
        [(HALF, True), (F(n + 1, n - 1) - (2 * n * g - n - 1) * iq / (n - 1), False)],
    )
    if wq.empty():
        return None
    strict_tri = n == 2
    for k in range(1, 40):
        iqt = _toward(wq, True, k)
        wp = _window(
            [(F(n - 1, 2) * (HALF - iq), strict_tri), (F(0), True)],
            [(HALF, False), ((1 - F(n - 1, 2) * (HALF - iqt)) / g, True)],
        )
        if wp.empty():
            continue
        ip = _toward(wp, False, k)
        wpt = _window([(F(n - 1, 2) * (HALF - iqt), strict_tri), (F(0), True)], [(HALF, False), (1 - g * ip, True)])
        if not wpt.empty():
            return iqt, ip, _toward(wpt, False, k)
    return None


@dataclass(frozen=True)
class LWPVerdict:
    status: str  # "LWP" | "not-covered" | "outside-theorem-range"
    case_label: str
    witness: tuple | None
    sigma_threshold: SigmaThreshold

    def as_dict(self) -> dict:
        return {
            "status": self.status,
            "case": self.case_label,
            "witness": None if self.witness is None else {k: str(v) for k, v in zip(("1/p", "1/q", "1/p~", "1/q~"), self.witness)},
            "sigma_threshold": self.sigma_threshold.as_dict(),
        }

    @property
    def pq(self) -> tuple[float, float] | None:
        if self.witness is None:
            return None
        return 1.0 / float(self.witness[0]), 1.0 / float(self.witness[1])


def constructive_witness(params, gamma, sigma):
    """Witness quad from the case windows of the proof, or ``None``."""
    n = _dim(params)
    g, s = _frac(gamma), _frac(sigma)
    wq = _q_window(n, g, s)
    if wq.empty():
        return None
    # dyadic refinement across the window: the feasible band in 1/q can be
    # a thin slice of it near the top of the gamma range
    ts = [F(0), F(1)] + [F(i, 2**k) for k in range(1, 11) for i in range(1, 2**k, 2)]
    for t in sorted(ts, key=lambda t: (t != HALF, t.denominator > 2, t.denominator, abs(t - HALF))):
        if (t == 0 and wq.lo_open) or (t == 1 and wq.hi_open):
            continue
        iq = wq.lo + t * (wq.hi - wq.lo)
        rest = _complete(n, g, iq)
        if rest is None:
            continue
        quad = (rest[1], iq, rest[2], rest[0])
        if condts_feasible(n, g, quad)[0] and coupling_ok(n, s, iq):
            return quad
    return None


def classify(params, gamma, sigma) -> LWPVerdict:
    """Classify ``(n, gamma, sigma)`` for local well-posedness."""
    n = _dim(params)
    th = sigma_min(n, gamma)
    if th.outside:
        return LWPVerdict("outside-theorem-range", "none", None, th)
    if not th.admits(sigma):
        return LWPVerdict("not-covered", th.case, None, th)
    quad = constructive_witness(n, gamma, sigma)
    if quad is None:
        quad = bruteforce_witness(n, gamma, sigma, 120)
    if quad is None:
        raise ValidationError(f"no witness found for n={n}, gamma={gamma}, sigma={sigma} inside the LWP region")
    return LWPVerdict("LWP", th.case, quad, th)


# ---------------------------------------------------------------------------
# brute-force oracle


@lru_cache(maxsize=8)
def farey_half(D: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Reduced fractions in ``[0, 1/2]`` with denominator ``<= D``, sorted."""
    nums, dens = [], []
    for b in range(1, D + 1):
        for a in range(0, b // 2 + 1):
            if math.gcd(a, b) == 1:
                nums.append(a)
                dens.append(b)
    nums, dens = np.array(nums), np.array(dens)
    order = np.argsort(nums / dens, kind="stable")
    nums, dens = nums[order], dens[order]
    return nums, dens, nums / dens


_EPS = 1e-13


def bruteforce_witness(params, gamma, sigma, denom_bound: int = 60):
    """Exhaustive search for a witness quad with denominators ``<= denom_bound``.

    Every ``1/q`` on the rational grid is tried. Given ``1/q``, the
    remaining constraints are monotone: ``1/q~`` only has upper bounds that
    matter and a larger value relaxes the others, while ``1/p`` and
    ``1/p~`` only have lower bounds that matter. Taking the extreme grid
    value of each is therefore equivalent to enumerating all of them.
    Floats only preselect candidates (with a margin far below the grid
    spacing); every returned quad is verified exactly.
    """
    n = _dim(params)
    if denom_bound < 8:
        raise ValidationError("denom_bound must be at least 8")
    g, s = _frac(gamma), _frac(sigma)
    if g <= 1:
        raise ValidationError("gamma must exceed 1")
    nums, dens, vals = farey_half(denom_bound)
    gf, sf = float(g), float(s)
    lo_q = max(float(F(n - 3, 2 * (n - 1))), 0.5 - 2 * sf / (n + 1))
    mask = (vals > 0) & (vals < 0.5) & (vals >= lo_q - _EPS) & (gf * vals < 1 + _EPS)
    idx = np.nonzero(mask)[0]
    if idx.size == 0:
        return None
    iq = vals[idx]
    # largest 1/q~ below the upper bounds
    up_t = np.minimum(0.5 - 1e-12, (n + 1 - (2 * n * gf - n - 1) * iq) / (n - 1) + _EPS)
    kt = np.searchsorted(vals, up_t, side="right") - 1
    # smallest 1/p above its lower bound
    lo_p = np.maximum((n - 1) / 2 * (0.5 - iq), 0.0)
    kp = np.searchsorted(vals, lo_p - _EPS, side="left")
    ok = (kt >= 0) & (kp < vals.size)
    # permissive float screen of the coupled condition (i)
    iqt_f = vals[np.clip(kt, 0, None)]
    ip_f = vals[np.clip(kp, None, vals.size - 1)]
    lo_pt_f = np.maximum((n - 1) / 2 * (0.5 - iqt_f), 0.0)
    ipt_f = vals[np.clip(np.searchsorted(vals, lo_pt_f - _EPS, side="left"), None, vals.size - 1)]
    ok &= gf * ip_f + ipt_f < 1 + 1e-9
    ok &= 1 - iqt_f <= gf * iq + 1e-9
    for j in np.nonzero(ok)[0]:
        t = int(kt[j])
        iq_f = F(int(nums[idx[j]]), int(dens[idx[j]]))
        iqt = F(int(nums[t]), int(dens[t]))
        # strict upper bound 1/q~ < 1/2 and exact (iii)
        while t >= 0 and not (iqt < HALF and F(n - 1, 2) - F(n + 1, 2) * (iq_f + iqt) <= n * (1 - iqt - g * iq_f)):
            t -= 1
            iqt = F(int(nums[t]), int(dens[t])) if t >= 0 else None
        if iqt is None or iqt <= 0:
            continue
        ip = _smallest_above(nums, dens, int(kp[j]), F(n - 1, 2) * (HALF - iq_f), strict=(n == 2))
        lo_pt = F(n - 1, 2) * (HALF - iqt)
        kpt = int(np.searchsorted(vals, float(lo_pt) - _EPS, side="left"))
        ipt = _smallest_above(nums, dens, kpt, lo_pt, strict=(n == 2))
        if ip is None or ipt is None:
            continue
        quad = (ip, iq_f, ipt, iqt)
        if condts_feasible(n, g, quad)[0] and coupling_ok(n, s, iq_f):
            return quad
    return None


def _smallest_above(nums, dens, start: int, bound: Fraction, strict: bool):
    """Smallest positive grid fraction ``>= bound`` (``> bound`` if strict)."""
    k = max(0, start - 2)
    while k < nums.size:
        x = F(int(nums[k]), int(dens[k]))
        if x > 0 and (x > bound if strict else x >= bound):
            return x
        k += 1
    return None


# ---------------------------------------------------------------------------
# region sampling


def region_samples(params, gammas, sigmas) -> list:
    """``(gamma, sigma, status, case)`` rows over a grid."""
    rows = []
    for g in gammas:
        for s in sigmas:
            v = classify(params, g, s)
            rows.append({"gamma": float(g), "sigma": float(s), "status": v.status, "case": v.case_label})
    return rows


def boundary_distance(params, gamma, sigma) -> float:
    """Distance of ``(gamma, sigma)`` to the nearest region boundary.

    Uses the gamma thresholds and the vertical distance to the sigma curve.
    """
    n = _dim(params)
    th = thresholds(n)
    g = float(gamma)
    marks = [1.0, th.gamma_conf, th.gamma3, th.gamma_inf]
    marks += [m for m in (th.gamma1, th.gamma2) if m is not None]
    if n == 2:
        marks += [2.0, 3.0]
    d = min(abs(g - float(m)) for m in marks)
    sm = sigma_min(n, gamma)
    if not sm.outside:
        d = min(d, abs(float(sigma) - float(sm.value)))
    return d
