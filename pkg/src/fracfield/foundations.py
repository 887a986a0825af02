"""Shared numerical foundations.

Holds the fractional order with its exact regime tagging, the double-well
potential, the kernel normalization constant, the interface scaling factors,
and the adaptive quadrature engine used by every other module.

All functions here are pure; the spec objects are frozen dataclasses and safe
to share across threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import DomainError, NonConvergence

__all__ = [
    "FracOrder",
    "PotentialSpec",
    "QuadratureSpec",
    "ScalePair",
    "gamma_ds",
    "scalings",
    "potential",
    "sigma_w",
    "integrate",
    "deterministic_map",
]


# ---------------------------------------------------------------------------
# fractional order with exact regime classification

_HALF = Fraction(1, 2)
_THREE_QUARTER = Fraction(3, 4)

REGIMES = ("sub", "half", "mid", "three_quarter", "super")


@dataclass(frozen=True)
class FracOrder:
    """Fractional exponent s in (0,1) and its scaling regime.

    The regime boundaries s = 1/2 and s = 3/4 are matched through exact
    rational arithmetic on the input (binary floats convert exactly), never
    through floating tolerance: the scaling laws are discontinuous there.
    """

    s: float
    exact: Fraction
    regime: str

    @staticmethod
    def of(value) -> "FracOrder":
        if isinstance(value, FracOrder):
            return value
        if isinstance(value, str):
            exact = Fraction(value)
        elif isinstance(value, Fraction):
            exact = value
        elif isinstance(value, (int, float, np.floating)):
            exact = Fraction(float(value))
        else:
            raise DomainError(f"cannot interpret fractional order {value!r}")
        if not (0 < exact < 1):
            raise DomainError(f"fractional order must lie in (0,1), got {exact}")
        if exact < _HALF:
            regime = "sub"
        elif exact == _HALF:
            regime = "half"
        elif exact < _THREE_QUARTER:
            regime = "mid"
        elif exact == _THREE_QUARTER:
            regime = "three_quarter"
        else:
            regime = "super"
        return FracOrder(float(exact), exact, regime)

    @property
    def is_half(self):
        return self.regime == "half"

    def __float__(self):
        return self.s


def _as_order(s) -> FracOrder:
    return FracOrder.of(s)


# ---------------------------------------------------------------------------
# kernel normalization constant

def gamma_ds(d: int, s) -> float:
    """Normalization constant of the d-dimensional fractional Laplacian.

    gamma_{d,s} = s 4^s pi^{-d/2} Gamma((d+2s)/2) / Gamma(1-s); with this
    factor the operator has Fourier symbol |xi|^{2s}.
    """
    if not isinstance(d, (int, np.integer)) or d < 1 or d > 3:
        raise DomainError(f"dimension must be an integer in [1,3], got {d}")
    sv = _as_order(s).s
    return sv * 2.0 ** (2 * sv) * math.pi ** (-d / 2.0) \
        * math.gamma((d + 2 * sv) / 2.0) / math.gamma(1.0 - sv)


# ---------------------------------------------------------------------------
# interface scaling factors

@dataclass(frozen=True)
class ScalePair:
    """Prefactors applied to the interaction energy and to its first variation."""

    alpha: float
    beta: float


def scalings(s, eps: float) -> ScalePair:
    """Scaling prefactors alpha_s(eps), beta_s(eps) for the two energies.

    alpha = eps^{2s-1} above s=1/2, 1/|log eps| at s=1/2, 1 below;
    beta  = eps^{4s-3} above s=3/4, 1/|log eps| at s=3/4, 1 below.
    """
    order = _as_order(s)
    if not (0.0 < eps < 1.0):
        raise DomainError(f"eps must lie in (0,1), got {eps}")
    if order.exact > _HALF:
        alpha = eps ** (2 * order.s - 1)
    elif order.exact == _HALF:
        alpha = 1.0 / abs(math.log(eps))
    else:
        alpha = 1.0
    if order.exact > _THREE_QUARTER:
        beta = eps ** (4 * order.s - 3)
    elif order.exact == _THREE_QUARTER:
        beta = 1.0 / abs(math.log(eps))
    else:
        beta = 1.0
    return ScalePair(alpha, beta)


# ---------------------------------------------------------------------------
# double-well potential

@dataclass(frozen=True)
class PotentialSpec:
    """Even double-well potential vanishing exactly at +-1.

    kind is 'quartic' for (1-u^2)^2 or 'poly' for a custom even polynomial
    (coefficients ascending in u). lam stores W''(+-1) > 0.
    """

    kind: str
    coeffs: tuple
    lam: float

    @staticmethod
    def quartic() -> "PotentialSpec":
        # (1-u^2)^2 = 1 - 2u^2 + u^4
        return PotentialSpec("quartic", (1.0, 0.0, -2.0, 0.0, 1.0), 8.0)

    @staticmethod
    def custom_polynomial(coeffs) -> "PotentialSpec":
        c = np.asarray(coeffs, dtype=float)
        if c.ndim != 1 or c.size < 3:
            raise DomainError("polynomial potential needs at least degree 2")
        odd = c[1::2]
        if np.any(np.abs(odd) > 1e-13 * max(1.0, np.max(np.abs(c)))):
            raise DomainError("potential must be even in u")
        w1 = np.polynomial.polynomial.polyval(1.0, c)
        d1 = np.polynomial.polynomial.polyval(1.0, np.polynomial.polynomial.polyder(c))
        lam = float(np.polynomial.polynomial.polyval(
            1.0, np.polynomial.polynomial.polyder(c, 2)))
        if abs(w1) > 1e-12 or abs(d1) > 1e-12:
            raise DomainError("potential must have a critical zero at u=1")
        if lam <= 0:
            raise DomainError("W''(1) must be positive")
        # nonnegativity with wells only at +-1, checked by evaluation
        u = np.linspace(-2.0, 2.0, 2001)
        w = np.polynomial.polynomial.polyval(u, c)
        if np.any(w < -1e-12):
            raise DomainError("potential must be nonnegative")
        away = np.abs(np.abs(u) - 1.0) > 1e-2
        if np.any(w[away] <= 1e-14):
            raise DomainError("potential must vanish only at u=+-1")
        return PotentialSpec("poly", tuple(float(x) for x in c), lam)


def potential(spec: PotentialSpec, u, order: int = 0):
    """Evaluate W, W', W'' or W''' at u (vectorized)."""
    if order not in (0, 1, 2, 3):
        raise DomainError(f"derivative order must be 0..3, got {order}")
    u = np.asarray(u, dtype=float)
    if spec.kind == "quartic":
        if order == 0:
            out = (1.0 - u * u) ** 2
        elif order == 1:
            out = 4.0 * u * (u * u - 1.0)
        elif order == 2:
            out = 12.0 * u * u - 4.0
        else:
            out = 24.0 * u
    else:
        c = np.polynomial.polynomial.polyder(np.asarray(spec.coeffs), order) \
            if order else np.asarray(spec.coeffs)
        out = np.polynomial.polynomial.polyval(u, c)
    return out if out.ndim else float(out)


def sigma_w(spec: PotentialSpec, qspec: "QuadratureSpec | None" = None) -> float:
    """Interface tension integral of sqrt(2 W) across the wells."""
    q = qspec or QuadratureSpec(rel_tol=1e-11, abs_tol=1e-13)
    val, _ = integrate(lambda t: np.sqrt(2.0 * potential(spec, t, 0)), -1.0, 1.0,
                       spec=q)
    return val


# ---------------------------------------------------------------------------
# adaptive quadrature engine
#
# Gauss-Kronrod 7-15 on panels, refined by bisection of the worst panels.
# Hinted algebraic/log singularities are removed by power substitutions so
# the transformed integrand is regular; semi-infinite domains are folded by
# t -> 1/t style maps. The engine is deterministic for a fixed spec.

@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and budgets for the adaptive engine.

    pv_cutoff is the inner radius below which paired second differences are
    replaced by their analytic small-offset model; tail_cutoff is the radius
    beyond which fields are integrated through their analytic far-field form.
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_subdivisions: int = 4000
    pv_cutoff: float = 1e-8
    tail_cutoff: float = 1e4

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise DomainError("tolerances must be positive")
        if self.pv_cutoff <= 0:
            raise DomainError("pv_cutoff must be positive")
        if self.tail_cutoff <= self.pv_cutoff:
            raise DomainError("tail_cutoff must exceed pv_cutoff")

    def coarse(self, factor: float = 3.0) -> "QuadratureSpec":
        return QuadratureSpec(self.rel_tol * factor, self.abs_tol * factor,
                              self.max_subdivisions, self.pv_cutoff,
                              self.tail_cutoff)


# 15-point Kronrod extension of 7-point Gauss (positive half mirrored below)
_XK = np.array([
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0,
    0.207784955007898, 0.405845151377397, 0.586087235467691,
    0.741531185599394, 0.864864423359769, 0.949107912342759,
    0.991455371120813,
])
_WK = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728,
    0.204432940075298, 0.190350578064785, 0.169004726639267,
    0.140653259715525, 0.104790010322250, 0.063092092629979,
    0.022935322010529,
])
_WG = np.array([
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469,
    0.381830050505119, 0.279705391489277, 0.129484966168870,
])


def _eval_panels(f, lo, hi):
    """GK15 value and error estimate on each panel [lo_i, hi_i]."""
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    x = mid[:, None] + half[:, None] * _XK[None, :]
    y = np.asarray(f(x.ravel()), dtype=float).reshape(x.shape)
    if not np.all(np.isfinite(y)):
        bad = x.ravel()[~np.isfinite(y.ravel())][:3]
        raise NonConvergence(f"integrand not finite near {bad}")
    i15 = half * (y @ _WK)
    i7 = half * (y[:, 1::2] @ _WG)
    raw = np.abs(i15 - i7)
    # QUADPACK sharpening: deep-smooth panels report below the raw GK
    # difference, which keeps many-panel sums from hitting a noise floor
    resabs = np.abs(half) * (np.abs(y) @ _WK) + 1e-300
    err = resabs * np.minimum(1.0, (200.0 * raw / resabs) ** 1.5)
    return i15, err


def _adaptive(f, edges, rel_tol, abs_tol, max_panels):
    """Adaptive bisection over initial panel edges; returns (value, err)."""
    lo = np.asarray(edges[:-1], dtype=float)
    hi = np.asarray(edges[1:], dtype=float)
    keep = hi > lo
    lo, hi = lo[keep], hi[keep]
    if lo.size == 0:
        return 0.0, 0.0
    val, err = _eval_panels(f, lo, hi)
    for _ in range(200):
        total = float(np.sum(val))
        err_tot = float(np.sum(err))
        target = max(abs_tol, rel_tol * abs(total))
        if err_tot <= target:
            return total, err_tot
        if lo.size >= max_panels:
            raise NonConvergence(
                f"panel budget {max_panels} exhausted (err {err_tot:.2e} > {target:.2e})",
                best=total, err_est=err_tot)
        # split every panel holding more than its share of the error budget
        thresh = max(target / (2.0 * lo.size), err_tot / (4.0 * lo.size))
        split = err > thresh
        if not np.any(split):
            split = err >= np.max(err)
        mid = 0.5 * (lo[split] + hi[split])
        too_thin = (mid <= lo[split]) | (mid >= hi[split])
        if np.all(too_thin):
            return total, err_tot
        nlo = np.concatenate([lo[~split], lo[split], mid])
        nhi = np.concatenate([hi[~split], mid, hi[split]])
        nval, nerr = _eval_panels(f, np.concatenate([lo[split], mid]),
                                  np.concatenate([mid, hi[split]]))
        kval = val[~split]
        kerr = err[~split]
        val = np.concatenate([kval, nval])
        err = np.concatenate([kerr, nerr])
        lo, hi = nlo, nhi
    raise NonConvergence("adaptive refinement did not settle",
                         best=float(np.sum(val)), err_est=float(np.sum(err)))


def _power_map(f, x0, side, width, exponent):
    """Regularize f ~ |x-x0|^{-exponent} via x = x0 +- u^m on (0, width)."""
    if exponent is None or exponent == "log":
        m = 6.0
    else:
        a = min(float(exponent), 0.95)
        m = max(2.0, 2.0 / (1.0 - a))
    sgn = 1.0 if side > 0 else -1.0

    def g(u):
        u = np.asarray(u)
        x = x0 + sgn * u ** m
        return f(x) * m * u ** (m - 1.0)

    return g, width ** (1.0 / m)


def _initial_edges(a, b, n=8):
    return np.linspace(a, b, n + 1)


def integrate(f, a, b, singularities=(), spec: QuadratureSpec | None = None,
              vectorized: bool = True, breakpoints=()):
    """Adaptive integral of f over (a, b); either end may be infinite.

    singularities: iterable of (location, exponent) pairs; exponent is the
    algebraic strength (|f| ~ |x-x0|^{-exponent}), 'log', or None when only
    the location is known. Hinted points are removed by power substitution;
    everything else is left to Gauss-Kronrod bisection. breakpoints are
    plain split locations (kinks, sharp features) without a transform.

    Returns (value, error_estimate); raises NonConvergence with the best
    estimate attached once the subdivision budget is spent.
    """
    q = spec or QuadratureSpec()
    if not vectorized:
        fs = f
        f = lambda x: np.array([fs(t) for t in np.atleast_1d(x)])
    a = float(a)
    b = float(b)
    if a == b:
        return 0.0, 0.0
    if a > b:
        v, e = integrate(f, b, a, singularities, q, True, breakpoints)
        return -v, e

    total = 0.0
    err_total = 0.0

    # fold infinite ends onto finite panels
    if math.isinf(a) and math.isinf(b):
        cut = 0.0
        for v, e in (integrate(f, a, cut, singularities, q, True, breakpoints),
                     integrate(f, cut, b, singularities, q, True, breakpoints)):
            total += v
            err_total += e
        return total, err_total
    if math.isinf(b):
        sing = [s for s in singularities if np.isfinite(s[0])]
        cut = max([a] + [s[0] for s in sing] + [p for p in breakpoints
                                                if np.isfinite(p)]) + 1.0
        v, e = integrate(f, a, cut, singularities, q, True, breakpoints)
        g = lambda t: f(cut - 1.0 + 1.0 / t) / t ** 2
        v2, e2 = _adaptive(g, np.geomspace(1e-14, 1.0, 40), q.rel_tol,
                           q.abs_tol, q.max_subdivisions)
        return v + v2, e + e2
    if math.isinf(a):
        g = lambda x: f(-np.asarray(x))
        sing = [(-s0, ex) for s0, ex in singularities]
        return integrate(g, -b, -a, sing, q, True,
                         [-p for p in breakpoints])

    # split at interior singular points, peel hinted endpoints
    pts = sorted({a, b} | {float(s0) for s0, _ in singularities if a < s0 < b
                           or s0 in (a, b)}
                 | {float(p) for p in breakpoints if a < p < b})
    hints = {float(s0): ex for s0, ex in singularities}
    for left, right in zip(pts[:-1], pts[1:]):
        width = right - left
        l_h = left in hints
        r_h = right in hints
        sub_lo, sub_hi = left, right
        if l_h:
            w = width / 2.0 if r_h else width
            g, u_hi = _power_map(f, left, +1, w, hints[left])
            v, e = _adaptive(g, _initial_edges(0.0, u_hi), q.rel_tol,
                             q.abs_tol, q.max_subdivisions)
            total += v
            err_total += e
            sub_lo = left + w
        if r_h:
            w = width / 2.0 if l_h else width
            g, u_hi = _power_map(f, right, -1, w, hints[right])
            v, e = _adaptive(g, _initial_edges(0.0, u_hi), q.rel_tol,
                             q.abs_tol, q.max_subdivisions)
            total += v
            err_total += e
            sub_hi = right - w
        if sub_hi > sub_lo:
            v, e = _adaptive(f, _initial_edges(sub_lo, sub_hi), q.rel_tol,
                             q.abs_tol, q.max_subdivisions)
            total += v
            err_total += e
    return total, err_total


def adaptive_over_edges(f, edges, spec: QuadratureSpec):
    """Adaptive GK over a prescribed panel skeleton (module-internal API)."""
    return _adaptive(f, np.asarray(edges, dtype=float), spec.rel_tol,
                     spec.abs_tol, spec.max_subdivisions)


def geometric_edges(lo, hi, ratio=2.0):
    """Geometric panel edges from lo to hi (both positive)."""
    n = max(2, int(math.ceil(math.log(hi / lo) / math.log(ratio))))
    return np.concatenate([[0.0] if lo == 0.0 else [], lo * (hi / lo) ** (np.arange(n + 1) / n)])


# ---------------------------------------------------------------------------
# deterministic parallel map

def deterministic_map(fn, items, workers: int | None = None):
    """Map fn over items with results in input order.

    Point evaluations inside sweeps are independent; collecting by index and
    reducing in order keeps every result bitwise independent of worker count.
    """
    items = list(items)
    if not workers or workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    out = [None] * len(items)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {pool.submit(fn, x): i for i, x in enumerate(items)}
        for fut, i in futures.items():
            out[i] = fut.result()
    return out
