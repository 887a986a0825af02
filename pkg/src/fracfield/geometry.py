"""Analytic set descriptors and the smoothed signed distance.

Three geometries are supported in closed form: half-spaces, balls/disks, and
unions of intervals on the line. Each provides exact signed distance
(positive inside), nearest-boundary projection with curvature, and the C^2
modification beta that equals the distance in a collar around the interface
and crosses over to a nonvanishing target outside it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (DomainError, InvalidEta, MedialSet, SignViolation,
                     UnsupportedGeometry)
from .foundations import FracOrder, gamma_ds

__all__ = [
    "HalfSpace", "Ball", "IntervalUnion", "EtaSpec",
    "signed_distance", "project_and_curvature", "beta_modified",
    "beta_with_derivatives", "ball_beta_radial", "eta_optimal", "validate_eta",
    "indicator_fraclap_closed", "tubular_radius", "delta0",
    "parse_set", "print_set",
]


# ---------------------------------------------------------------------------
# set descriptors

@dataclass(frozen=True)
class HalfSpace:
    """E = {x : normal . x > offset}; the normal points into E."""

    normal: tuple = (1.0,)
    offset: float = 0.0

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float)
        if abs(np.linalg.norm(n) - 1.0) > 1e-12:
            raise DomainError("half-space normal must have unit length")

    @property
    def dim(self):
        return len(self.normal)


@dataclass(frozen=True)
class Ball:
    """Open ball of radius R; dim 2 is the disk used throughout."""

    center: tuple
    radius: float
    dim: int = 2

    def __post_init__(self):
        if self.radius <= 0:
            raise DomainError("ball radius must be positive")
        if len(self.center) != self.dim:
            raise DomainError("center length must match dim")


@dataclass(frozen=True)
class IntervalUnion:
    """Disjoint open intervals on the line, sorted left to right."""

    intervals: tuple

    def __post_init__(self):
        iv = tuple((float(a), float(b)) for a, b in self.intervals)
        if not iv:
            raise DomainError("need at least one interval")
        for a, b in iv:
            if not b > a:
                raise DomainError(f"degenerate interval ({a},{b})")
        for (_, b0), (a1, _) in zip(iv[:-1], iv[1:]):
            if not a1 > b0:
                raise DomainError("intervals must be disjoint with positive gaps")
        object.__setattr__(self, "intervals", iv)

    @property
    def dim(self):
        return 1

    @property
    def endpoints(self):
        return np.array([e for ab in self.intervals for e in ab])


SetDescriptor = (HalfSpace, Ball, IntervalUnion)


def tubular_radius(E):
    """Distance from the boundary to the nearest medial point."""
    if isinstance(E, HalfSpace):
        return math.inf
    if isinstance(E, Ball):
        return E.radius
    lengths = [b - a for a, b in E.intervals]
    gaps = [a1 - b0 for (_, b0), (a1, _) in zip(E.intervals[:-1], E.intervals[1:])]
    return min(lengths + gaps) / 2.0


def delta0(E):
    """Largest collar half-width the modification machinery accepts."""
    if isinstance(E, HalfSpace):
        return math.inf
    if isinstance(E, Ball):
        return E.radius / 5.0
    lengths = [b - a for a, b in E.intervals]
    gaps = [a1 - b0 for (_, b0), (a1, _) in zip(E.intervals[:-1], E.intervals[1:])]
    return min(lengths + gaps) / 5.0


# ---------------------------------------------------------------------------
# signed distance and projection

def signed_distance(E, x):
    """Signed distance to the boundary: positive inside E, negative outside."""
    if isinstance(E, HalfSpace):
        x = np.asarray(x, dtype=float)
        n = np.asarray(E.normal)
        if E.dim == 1:
            return x * n[0] - E.offset
        return x @ n - E.offset
    if isinstance(E, Ball):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        d = E.radius - np.linalg.norm(x - np.asarray(E.center), axis=-1)
        return d if d.size > 1 else float(d[0])
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    ends = E.endpoints
    dist = np.min(np.abs(x[:, None] - ends[None, :]), axis=1)
    inside = np.zeros(x.shape, dtype=bool)
    for a, b in E.intervals:
        inside |= (x > a) & (x < b)
    d = np.where(inside, dist, -dist)
    return float(d[0]) if scalar else d


def _interval_distance_with_grad(E: IntervalUnion, x):
    """(d, d') for interval unions; d' = +-1 away from kinks."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    ends = E.endpoints
    k = np.argmin(np.abs(x[:, None] - ends[None, :]), axis=1)
    nearest = ends[k]
    inside = np.zeros(x.shape, dtype=bool)
    for a, b in E.intervals:
        inside |= (x > a) & (x < b)
    dist = np.abs(x - nearest)
    d = np.where(inside, dist, -dist)
    # moving away from the nearest endpoint increases |d|
    grad_abs = np.sign(x - nearest)
    grad_abs = np.where(grad_abs == 0, 1.0, grad_abs)
    dprime = np.where(inside, grad_abs, -grad_abs)
    return d, dprime


def project_and_curvature(E, x):
    """Nearest boundary point and summed principal curvature there.

    Curvature is oriented by the inner normal: (d-1)/R for the ball, zero for
    half-spaces and interval endpoints. Raises MedialSet where the nearest
    point is not unique.
    """
    if isinstance(E, HalfSpace):
        x = np.asarray(x, dtype=float)
        n = np.asarray(E.normal)
        d = float(x @ n - E.offset)
        return x - d * n, 0.0
    if isinstance(E, Ball):
        x = np.asarray(x, dtype=float)
        c = np.asarray(E.center)
        r = float(np.linalg.norm(x - c))
        if r < 1e-14:
            raise MedialSet("ball center has no unique projection")
        if r >= 2.0 * E.radius:
            raise DomainError("point outside the tubular neighbourhood")
        return c + E.radius * (x - c) / r, (E.dim - 1) / E.radius
    xf = float(np.asarray(x).reshape(()))
    ends = E.endpoints
    gaps = np.abs(xf - ends)
    order = np.argsort(gaps)
    if len(ends) > 1 and abs(gaps[order[0]] - gaps[order[1]]) < 1e-14 \
            and ends[order[0]] != ends[order[1]]:
        raise MedialSet(f"{xf} is equidistant from two endpoints")
    return float(ends[order[0]]), 0.0


# ---------------------------------------------------------------------------
# boundary modification

@dataclass(frozen=True)
class EtaSpec:
    """Far-field target for the modified distance.

    'constant' holds fixed levels c_plus (inside) and -c_minus (outside);
    'optimal' inverts the indicator Laplacian so the first-variation residual
    vanishes identically outside the collar. blend_width is the width of the
    C^2 crossover just outside the distance collar.
    """

    variant: str
    blend_width: float
    c_plus: float = math.nan
    c_minus: float = math.nan
    delta_prime: float = math.nan
    collar_bounds: tuple = (math.nan, math.nan)

    @staticmethod
    def constant(c_plus, c_minus=None, blend_width=0.05):
        c_minus = c_plus if c_minus is None else c_minus
        if c_plus <= 0 or c_minus <= 0:
            raise InvalidEta("constant targets must be positive on each side")
        return EtaSpec("constant", blend_width, c_plus=float(c_plus),
                       c_minus=float(c_minus))


def _smoothstep(t):
    """Quintic step with two vanishing derivatives at both ends."""
    s = t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
    s1 = 30.0 * t * t * (t - 1.0) ** 2
    s2 = 60.0 * t * (t - 1.0) * (2.0 * t - 1.0)
    return s, s1, s2


def indicator_fraclap_closed(E, s, x, order=0):
    """Closed-form (-Lap)^s of the +-1 indicator, with x-derivatives.

    Available for half-spaces (any dimension, value only along the normal)
    and interval unions (order up to 2). order=0 returns the value; higher
    orders are needed by the optimal boundary target.
    """
    sv = FracOrder.of(s).s
    g = gamma_ds(1, sv)

    if isinstance(E, HalfSpace):
        d = signed_distance(E, x)
        d = np.asarray(d, dtype=float)
        val = (g / sv) * np.sign(d) * np.abs(d) ** (-2 * sv)
        if order == 0:
            return val
        raise UnsupportedGeometry("derivatives only exposed for intervals")

    if not isinstance(E, IntervalUnion):
        raise UnsupportedGeometry("no closed form for this descriptor")

    x = np.atleast_1d(np.asarray(x, dtype=float))
    inside = np.zeros(x.shape, dtype=bool)
    for a, b in E.intervals:
        inside |= (x > a) & (x < b)

    # integral of |x-y|^{-1-2s} over an interval strictly to one side of x,
    # together with its first two x-derivatives
    def one_sided(lo, hi, xs):
        # hi may be +inf, lo may be -inf; xs strictly outside [lo, hi].
        # With near/far the endpoint distances and dir the direction from x
        # to the piece, d^k/dx^k of the integral is dir^k (prim_k(near) -
        # prim_k(far)).
        def prim(t, k):
            if k == 0:
                return t ** (-2 * sv) / (2 * sv)
            if k == 1:
                return t ** (-1 - 2 * sv)
            return (1 + 2 * sv) * t ** (-2 - 2 * sv)

        if np.isfinite(lo) and np.isfinite(hi):
            tl = np.abs(xs - lo)
            th = np.abs(xs - hi)
            near, far = np.minimum(tl, th), np.maximum(tl, th)
            dir_ = np.where(xs > hi, -1.0, 1.0)
        elif np.isfinite(lo):  # (lo, +inf), x < lo
            near, far, dir_ = lo - xs, np.inf, 1.0
        else:  # (-inf, hi), x > hi
            near, far, dir_ = xs - hi, np.inf, -1.0
        res = []
        for k in range(3):
            far_term = 0.0 if np.isscalar(far) and math.isinf(far) \
                else prim(far, k)
            res.append(dir_ ** k * (prim(near, k) - far_term))
        return res

    # complement intervals (for x inside E) and E intervals (for x outside)
    comp = []
    prev = -math.inf
    for a, b in E.intervals:
        comp.append((prev, a))
        prev = b
    comp.append((prev, math.inf))

    vals = np.zeros((3,) + x.shape)
    for lo, hi in comp:
        mask = inside & ~((x > lo) & (x < hi))
        if np.any(mask):
            contr = one_sided(lo, hi, x[mask])
            for k in range(3):
                vals[k][mask] += contr[k]
    for a, b in E.intervals:
        mask = ~inside
        if np.any(mask):
            contr = one_sided(a, b, x[mask])
            for k in range(3):
                vals[k][mask] -= contr[k]
    out = 2.0 * g * vals
    if order == 0:
        return out[0] if out[0].size > 1 else float(out[0][0])
    return out[: order + 1]


def eta_optimal(E, s, delta, delta_prime):
    """Boundary target cancelling the first-variation residual off the collar.

    The target is c_s ((-Lap)^s chi_E)^{-1/(2s)} with c_s = (gamma_{1,s}/s)^{1/(2s)},
    mirrored in sign outside E; with it the residual
    (-Lap)^s chi_E - (gamma_{1,s}/s) chi_E |eta|^{-2s} vanishes identically
    beyond distance delta + delta_prime.
    """
    sv = FracOrder.of(s).s
    d0 = delta0(E)
    if not (0 < delta < d0):
        raise DomainError(f"delta must lie in (0, {d0})")
    if not (0 < delta_prime <= d0 / 2):
        raise DomainError("delta_prime out of range")
    if isinstance(E, Ball):
        raise UnsupportedGeometry("optimal target needs a closed-form "
                                  "indicator Laplacian (half-space/intervals)")
    # sign check of the indicator Laplacian on collar samples
    if isinstance(E, IntervalUnion):
        probes = []
        for a, b in E.intervals:
            probes += [a + delta, b - delta, a - delta, b + delta]
        probes = np.asarray(probes)
        val = indicator_fraclap_closed(E, sv, probes)
        sgn = np.sign(signed_distance(E, probes))
        if np.any(np.sign(val) != sgn):
            raise SignViolation("indicator Laplacian sign differs from phase")
        collar = []
        for a, b in E.intervals:
            for t in np.linspace(delta, delta + delta_prime, 9):
                collar += [a + t, b - t, a - t, b + t]
        eta_mag = _eta_optimal_eval(E, sv, np.asarray(collar))[0]
        bounds = (float(np.min(np.abs(eta_mag))), float(np.max(np.abs(eta_mag))))
    else:
        bounds = (delta, delta + delta_prime)
    return EtaSpec("optimal", blend_width=delta_prime,
                   delta_prime=float(delta_prime), collar_bounds=bounds)


def _eta_optimal_eval(E, sv, x):
    """(eta, eta', eta'') for the optimal target, away from the boundary."""
    if isinstance(E, HalfSpace):
        d = np.asarray(signed_distance(E, x), dtype=float)
        return d, np.ones_like(d), np.zeros_like(d)
    g = gamma_ds(1, sv)
    c_s = (g / sv) ** (1.0 / (2 * sv))
    T, T1, T2 = indicator_fraclap_closed(E, sv, x, order=2)
    sgn = np.sign(T)
    phi = np.abs(T)
    p = -1.0 / (2 * sv)
    mag = c_s * phi ** p
    mag1 = c_s * p * phi ** (p - 1) * (sgn * T1)
    mag2 = c_s * (p * (p - 1) * phi ** (p - 2) * T1 ** 2
                  + p * phi ** (p - 1) * (sgn * T2))
    return sgn * mag, sgn * mag1, sgn * mag2


def _eta_eval(E, eta: EtaSpec, s, x, d):
    """(eta, eta', eta'') at points x with signed distances d."""
    if eta.variant == "constant":
        v = np.where(d >= 0, eta.c_plus, -eta.c_minus)
        z = np.zeros_like(v)
        return v, z, z
    if s is None:
        raise InvalidEta("optimal target needs the fractional order")
    return _eta_optimal_eval(E, FracOrder.of(s).s, x)


def beta_with_derivatives(E, eta: EtaSpec | None, delta, x, s=None):
    """Modified signed distance and its first two derivatives (1D sets).

    Equals the signed distance inside the collar |d| <= delta, the target eta
    beyond |d| >= delta + blend_width, and a quintic-Hermite crossover in
    between. The crossover has second-order contact at both seams, so beta is
    C^2 wherever d and eta are.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if isinstance(E, HalfSpace):
        if len(E.normal) != 1:
            raise UnsupportedGeometry("derivative form is one-dimensional")
        d = x * E.normal[0] - E.offset
        dprime = np.full_like(d, E.normal[0])
    elif isinstance(E, IntervalUnion):
        d, dprime = _interval_distance_with_grad(E, x)
    else:
        raise UnsupportedGeometry("use ball_beta_radial for the disk")
    if eta is None:
        return d, dprime, np.zeros_like(d)
    if not (0 < delta <= delta0(E)):
        raise DomainError(f"delta must lie in (0, {delta0(E)}]")
    bw = eta.blend_width
    ev, ev1, ev2 = _eta_eval(E, eta, s, x, d)
    if np.any(np.abs(ev) <= 0):
        raise InvalidEta("eta must be bounded away from zero")
    t = np.clip((np.abs(d) - delta) / bw, 0.0, 1.0)
    S, S1, S2 = _smoothstep(t)
    tp = np.where((np.abs(d) > delta) & (np.abs(d) < delta + bw),
                  np.sign(d) * dprime / bw, 0.0)
    beta = d + S * (ev - d)
    beta1 = dprime + S1 * tp * (ev - d) + S * (ev1 - dprime)
    beta2 = S2 * tp * tp * (ev - d) + 2.0 * S1 * tp * (ev1 - dprime) + S * ev2
    return beta, beta1, beta2


def beta_modified(E, eta: EtaSpec | None, delta, x, s=None):
    """Modified signed distance value at x (see beta_with_derivatives)."""
    if isinstance(E, Ball):
        rho = np.linalg.norm(np.atleast_2d(np.asarray(x, dtype=float))
                             - np.asarray(E.center), axis=-1)
        b = ball_beta_radial(E, eta, delta, rho)[0]
        return b if b.size > 1 else float(b[0])
    b = beta_with_derivatives(E, eta, delta, x, s=s)[0]
    return b if b.size > 1 else float(b[0])


def ball_beta_radial(E: Ball, eta: EtaSpec | None, delta, rho):
    """(beta, d beta/d rho, d2 beta/d rho2) for the ball as a radial profile."""
    rho = np.atleast_1d(np.asarray(rho, dtype=float))
    d = E.radius - rho
    if eta is None:
        return d, -np.ones_like(d), np.zeros_like(d)
    if eta.variant != "constant":
        raise UnsupportedGeometry("disk modification supports constant targets")
    if not (0 < delta <= delta0(E)):
        raise DomainError(f"delta must lie in (0, {delta0(E)}]")
    bw = eta.blend_width
    if delta + bw >= E.radius:
        raise InvalidEta("collar plus blend must not reach the center")
    ev = np.where(d >= 0, eta.c_plus, -eta.c_minus)
    t = np.clip((np.abs(d) - delta) / bw, 0.0, 1.0)
    S, S1, S2 = _smoothstep(t)
    interior = (np.abs(d) > delta) & (np.abs(d) < delta + bw)
    tp = np.where(interior, -np.sign(d) / bw, 0.0)  # d t / d rho
    beta = d + S * (ev - d)
    beta1 = -1.0 + S1 * tp * (ev - d) + S
    beta2 = S2 * tp * tp * (ev - d) + 2.0 * S1 * tp
    return beta, beta1, beta2


def validate_eta(E, eta: EtaSpec, delta, s=None, samples=400):
    """Admissibility checks: sign, lower bound, monotone C^2 crossover.

    Raises InvalidEta on failure; returns the minimal |eta| over the samples.
    """
    if isinstance(E, Ball):
        rho = np.linspace(1e-3, E.radius + 5 * (delta + eta.blend_width), samples)
        beta, b1, _ = ball_beta_radial(E, eta, delta, rho)
        d = E.radius - rho
        if np.any(np.sign(beta[np.absolute(d) > 1e-12]) != np.sign(d[np.absolute(d) > 1e-12])):
            raise InvalidEta("modified distance changes sign off the boundary")
        if np.any(b1 > 1e-10):
            raise InvalidEta("radial modified distance must be nonincreasing")
        far = np.abs(d) >= delta + eta.blend_width
        low = np.min(np.abs(beta[far])) if np.any(far) else math.nan
        return float(low)
    span = 5.0 * (delta + eta.blend_width)
    pts = []
    for e in (E.endpoints if isinstance(E, IntervalUnion)
              else np.array([E.offset / E.normal[0]])):
        pts.append(np.linspace(e - span, e + span, samples))
    x = np.unique(np.concatenate(pts))
    d = signed_distance(E, x)
    keep = np.abs(d) > 1e-9
    x, d = x[keep], np.asarray(d)[keep]
    if isinstance(E, IntervalUnion):
        _, dprime = _interval_distance_with_grad(E, x)
    else:
        dprime = np.full_like(x, E.normal[0])
    beta, b1, _ = beta_with_derivatives(E, eta, delta, x, s=s)
    if np.any(np.sign(beta) != np.sign(d)):
        raise InvalidEta("modified distance changes sign off the boundary")
    # monotone in the signed distance across the crossover
    slope = b1 * dprime
    if np.any(slope[np.abs(d) < delta + eta.blend_width] < -1e-10):
        raise InvalidEta("crossover is not monotone in the distance")
    far = np.abs(d) >= delta + eta.blend_width
    if np.any(far) and np.min(np.abs(beta[far])) <= 0:
        raise InvalidEta("eta must be bounded away from zero")
    return float(np.min(np.abs(beta[far]))) if np.any(far) else math.nan


# ---------------------------------------------------------------------------
# textual form

def parse_set(text: str):
    """Parse the one-line textual form, e.g. 'ball 0 0 1' or 'interval 0 1'."""
    parts = text.split()
    if not parts:
        raise DomainError("empty set description")
    kind = parts[0].lower()
    args = [float(p) for p in parts[1:]]
    if kind == "halfspace":
        if not args:
            return HalfSpace((1.0,), 0.0)
        *n, b = args
        n = n or [1.0]
        return HalfSpace(tuple(n), b)
    if kind == "ball":
        *c, r = args
        return Ball(tuple(c), r, dim=len(c))
    if kind == "interval":
        if len(args) % 2:
            raise DomainError("interval list needs an even number of endpoints")
        return IntervalUnion(tuple(zip(args[::2], args[1::2])))
    raise DomainError(f"unknown set kind {kind!r}")


def print_set(E) -> str:
    if isinstance(E, HalfSpace):
        return "halfspace " + " ".join(f"{v:g}" for v in (*E.normal, E.offset))
    if isinstance(E, Ball):
        return "ball " + " ".join(f"{v:g}" for v in (*E.center, E.radius))
    return "interval " + " ".join(f"{v:g}" for ab in E.intervals for v in ab)
