"""Interface expansion terms, exact identities, and sweep extrapolation.

The curvature term of the boundary expansion, the remainder it leaves, the
integration-by-parts identity behind it, the logarithmic moment integrals,
the double-limit quantity that kills the curvature contribution below
s = 3/4, the potential-limit ratio, and the epsilon-sweep fitting utilities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, PoorFit
from .foundations import FracOrder, QuadratureSpec, gamma_ds, integrate
from .fraclap import FieldSpec, fraclap_1d, fraclap_phasefield_2d, profile_field
from .geometry import project_and_curvature
from .profile import Profile, eval_profile

__all__ = [
    "ExpansionWindow", "SweepResult", "curvature_kernel_term",
    "fermi_remainder", "formula_eta_identity", "log_expansion_integral",
    "willmore_limit_quantity", "potential_limit_ratio",
    "claim5_double_integral", "extrapolate", "profile_kernel_integral",
]


@dataclass(frozen=True)
class ExpansionWindow:
    """Geometric window of the boundary expansion.

    The kernel is integrated over offsets up to ell = delta/Lambda, and
    evaluation points are restricted to distances below delta/(10 Lambda).
    """

    Lambda: float
    delta: float
    Lambda0: float = 10.0

    def __post_init__(self):
        if self.Lambda < self.Lambda0:
            raise DomainError("Lambda below the geometric floor")
        if self.delta <= 0:
            raise DomainError("delta must be positive")

    @property
    def ell(self):
        return self.delta / self.Lambda

    @property
    def point_band(self):
        return self.delta / (10.0 * self.Lambda)


@dataclass(frozen=True)
class SweepResult:
    """Fitted limit of an epsilon-sweep.

    pairs holds (eps, value) with strictly decreasing eps; extrapolated is
    the fitted limit L, rate the fitted exponent p in L + C eps^p (nan for
    the log model), residual the relative rms misfit.
    """

    pairs: tuple
    extrapolated: float
    rate: float
    residual: float
    model: str


# ---------------------------------------------------------------------------
# profile kernel integrals in the rescaled variable

def profile_kernel_integral(p: Profile, kernel: str, z0: float, hw: float,
                            eps: float, power: float = 0.0,
                            spec: QuadratureSpec | None = None) -> float:
    """integral_{-hw}^{hw} w_eps'(z0 + zbar) k(zbar) dzbar.

    kernel: 'power' for |zbar|^{-power}, 'log' for log|zbar|, 'abslog' for
    |log|zbar|| (which requires hw <= 1). Evaluated in the rescaled variable
    tau = (z0 + zbar)/eps, where the profile derivative is order one and the
    kernel singularity sits at z0/eps; this stays conditioned for eps
    arbitrarily small.
    """
    q = spec or QuadratureSpec(rel_tol=1e-9, abs_tol=1e-12)
    t_lo = (z0 - hw) / eps
    t_hi = (z0 + hw) / eps
    t0 = z0 / eps
    bks = [t0 - 30.0, t0 - 1.0, t0 + 1.0, t0 + 30.0, -30.0, -1.0, 1.0, 30.0]
    bks = [b for b in bks if t_lo < b < t_hi]

    # clamping keeps transformed integrands finite when the substitution
    # lands exactly on the singular point (where their true limit is zero)
    if kernel == "power":
        def f(t):
            gap = np.maximum(np.abs(eps * t - z0), 1e-280)
            return eval_profile(p, t, 1) * gap ** (-power)
        sing = [(t0, power)] if t_lo < t0 < t_hi else []
        val, _ = integrate(f, t_lo, t_hi, singularities=sing, spec=q,
                           breakpoints=bks)
        return val
    if kernel in ("log", "abslog"):
        if kernel == "abslog" and hw > 1.0:
            raise DomainError("|log| kernel implemented for half-width <= 1")
        sign = -1.0 if kernel == "abslog" else 1.0
        # log|eps tau - z0| = log(eps) + log|tau - t0|
        jump = eval_profile(p, t_hi, 0) - eval_profile(p, t_lo, 0)

        def f(t):
            gap = np.maximum(np.abs(t - t0), 1e-280)
            return eval_profile(p, t, 1) * np.log(gap)
        sing = [(t0, "log")] if t_lo < t0 < t_hi else []
        val, _ = integrate(f, t_lo, t_hi, singularities=sing, spec=q,
                           breakpoints=bks)
        return sign * (math.log(eps) * jump + val)
    raise DomainError(f"unknown kernel {kernel!r}")


def curvature_kernel_term(s, p: Profile, eps: float, z0: float,
                          window: ExpansionWindow, H: float,
                          spec: QuadratureSpec | None = None) -> float:
    """Curvature contribution of the boundary expansion at distance z0.

    Above s=1/2: (gamma_{1,s}/2) H/(2s-1) integral of w_eps'/|zbar|^{2s-1}
    over (-ell, ell); at s=1/2 the signed-log variant with a minus sign;
    identically zero below s=1/2 where the term is lower order than the
    remainder.
    """
    order = FracOrder.of(s)
    if abs(z0) > window.ell / 10.0 + 1e-15:
        raise DomainError("z0 outside the expansion band")
    if H == 0.0 or order.regime == "sub":
        return 0.0
    g1 = gamma_ds(1, order.s)
    ell = window.ell
    if order.is_half:
        val = profile_kernel_integral(p, "log", z0, ell, eps, spec=spec)
        return -0.5 * g1 * H * val
    val = profile_kernel_integral(p, "power", z0, ell, eps,
                                  power=2 * order.s - 1, spec=spec)
    return 0.5 * g1 * H / (2 * order.s - 1) * val


def fermi_remainder(s, f: FieldSpec, x0, window: ExpansionWindow,
                    spec: QuadratureSpec | None = None):
    """Remainder of the boundary expansion at a point near the circle.

    R = (-Lap)^s u(x0) - (-d_zz)^s w_eps(z0) - curvature term, where z0 is
    the signed distance of x0 and the one-dimensional term is evaluated by
    independent paired quadrature on the rescaled profile.
    """
    order = FracOrder.of(s)
    x0 = np.asarray(x0, dtype=float)
    from .geometry import signed_distance
    z0 = float(signed_distance(f.geometry, x0))
    if abs(z0) > window.point_band + 1e-15:
        raise DomainError("x0 outside the expansion band")
    _, H = project_and_curvature(f.geometry, x0)
    full, err2d = fraclap_phasefield_2d(f, x0, spec)
    one_d, err1d = fraclap_1d(profile_field(f.profile, f.eps), order.s, z0)
    curv = curvature_kernel_term(order, f.profile, f.eps, z0, window, H, spec)
    return full - one_d - curv, err2d + err1d


# ---------------------------------------------------------------------------
# exact identities

def formula_eta_identity(p: Profile, z0: float, ell: float, eps: float,
                         spec: QuadratureSpec | None = None):
    """Both sides of the integration-by-parts identity for the log kernel.

    lhs = integral of (w_eps(z0+z) - w_eps(z0)) z/|z|^2 over (-ell, ell);
    rhs = boundary term at log(ell) minus the integral of w_eps' log|z|.
    Exact for any profile, tolerance limited only by quadrature.
    """
    if ell <= 0 or eps <= 0:
        raise DomainError("ell and eps must be positive")
    q = spec or QuadratureSpec(rel_tol=1e-11, abs_tol=1e-13)
    w0 = eval_profile(p, z0, 0, eps)

    def f(z):
        return (eval_profile(p, z0 + z, 0, eps) - w0) / z

    bks = [b for b in (-eps, eps, -10 * eps, 10 * eps, -z0, -z0 - eps, -z0 + eps)
           if -ell < b < ell and b != 0.0]
    lhs, _ = integrate(f, -ell, ell, singularities=[(0.0, None)], spec=q,
                       breakpoints=bks)
    jump = (eval_profile(p, ell + z0, 0, eps)
            - eval_profile(p, z0 - ell, 0, eps))
    log_int = profile_kernel_integral(p, "log", z0, ell, eps, spec=q)
    rhs = jump * math.log(ell) - log_int
    return lhs, rhs


def log_expansion_integral(d: int, delta: float, variant="moment2",
                           alpha: float = 0.0,
                           spec: QuadratureSpec | None = None) -> float:
    """Logarithmically growing moment integrals over the (d-1)-ball.

    moment2: integral of |y_1|^2 (1+|y|^2)^{-(d+1)/2}; its large-delta slope
    against log(delta) is gamma_{1,1/2}/gamma_{d,1/2}. The general variant
    integrates |y|^{alpha+2} (1+|y|^2)^{-(d+1+alpha)/2}, with slope
    (d-1) gamma_{1,1/2}/gamma_{d,1/2}.
    """
    if delta < 1 or d not in (2, 3):
        raise DomainError("need delta >= 1 and d in {2,3}")
    q = spec or QuadratureSpec(rel_tol=1e-11, abs_tol=1e-13)
    if variant == "moment2":
        if d == 2:
            f = lambda y: y * y * (1 + y * y) ** (-1.5)
            val, _ = integrate(f, -delta, delta, spec=q)
        else:
            f = lambda r: math.pi * r ** 3 * (1 + r * r) ** (-2.0)
            val, _ = integrate(f, 0.0, delta, spec=q)
        return val
    if variant == "general":
        ex = (d + 1 + alpha) / 2.0
        if d == 2:
            f = lambda r: 2.0 * r ** (2 + alpha) * (1 + r * r) ** (-ex)
        else:
            f = lambda r: 2.0 * math.pi * r ** (3 + alpha) * (1 + r * r) ** (-ex)
        val, _ = integrate(f, 0.0, delta, spec=q)
        return val
    raise DomainError(f"unknown variant {variant!r}")


# ---------------------------------------------------------------------------
# the vanishing double limit and its relatives

def willmore_limit_quantity(s, p: Profile, eps: float, ell: float,
                            delta: float,
                            spec: QuadratureSpec | None = None) -> float:
    """Q = integral over |z0|<ell of the squared kernel average of w_eps'.

    The inner integral runs over (-delta, delta) against |zbar|^{1-2s}
    (above s=1/2, including the supercritical control regime) or |log|zbar||
    at s=1/2. The iterated limit eps -> 0 then ell -> 0 vanishes for
    s in [1/2, 3/4).
    """
    order = FracOrder.of(s)
    if not 0 < ell < delta:
        raise DomainError("need 0 < ell < delta")
    q = spec or QuadratureSpec(rel_tol=1e-8, abs_tol=1e-12)

    if order.is_half:
        inner = lambda z0: profile_kernel_integral(p, "abslog", z0, delta,
                                                   eps, spec=q)
    elif order.s > 0.5:
        inner = lambda z0: profile_kernel_integral(p, "power", z0, delta, eps,
                                                   power=2 * order.s - 1,
                                                   spec=q)
    else:
        raise DomainError("quantity defined for s >= 1/2")

    def f(z0):
        return inner(float(z0)) ** 2

    bks = [b for b in (-5 * eps, 5 * eps, -eps, eps) if -ell < b < ell]
    val, _ = integrate(f, -ell, ell, spec=QuadratureSpec(1e-7, 1e-12),
                       vectorized=False, breakpoints=[0.0] + bks)
    return val


def potential_limit_ratio(s, p: Profile, eps: float, z: float) -> float:
    """Ratio of eps^{-2s} W'(w_eps(z)) to its sharp-interface limit.

    The limit is -(gamma_{1,s}/s) z |z|^{-1-2s}; the ratio tends to one
    uniformly on |z| >= alpha > 0.
    """
    order = FracOrder.of(s)
    if abs(z) < 0.1:
        raise DomainError("ratio meaningful away from the interface")
    from .foundations import potential
    num = potential(p.potential, eval_profile(p, z, 0, eps), 1) / eps ** (2 * order.s)
    g1 = gamma_ds(1, order.s)
    den = -(g1 / order.s) * z / abs(z) ** (1 + 2 * order.s)
    return float(num / den)


def claim5_double_integral(s, p: Profile, eps: float, ell: float,
                           spec: QuadratureSpec | None = None) -> float:
    """Double integral of |w_eps(t)-w_eps(z)|^2 |t-z|^{-1-2s} on (0,ell)^2.

    Rescaling t = eps that moves everything onto the profile scale:
    eps^{1-2s} I(ell/eps) with I over (0,T)^2. The diagonal band is
    integrated through the first-order cancellation analytically.
    """
    order = FracOrder.of(s)
    sv = order.s
    if sv >= 0.5:
        raise DomainError("claim applies below s = 1/2")
    ts = 2 * sv
    q = spec or QuadratureSpec(rel_tol=1e-9, abs_tol=1e-12)
    T = ell / eps
    band = 1e-2

    def outer(z):
        z = float(z)
        wz = eval_profile(p, z, 0)
        w1 = eval_profile(p, z, 1)
        hi_band = min(z + band, T)
        # diagonal band by the quadratic model
        val = w1 * w1 * (hi_band - z) ** (2 - ts) / (2 - ts)
        if hi_band < T:
            def g(t):
                return (eval_profile(p, t, 0) - wz) ** 2 * (t - z) ** (-1 - ts)
            bks = [b for b in (z + 1.0, z + 10.0, 1.0, 10.0, 50.0)
                   if hi_band < b < T]
            v, _ = integrate(g, hi_band, T, spec=q, breakpoints=bks)
            val += v
        return val

    bks = [b for b in (1.0, 10.0, 50.0, T / 2.0) if 0 < b < T]
    val, _ = integrate(outer, 0.0, T, spec=QuadratureSpec(1e-8, 1e-12),
                       vectorized=False, breakpoints=bks)
    return 2.0 * eps ** (1 - ts) * val


# ---------------------------------------------------------------------------
# sweep extrapolation

def _fit_power(eps, v):
    def rss(pw):
        X = np.column_stack([np.ones_like(eps), eps ** pw])
        coef, *_ = np.linalg.lstsq(X, v, rcond=None)
        r = float(np.sum((v - X @ coef) ** 2))
        return r, coef

    grid = np.linspace(0.02, 3.5, 175)
    vals = [rss(pw)[0] for pw in grid]
    k = int(np.argmin(vals))
    lo = grid[max(0, k - 1)]
    hi = grid[min(len(grid) - 1, k + 1)]
    for _ in range(80):
        m1 = lo + 0.382 * (hi - lo)
        m2 = hi - 0.382 * (hi - lo)
        if rss(m1)[0] <= rss(m2)[0]:
            hi = m2
        else:
            lo = m1
    pw = 0.5 * (lo + hi)
    r, coef = rss(pw)
    return float(coef[0]), float(coef[1]), pw, r


def extrapolate(sweep, model: str = "power") -> SweepResult:
    """Least-squares limit of a geometric epsilon-sweep.

    model 'power' fits v = L + C eps^p with p found by golden search;
    'log' fits v = L + C/|log eps|. Raises PoorFit (result attached) when
    the relative rms misfit exceeds 0.1.
    """
    pairs = sorted(((float(e), float(v)) for e, v in sweep), reverse=True)
    eps = np.array([e for e, _ in pairs])
    v = np.array([val for _, val in pairs])
    if len(pairs) < 4:
        raise DomainError("need at least 4 sweep points")
    ratios = eps[:-1] / eps[1:]
    if np.max(ratios) / np.min(ratios) > 1.2:
        raise DomainError("sweep must be (approximately) geometric")
    if model == "power":
        L, C, pw, r = _fit_power(eps, v)
    elif model == "log":
        X = np.column_stack([np.ones_like(eps), 1.0 / np.abs(np.log(eps))])
        coef, *_ = np.linalg.lstsq(X, v, rcond=None)
        L, C = float(coef[0]), float(coef[1])
        pw = math.nan
        r = float(np.sum((v - X @ coef) ** 2))
    else:
        raise DomainError(f"unknown model {model!r}")
    scale = max(abs(L), float(np.max(v) - np.min(v)), 1e-300)
    residual = math.sqrt(r / len(pairs)) / scale
    result = SweepResult(tuple(pairs), L, pw, residual, model)
    if residual > 0.1:
        raise PoorFit(f"relative fit residual {residual:.3f}", result=result)
    return result
