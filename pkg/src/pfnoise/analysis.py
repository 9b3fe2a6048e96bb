"""Control design for proportional feedback ``x -> f(nu x)`` under bounded noise.

The central object is the reciprocal per-capita growth ``phi(z) = z / f(z)``,
increasing on ``(0, b]`` for every admissible map.  The gain placing a target
``x*`` at a fixed point of ``f(nu x)`` is ``nu = f^{-1}(x*) / x*``, and both
containment results (multiplicative and additive noise) are expressed through
``phi^{-1}`` and the controlled map ``g(x) = f(nu x)``.

Every root in this module is found by plain bisection on a bracket where the
target function is known to be monotone.
"""
from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    AnalysisError,
    BoundViolationError,
    DesignError,
    DomainError,
    InvalidMapError,
    RangeError,
    SingularityError,
)
from .maps import GrowthMap

ROOT_TOL = 1e-12
MAX_ITER = 200
# |f(nu x*) - x*| <= FIXED_POINT_RTOL * max(1, x*)
FIXED_POINT_RTOL = 1e-9
Y3_SEARCH_FACTOR = 100.0
SCAN_POINTS = 4001


def bisect_increasing(
    func: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = ROOT_TOL,
    max_iter: int = MAX_ITER,
) -> float:
    """Zero of ``func`` on ``[lo, hi]`` given ``func(lo) < 0 <= func(hi)``.

    The caller guarantees the sign pattern; endpoints are never evaluated.
    """
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if func(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return float(0.5 * (lo + hi))


def golden_section_max(
    func: Callable[[float], float], a: float, b: float, tol: float = 1e-12
) -> tuple[float, float]:
    """Maximize a unimodal ``func`` on ``[a, b]``; returns ``(argmax, max)``."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = func(c), func(d)
    while b - a > tol * max(1.0, abs(a)):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = func(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = func(d)
        if c >= d:
            break
    x = 0.5 * (a + b)
    return float(x), float(func(x))


# --------------------------------------------------------------------------
# Slope certificate
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Check:
    name: str
    grid_size: int
    passed: bool
    worst_margin: float
    tolerance: float = 0.0

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "grid_size": self.grid_size,
            "passed": self.passed,
            "worst_margin": self.worst_margin,
            "tolerance": self.tolerance,
        }


@dataclass(frozen=True)
class SlopeCertificate:
    """Grid evidence that a map satisfies the slope condition with ``b_used``."""

    map_id: str
    b_used: float
    checks: tuple[Check, ...]

    @property
    def overall(self) -> bool:
        return all(c.passed for c in self.checks)

    def failing(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {
            "map_id": self.map_id,
            "b_used": self.b_used,
            "overall": self.overall,
            "checks": [c.to_dict() for c in self.checks],
        }


def _strict(name: str, n: int, margin: float) -> Check:
    margin = float(margin)
    return Check(name, n, bool(margin > 0.0), margin)


def _tolerant(name: str, n: int, margin: float, tol: float) -> Check:
    margin = float(margin)
    return Check(name, n, bool(margin >= -tol), margin, tol)


def verify_slope_assumption(m: GrowthMap, grid_size: int = 1000) -> SlopeCertificate:
    """Check the slope condition on geometric grids.

    Strict monotonicity is tested on ``[b/10, b]``; closer to zero, where
    adjacent values of ``f(x)/x`` can coincide in floating point, the same
    properties are tested up to a relative rounding tolerance.  The tail
    condition ``f(x)/x < f(b)/b`` is sampled on ``(b, 50 b]``.
    """
    if grid_size < 100:
        raise ValueError("grid_size must be at least 100")
    b = m.b
    checks: list[Check] = []

    main = np.geomspace(b / 10.0, b, grid_size)
    fm = np.asarray(m(main), dtype=float)
    rm = fm / main
    checks.append(_strict("f_increasing", grid_size, np.min(np.diff(fm))))
    checks.append(_strict("ratio_decreasing", grid_size, np.min(-np.diff(rm))))

    near = np.geomspace(b * 1e-6, b / 10.0, grid_size)
    fn = np.asarray(m(near), dtype=float)
    rn = fn / near
    tol_f = 1e-12 * float(np.max(np.abs(fn))) if np.all(np.isfinite(fn)) else 0.0
    tol_r = 1e-12 * float(np.max(np.abs(rn))) if np.all(np.isfinite(rn)) else 0.0
    checks.append(_tolerant("f_nondecreasing_near_zero", grid_size, np.min(np.diff(fn)), tol_f))
    checks.append(_tolerant("ratio_nonincreasing_near_zero", grid_size, np.min(-np.diff(rn)), tol_r))

    fb = float(m(b))
    checks.append(_strict("f_b_exceeds_b", 1, fb - b))

    tail = np.geomspace(b, 50.0 * b, grid_size + 1)[1:]
    ft = np.asarray(m(tail), dtype=float)
    checks.append(_strict("ratio_below_beyond_b", grid_size, np.min(fb / b - ft / tail)))

    all_f = np.concatenate([fn, fm, ft])
    checks.append(_tolerant("nonnegative", 3 * grid_size, np.min(all_f), 0.0))

    f0 = float(m(0.0))
    checks.append(
        _tolerant("f_at_zero_declared", 1, -abs(f0 - m.f_at_zero), 1e-12 * max(1.0, abs(f0)))
    )

    x_small, x_mid = b * 1e-7, b * 1e-4
    r_small = float(m(x_small)) / x_small
    limit = m.slope_limit_at_zero
    if math.isinf(limit):
        r_mid = float(m(x_mid)) / x_mid
        margin = r_small - max(r_mid, fb / b)
        checks.append(_strict("slope_limit_declared", 2, margin))
    else:
        margin = min(1e-3 * limit - abs(r_small - limit), limit - 1.0)
        checks.append(_strict("slope_limit_declared", 1, margin))

    return SlopeCertificate(m.label, b, tuple(checks))


# --------------------------------------------------------------------------
# phi, phi^{-1}, f^{-1}
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class PhiProfile:
    phi_at_zero: float
    phi_at_b: float
    tol: float = ROOT_TOL


def eval_phi(m: GrowthMap, z: float) -> float:
    """``z / f(z)`` for ``0 < z <= b``."""
    z = float(z)
    if not (0.0 < z <= m.b):
        raise DomainError(f"phi is defined on (0, b] = (0, {m.b}], got {z}")
    if m.has_analytic_phi:
        return float(m.analytic_phi(z))
    fz = float(m(z))
    if fz == 0.0:
        raise SingularityError(f"f({z}) = 0")
    return z / fz


def phi_at_zero(m: GrowthMap) -> float:
    """Limit of ``x / f(x)`` at ``0+``: zero when ``f(x)/x`` is unbounded."""
    limit = m.slope_limit_at_zero
    if limit <= 1.0:
        raise InvalidMapError(f"lim f(x)/x at 0 must exceed 1, got {limit}")
    if math.isinf(limit):
        return 0.0
    return 1.0 / limit


def phi_profile(m: GrowthMap) -> PhiProfile:
    p0, pb = phi_at_zero(m), eval_phi(m, m.b)
    if not (0.0 <= p0 < pb < 1.0):
        raise InvalidMapError(f"need 0 <= phi(0) < phi(b) < 1, got {p0}, {pb}")
    return PhiProfile(p0, pb)


def invert_f(m: GrowthMap, y: float) -> float:
    """The unique ``x`` in ``(0, b)`` with ``f(x) = y``."""
    y = float(y)
    f0, fb = m.f_at_zero, m.f_b
    if not (f0 < y < fb):
        raise RangeError(f"f^-1 needs y in ({f0}, {fb}), got {y}", (f0, fb))
    return bisect_increasing(lambda x: float(m(x)) - y, 0.0, m.b)


def invert_phi(m: GrowthMap, mu: float) -> float:
    """The unique ``x`` in ``(0, b)`` with ``x / f(x) = mu``."""
    mu = float(mu)
    p0, pb = phi_at_zero(m), eval_phi(m, m.b)
    if not (p0 < mu < pb):
        raise RangeError(f"phi^-1 needs mu in ({p0}, {pb}), got {mu}", (p0, pb))
    if m.has_analytic_phi:
        return float(m.analytic_phi_inv(mu))
    return bisect_increasing(lambda x: x / float(m(x)) - mu, 0.0, m.b)


def fixed_point(m: GrowthMap, nu: float) -> float:
    """Positive fixed point of ``x -> f(nu x)`` in ``(0, b/nu)``."""
    return invert_phi(m, nu) / nu


# --------------------------------------------------------------------------
# Multiplicative noise
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ControlDesign:
    """Gain ``nu`` making ``xstar`` a fixed point, plus an optional noise level.

    ``mult_interval`` is set only when ``ell`` is given; it is the interval
    that every trajectory of ``x -> f((nu + ell chi) x)`` eventually enters
    and never leaves.
    """

    map: GrowthMap = field(repr=False)
    xstar: float
    nu: float
    f_inv_xstar: float
    phi0: float
    phi_b: float
    ell: float | None = None
    delta: float = 0.0
    mult_interval: tuple[float, float] | None = None

    @property
    def ell_max(self) -> float:
        return min(self.phi_b - self.nu, self.nu - self.phi0)

    def with_noise(self, ell: float, delta: float = 0.0) -> ControlDesign:
        interval = mult_interval(self.map, self.nu, ell, delta)
        return replace(self, ell=float(ell), delta=float(delta), mult_interval=interval)


def design_nu(m: GrowthMap, xstar: float) -> ControlDesign:
    """Gain ``nu = phi(f^{-1}(x*)) = f^{-1}(x*) / x*`` for ``x*`` in ``(f(0), f(b))``."""
    xstar = float(xstar)
    f0, fb = m.f_at_zero, m.f_b
    if not (f0 < xstar < fb):
        raise RangeError(
            f"x* = {xstar} is not stabilizable; admissible interval is ({f0}, {fb})",
            (f0, fb),
        )
    prof = phi_profile(m)
    u = invert_f(m, xstar)
    nu = u / xstar
    resid = abs(float(m(nu * xstar)) - xstar)
    if resid > FIXED_POINT_RTOL * max(1.0, xstar):
        raise AnalysisError(f"f(nu x*) misses x* by {resid:g}")
    return ControlDesign(m, xstar, nu, u, prof.phi_at_zero, prof.phi_at_b)


def design_control(
    m: GrowthMap, xstar: float, ell: float | None = None, delta: float = 0.0
) -> ControlDesign:
    d = design_nu(m, xstar)
    return d if ell is None else d.with_noise(ell, delta)


def ell_max_multiplicative(design: ControlDesign) -> float:
    """Largest admissible multiplicative noise level (exclusive)."""
    return design.ell_max


def _check_nu(m: GrowthMap, nu: float) -> PhiProfile:
    prof = phi_profile(m)
    if not (prof.phi_at_zero < nu < prof.phi_at_b):
        raise RangeError(
            f"nu = {nu} outside ({prof.phi_at_zero}, {prof.phi_at_b})",
            (prof.phi_at_zero, prof.phi_at_b),
        )
    return prof


def mult_interval(
    m: GrowthMap, nu: float, ell: float, delta: float = 0.0
) -> tuple[float, float]:
    """Eventual containment interval under multiplicative noise of level ``ell``.

    ``lo = phi^{-1}(nu - ell) / (nu + ell) - delta`` and
    ``hi = phi^{-1}(nu + ell) / (nu - ell) + delta``.
    """
    nu, ell, delta = float(nu), float(ell), float(delta)
    prof = _check_nu(m, nu)
    if ell < 0.0:
        raise BoundViolationError(f"noise level must be nonnegative, got {ell}")
    if delta < 0.0:
        raise DomainError(f"delta must be nonnegative, got {delta}")
    bound = min(prof.phi_at_b - nu, nu - prof.phi_at_zero)
    if ell >= bound:
        raise BoundViolationError(f"ell = {ell} must be below {bound}")
    lo = invert_phi(m, nu - ell) / (nu + ell) - delta
    hi = invert_phi(m, nu + ell) / (nu - ell) + delta
    return float(lo), float(hi)


@dataclass(frozen=True)
class PerturbationBand:
    """Absorbing band for the scaled state ``nu_n x_n`` when ``nu_n`` stays in ``[mu_lo, mu_hi]``."""

    mu_lo: float
    mu_hi: float
    y_lo: float
    y_hi: float
    epsilon: float

    @property
    def interval(self) -> tuple[float, float]:
        return self.y_lo - self.epsilon, self.y_hi + self.epsilon


def perturbation_band(
    m: GrowthMap, mu_lo: float, mu_hi: float, epsilon: float = 1e-9
) -> PerturbationBand:
    prof = phi_profile(m)
    if not (prof.phi_at_zero < mu_lo < mu_hi < prof.phi_at_b):
        raise RangeError(
            f"need phi(0) < mu_lo < mu_hi < phi(b), got {mu_lo}, {mu_hi}",
            (prof.phi_at_zero, prof.phi_at_b),
        )
    if epsilon <= 0.0:
        raise DomainError("epsilon must be positive")
    return PerturbationBand(
        mu_lo, mu_hi, invert_phi(m, mu_lo), invert_phi(m, mu_hi), float(epsilon)
    )


# --------------------------------------------------------------------------
# Additive noise
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class AdditiveDesign:
    """Landmarks for ``x -> max(f(nu x) + r, 0)`` with ``|r| <= d``.

    ``[y1, y3]`` is absorbing and trajectories inside it end up in
    ``[y1, y2 + epsilon]``; ``y3`` may be ``inf``.
    """

    map: GrowthMap = field(repr=False)
    nu: float
    xstar: float
    c: float
    d_max: float
    g_minus_x_max: float
    x_max: float
    d: float
    y1: float
    y2: float
    y3: float
    epsilon: float = 1e-3

    def g(self, x):
        return self.map(self.nu * x)

    @property
    def interval(self) -> tuple[float, float]:
        return self.y1, self.y2 + self.epsilon


def additive_d_max(m: GrowthMap, nu: float) -> tuple[float, float, float]:
    """``(d_max, max (g(x) - x) on [0, x*], argmax)`` for ``g(x) = f(nu x)``.

    ``d_max = min(c - g(c), max_{[0, x*]} (g(x) - x))`` with ``c = b / nu``.
    """
    nu = float(nu)
    _check_nu(m, nu)
    xs = fixed_point(m, nu)
    c = m.b / nu

    def gap(x):
        return float(m(nu * x)) - x

    grid = np.linspace(0.0, xs, SCAN_POINTS)
    vals = np.asarray(m(nu * grid), dtype=float) - grid
    i = int(np.argmax(vals))
    a, b = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    x_max, g_max = golden_section_max(gap, a, b)
    if vals[i] > g_max:
        x_max, g_max = float(grid[i]), float(vals[i])
    d_max = min(c - float(m(nu * c)), float(g_max))
    if d_max <= 0.0:
        raise DesignError(f"d_max = {d_max} <= 0 for nu = {nu}")
    return float(d_max), float(g_max), float(x_max)


def additive_y_points(m: GrowthMap, nu: float, d: float) -> tuple[float, float, float]:
    """``(y1, y2, y3)`` for perturbation bound ``0 < d < d_max``.

    ``y1`` is the rightmost solution of ``g(x) - x = d`` below ``x*``, ``y2``
    the solution of ``g(x) + d = x`` in ``(x*, c)`` and ``y3`` the first point
    beyond ``x*`` where ``g(x) - d`` drops to ``y1`` (``inf`` if none up to
    ``100 c``).
    """
    nu, d = float(nu), float(d)
    if d <= 0.0:
        raise DomainError(f"d must be positive, got {d}")
    d_max, _, x_max = additive_d_max(m, nu)
    if d >= d_max:
        raise BoundViolationError(f"d = {d} must be below d_max = {d_max}")
    xs = fixed_point(m, nu)
    c = m.b / nu

    def g(x):
        return m(nu * x)

    grid = np.linspace(x_max, xs, SCAN_POINTS)
    h = np.asarray(g(grid), dtype=float) - grid - d
    above = np.flatnonzero(h >= 0.0)
    if above.size == 0 or above[-1] == len(grid) - 1:
        raise AnalysisError("could not bracket y1")
    j = int(above[-1])
    y1 = bisect_increasing(lambda x: x + d - float(g(x)), grid[j], grid[j + 1])

    y2 = bisect_increasing(lambda x: x - float(g(x)) - d, xs, c)

    far = np.geomspace(c, Y3_SEARCH_FACTOR * c, SCAN_POINTS)
    k = np.asarray(g(far), dtype=float) - d - y1
    below = np.flatnonzero(k <= 0.0)
    if below.size == 0:
        y3 = math.inf
    else:
        j = int(below[0])
        if j == 0:
            raise AnalysisError("g(c) - d <= y1; d is not admissible")
        y3 = bisect_increasing(lambda x: y1 + d - float(g(x)), far[j - 1], far[j])
    return float(y1), float(y2), float(y3)


def additive_design(
    m: GrowthMap, nu: float, d: float | None = None, epsilon: float = 1e-3
) -> AdditiveDesign:
    """Full additive design; ``d=None`` picks half of ``d_max``."""
    nu = float(nu)
    d_max, g_max, x_max = additive_d_max(m, nu)
    d = 0.5 * d_max if d is None else float(d)
    y1, y2, y3 = additive_y_points(m, nu, d)
    return AdditiveDesign(
        map=m,
        nu=nu,
        xstar=fixed_point(m, nu),
        c=m.b / nu,
        d_max=d_max,
        g_minus_x_max=g_max,
        x_max=x_max,
        d=d,
        y1=y1,
        y2=y2,
        y3=y3,
        epsilon=float(epsilon),
    )
