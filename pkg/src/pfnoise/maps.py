"""Catalog of one-dimensional growth maps ``x -> f(x)``.

Every map here is meant to satisfy the slope condition used by the control
design: on ``(0, b]`` the map is strictly increasing while ``f(x)/x`` strictly
decreases, ``f(b) > b``, and ``f(x)/x < f(b)/b`` beyond ``b``.

All evaluators accept scalars or numpy arrays.
"""
from __future__ import annotations

import math
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType

import numpy as np

from .errors import AnalysisError, DomainError, InvalidMapError

__all__ = [
    "MapKind",
    "GrowthMap",
    "make_map",
    "ricker",
    "truncated_logistic",
    "maynard_smith",
    "beverton_holt_power",
    "gompertz",
    "quail",
    "custom",
    "bh_example",
    "quail_example",
    "eval_map",
    "default_b",
    "smallest_critical_point",
    "map_from_dict",
]

# Relative slack when comparing a user-supplied b with its (possibly numeric) cap.
_CAP_RTOL = 1e-9


class MapKind(str, Enum):
    RICKER = "ricker"
    TRUNCATED_LOGISTIC = "truncated_logistic"
    MAYNARD_SMITH = "maynard_smith"
    BEVERTON_HOLT_POWER = "beverton_holt_power"
    GOMPERTZ = "gompertz"
    QUAIL = "quail"
    CUSTOM = "custom"


PARAM_NAMES: dict[MapKind, tuple[str, ...]] = {
    MapKind.RICKER: ("r",),
    MapKind.TRUNCATED_LOGISTIC: ("r",),
    MapKind.MAYNARD_SMITH: ("A", "B", "gamma"),
    MapKind.BEVERTON_HOLT_POWER: ("A", "B", "gamma"),
    MapKind.GOMPERTZ: ("K",),
    MapKind.QUAIL: ("A", "B", "gamma"),
    MapKind.CUSTOM: (),
}


def _ricker(x, p):
    return x * np.exp(p["r"] * (1.0 - x))


def _truncated_logistic(x, p):
    return np.maximum(p["r"] * x * (1.0 - x), 0.0)


def _maynard_smith(x, p):
    return p["A"] * x / (1.0 + p["B"] * x ** p["gamma"])


def _beverton_holt_power(x, p):
    return p["A"] * x / (1.0 + p["B"] * x) ** p["gamma"]


def _gompertz(x, p):
    # f(0) = 0 by continuity; negative values past K are truncated so that f >= 0.
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        y = np.where(x > 0.0, x * np.log(p["K"] / np.where(x > 0.0, x, 1.0)), 0.0)
    return np.maximum(y, 0.0)


def _quail(x, p):
    return x * (p["A"] + p["B"] / (1.0 + x ** p["gamma"]))


_EVALUATORS: dict[MapKind, Callable] = {
    MapKind.RICKER: _ricker,
    MapKind.TRUNCATED_LOGISTIC: _truncated_logistic,
    MapKind.MAYNARD_SMITH: _maynard_smith,
    MapKind.BEVERTON_HOLT_POWER: _beverton_holt_power,
    MapKind.GOMPERTZ: _gompertz,
    MapKind.QUAIL: _quail,
}


# Closed forms of z/f(z) on (0, b] and of its inverse.
def _phi_ricker(z, p):
    return np.exp(-p["r"] * (1.0 - z))


def _phi_inv_ricker(mu, p):
    return 1.0 + np.log(mu) / p["r"]


def _phi_logistic(z, p):
    return 1.0 / (p["r"] * (1.0 - z))


def _phi_inv_logistic(mu, p):
    return 1.0 - 1.0 / (p["r"] * mu)


def _phi_maynard_smith(z, p):
    return (1.0 + p["B"] * z ** p["gamma"]) / p["A"]


def _phi_inv_maynard_smith(mu, p):
    return ((p["A"] * mu - 1.0) / p["B"]) ** (1.0 / p["gamma"])


def _phi_bhp(z, p):
    return (1.0 + p["B"] * z) ** p["gamma"] / p["A"]


def _phi_inv_bhp(mu, p):
    return ((p["A"] * mu) ** (1.0 / p["gamma"]) - 1.0) / p["B"]


def _phi_gompertz(z, p):
    return 1.0 / np.log(p["K"] / z)


def _phi_inv_gompertz(mu, p):
    return p["K"] * np.exp(-1.0 / mu)


_ANALYTIC_PHI: dict[MapKind, tuple[Callable, Callable]] = {
    MapKind.RICKER: (_phi_ricker, _phi_inv_ricker),
    MapKind.TRUNCATED_LOGISTIC: (_phi_logistic, _phi_inv_logistic),
    MapKind.MAYNARD_SMITH: (_phi_maynard_smith, _phi_inv_maynard_smith),
    MapKind.BEVERTON_HOLT_POWER: (_phi_bhp, _phi_inv_bhp),
    MapKind.GOMPERTZ: (_phi_gompertz, _phi_inv_gompertz),
}


@dataclass(frozen=True)
class GrowthMap:
    """An immutable growth map together with its threshold ``b``.

    Build instances with :func:`make_map` or the per-kind helpers rather than
    calling the constructor directly; those validate parameters and fill in
    ``f_at_zero`` and ``slope_limit_at_zero``.
    """

    kind: MapKind
    params: Mapping[str, float]
    b: float
    f_at_zero: float
    slope_limit_at_zero: float
    name: str = ""
    func: Callable | None = field(default=None, repr=False, compare=False)

    def __call__(self, x):
        if self.kind is MapKind.CUSTOM:
            y = self.func(x)
        else:
            y = _EVALUATORS[self.kind](x, self.params)
        if np.ndim(y) == 0:
            return float(y)
        return y

    @property
    def label(self) -> str:
        if self.name:
            return self.name
        args = ",".join(f"{k}={v:g}" for k, v in self.params.items())
        return f"{self.kind.value}({args})"

    @property
    def f_b(self) -> float:
        return self(self.b)

    @property
    def has_analytic_phi(self) -> bool:
        return self.kind in _ANALYTIC_PHI

    def analytic_phi(self, z):
        return _ANALYTIC_PHI[self.kind][0](z, self.params)

    def analytic_phi_inv(self, mu):
        return _ANALYTIC_PHI[self.kind][1](mu, self.params)

    def to_dict(self) -> dict:
        if self.kind is MapKind.CUSTOM:
            raise InvalidMapError("custom maps cannot be serialized")
        return {"kind": self.kind.value, "params": dict(self.params), "b": self.b}


def eval_map(m: GrowthMap, x: float) -> float:
    """Checked scalar evaluation of ``f(x)`` for ``x >= 0``."""
    x = float(x)
    if not math.isfinite(x) or x < 0.0:
        raise DomainError(f"map argument must be finite and nonnegative, got {x!r}")
    return float(m(x))


def smallest_critical_point(
    func: Callable,
    lo: float = 1e-6,
    hi: float = 1e6,
    n_grid: int = 4000,
    rel_step: float = 1e-6,
    tol: float = 1e-12,
    max_iter: int = 200,
) -> float:
    """Locate the first point where ``func`` turns from increasing to decreasing.

    The derivative is replaced by the central difference quotient with step
    ``rel_step * x``; its first + to - sign change on a geometric grid is then
    refined by bisection.
    """

    def slope(x):
        h = rel_step * x
        return (func(x + h) - func(x - h)) / (2.0 * h)

    grid = np.geomspace(lo, hi, n_grid)
    d = np.array([slope(x) for x in grid], dtype=float)
    if not np.all(np.isfinite(d)):
        raise AnalysisError("difference quotient is not finite on the search grid")
    if d[0] <= 0.0:
        raise AnalysisError(f"map is not increasing at the search start x={lo:g}")
    down = np.flatnonzero(d <= 0.0)
    if down.size == 0:
        raise AnalysisError(f"no sign change of the slope on [{lo:g}, {hi:g}]")
    a, c = grid[down[0] - 1], grid[down[0]]
    for _ in range(max_iter):
        if c - a <= tol * max(1.0, a):
            break
        mid = 0.5 * (a + c)
        if slope(mid) > 0.0:
            a = mid
        else:
            c = mid
    return 0.5 * (a + c)


def _validate_params(kind: MapKind, params: Mapping[str, float]) -> dict[str, float]:
    names = PARAM_NAMES[kind]
    missing = [k for k in names if k not in params]
    extra = [k for k in params if k not in names]
    if missing or extra:
        raise InvalidMapError(
            f"{kind.value} expects parameters {names}, got {tuple(params)}"
        )
    out = {k: float(params[k]) for k in names}
    for k, v in out.items():
        if not math.isfinite(v) or v <= 0.0:
            raise InvalidMapError(f"{kind.value}: parameter {k} must be positive, got {v}")
    if "gamma" in out and out["gamma"] <= 1.0:
        raise InvalidMapError(f"{kind.value}: gamma must exceed 1, got {out['gamma']}")
    if kind is MapKind.TRUNCATED_LOGISTIC and out["r"] <= 2.0:
        raise InvalidMapError(f"truncated logistic needs r > 2, got {out['r']}")
    return out


def _slope_limit(kind: MapKind, p: Mapping[str, float]) -> float:
    if kind is MapKind.RICKER:
        return math.exp(p["r"])
    if kind is MapKind.TRUNCATED_LOGISTIC:
        return p["r"]
    if kind is MapKind.GOMPERTZ:
        return math.inf
    if kind in (MapKind.MAYNARD_SMITH, MapKind.BEVERTON_HOLT_POWER):
        return p["A"]
    if kind is MapKind.QUAIL:
        return p["A"] + p["B"]
    raise ValueError(kind)


def _canonical_b(kind: MapKind, p: Mapping[str, float], func: Callable | None = None) -> float:
    if kind is MapKind.RICKER:
        return 1.0 / p["r"]
    if kind is MapKind.TRUNCATED_LOGISTIC:
        return 0.5
    if kind is MapKind.GOMPERTZ:
        return p["K"] / math.e
    if kind is MapKind.CUSTOM:
        return smallest_critical_point(func)
    evaluator = _EVALUATORS[kind]
    return smallest_critical_point(lambda x: float(evaluator(x, p)))


def default_b(m: GrowthMap) -> float:
    """Largest safe canonical threshold for the map's kind and parameters."""
    return _canonical_b(m.kind, m.params, m.func)


def make_map(
    kind: MapKind | str,
    params: Mapping[str, float] | None = None,
    b: float | None = None,
    *,
    enforce_cap: bool = True,
    name: str = "",
) -> GrowthMap:
    """Build a catalog map; ``b=None`` selects :func:`default_b`.

    With ``enforce_cap=False`` a ``b`` above the per-kind cap is accepted,
    which is only useful for demonstrating failing certificates.
    """
    kind = MapKind(kind)
    if kind is MapKind.CUSTOM:
        raise InvalidMapError("use custom() for user-supplied maps")
    p = _validate_params(kind, params or {})
    cap = _canonical_b(kind, p)
    if b is None:
        b = cap
    b = float(b)
    if not math.isfinite(b) or b <= 0.0:
        raise InvalidMapError(f"b must be positive, got {b}")
    if enforce_cap and b > cap * (1.0 + _CAP_RTOL):
        raise InvalidMapError(f"{kind.value}: b={b} exceeds the admissible cap {cap}")
    f0 = float(_EVALUATORS[kind](0.0, p))
    return GrowthMap(
        kind=kind,
        params=MappingProxyType(p),
        b=b,
        f_at_zero=f0,
        slope_limit_at_zero=_slope_limit(kind, p),
        name=name,
    )


def ricker(r: float, b: float | None = None, **kw) -> GrowthMap:
    """``f(x) = x exp(r (1 - x))``."""
    return make_map(MapKind.RICKER, {"r": r}, b, **kw)


def truncated_logistic(r: float, b: float | None = None, **kw) -> GrowthMap:
    """``f(x) = max(r x (1 - x), 0)`` with ``r > 2``."""
    return make_map(MapKind.TRUNCATED_LOGISTIC, {"r": r}, b, **kw)


def maynard_smith(A: float, B: float, gamma: float, b: float | None = None, **kw) -> GrowthMap:
    """``f(x) = A x / (1 + B x^gamma)``."""
    return make_map(MapKind.MAYNARD_SMITH, {"A": A, "B": B, "gamma": gamma}, b, **kw)


def beverton_holt_power(A: float, B: float, gamma: float, b: float | None = None, **kw) -> GrowthMap:
    """``f(x) = A x / (1 + B x)^gamma``."""
    return make_map(MapKind.BEVERTON_HOLT_POWER, {"A": A, "B": B, "gamma": gamma}, b, **kw)


def gompertz(K: float, b: float | None = None, **kw) -> GrowthMap:
    """``f(x) = x ln(K / x)``, truncated at zero for ``x > K``."""
    return make_map(MapKind.GOMPERTZ, {"K": K}, b, **kw)


def quail(A: float, B: float, gamma: float, b: float | None = None, **kw) -> GrowthMap:
    """``f(x) = x (A + B / (1 + x^gamma))``; may be bimodal."""
    return make_map(MapKind.QUAIL, {"A": A, "B": B, "gamma": gamma}, b, **kw)


def custom(
    func: Callable,
    b: float,
    f_at_zero: float,
    slope_limit_at_zero: float = math.inf,
    name: str = "custom",
) -> GrowthMap:
    """Wrap a user-supplied map.

    ``func`` must accept numpy arrays. The declared values are not trusted;
    run :func:`pfnoise.analysis.verify_slope_assumption` before designing.
    """
    b = float(b)
    f_at_zero = float(f_at_zero)
    slope_limit_at_zero = float(slope_limit_at_zero)
    if not math.isfinite(b) or b <= 0.0:
        raise InvalidMapError(f"b must be positive, got {b}")
    if f_at_zero < 0.0:
        raise InvalidMapError("f(0) must be nonnegative")
    if f_at_zero > 0.0 and math.isfinite(slope_limit_at_zero):
        raise InvalidMapError("f(0) > 0 forces lim f(x)/x = +inf at 0")
    if slope_limit_at_zero <= 0.0:
        raise InvalidMapError("slope limit at zero must be positive")
    return GrowthMap(
        kind=MapKind.CUSTOM,
        params=MappingProxyType({}),
        b=b,
        f_at_zero=f_at_zero,
        slope_limit_at_zero=slope_limit_at_zero,
        name=name,
        func=func,
    )


def bh_example(b: float | None = None) -> GrowthMap:
    """The chaotic Beverton-Holt type map ``2.5 x / (1 + x^5)``."""
    return maynard_smith(2.5, 1.0, 5.0, b, name="bh")


def quail_example(b: float | None = None) -> GrowthMap:
    """Bobwhite quail map ``x (0.55 + 3.45 / (1 + x^9))``."""
    return quail(0.55, 3.45, 9.0, b, name="quail")


def map_from_dict(spec: Mapping) -> GrowthMap:
    """Inverse of :meth:`GrowthMap.to_dict`; a missing ``b`` means the default."""
    return make_map(spec["kind"], spec.get("params", {}), spec.get("b"), name=spec.get("name", ""))
