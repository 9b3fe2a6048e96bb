"""Seeded bounded noise on ``[-1, 1]`` and deterministic perturbation sequences.

Streams use numpy's counter-based Philox bit generator.  Run ``k`` of an
ensemble with master seed ``s`` draws from
``Philox(SeedSequence(s, spawn_key=(k,)))``, so a run's noise depends only on
``(s, k)`` and never on how many other runs are sampled or in what order.
"""
from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .errors import DomainError, NoiseSupportError

__all__ = [
    "NoiseSpec",
    "DeterministicSequence",
    "generator",
    "sample_stream",
    "validate",
    "NoiseReport",
]

KINDS = ("uniform", "beta", "tgauss")


@dataclass(frozen=True)
class NoiseSpec:
    """A symmetric law on ``[-1, 1]`` with a positive density, plus a master seed.

    ``kind`` is ``"uniform"``, ``"beta"`` (``2 Beta(alpha, alpha) - 1``) or
    ``"tgauss"`` (centered normal with scale ``sigma`` conditioned on
    ``[-1, 1]``, i.e. renormalized rather than clipped).
    """

    kind: str = "uniform"
    alpha: float | None = None
    sigma: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown noise kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "beta" and not (self.alpha and self.alpha > 0):
            raise DomainError("beta noise needs alpha > 0")
        if self.kind == "tgauss" and not (self.sigma and self.sigma > 0):
            raise DomainError("tgauss noise needs sigma > 0")
        if not (0 <= int(self.seed) < 2**64):
            raise DomainError("seed must be an unsigned 64-bit integer")

    @classmethod
    def from_dict(cls, d: dict) -> NoiseSpec:
        params = d.get("params", {}) or {}
        return cls(
            kind=d.get("kind", "uniform"),
            alpha=params.get("alpha"),
            sigma=params.get("sigma"),
            seed=int(d.get("seed", 0)),
        )

    def to_dict(self) -> dict:
        params = {}
        if self.alpha is not None:
            params["alpha"] = self.alpha
        if self.sigma is not None:
            params["sigma"] = self.sigma
        return {"kind": self.kind, "params": params, "seed": self.seed}

    @property
    def variance(self) -> float:
        if self.kind == "uniform":
            return 1.0 / 3.0
        if self.kind == "beta":
            return 1.0 / (2.0 * self.alpha + 1.0)
        return float(stats.truncnorm.var(-1.0 / self.sigma, 1.0 / self.sigma, scale=self.sigma))

    def with_seed(self, seed: int) -> NoiseSpec:
        return NoiseSpec(self.kind, self.alpha, self.sigma, seed)

    def draw(self, gen: np.random.Generator, n: int) -> np.ndarray:
        if self.kind == "uniform":
            return gen.uniform(-1.0, 1.0, n)
        if self.kind == "beta":
            return 2.0 * gen.beta(self.alpha, self.alpha, n) - 1.0
        a = 1.0 / self.sigma
        return stats.truncnorm.ppf(gen.random(n), -a, a, scale=self.sigma)


def generator(seed: int, run_index: int = 0) -> np.random.Generator:
    """Philox generator for run ``run_index`` under master ``seed``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(run_index),))
    return np.random.Generator(np.random.Philox(ss))


def sample_stream(spec: NoiseSpec, n: int, run_index: int = 0) -> np.ndarray:
    """``n`` i.i.d. draws for one run; identical arguments give identical output."""
    if n < 1:
        raise DomainError("n must be at least 1")
    return spec.draw(generator(spec.seed, run_index), n)


@dataclass(frozen=True)
class NoiseReport:
    n: int
    min: float
    max: float
    mean: float
    skew: float
    mean_bound: float
    skew_bound: float

    @property
    def passed(self) -> bool:
        return abs(self.mean) <= self.mean_bound and abs(self.skew) <= self.skew_bound


def validate(source, n: int = 100_000) -> NoiseReport:
    """Empirical check of support and symmetry.

    ``source`` is a :class:`NoiseSpec` or any object with a ``sample(n)``
    method.  A sample outside ``[-1, 1]`` raises :class:`NoiseSupportError`;
    a mean or skewness beyond five standard errors yields a failing report.
    """
    if isinstance(source, NoiseSpec):
        x = sample_stream(source, n)
    else:
        x = np.asarray(source.sample(n), dtype=float)
    lo, hi = float(np.min(x)), float(np.max(x))
    if not (np.all(np.isfinite(x)) and lo >= -1.0 and hi <= 1.0):
        raise NoiseSupportError(f"samples outside [-1, 1]: min={lo}, max={hi}")
    sd = float(np.std(x))
    return NoiseReport(
        n=n,
        min=lo,
        max=hi,
        mean=float(np.mean(x)),
        skew=float(stats.skew(x)),
        mean_bound=5.0 * sd / math.sqrt(n),
        skew_bound=5.0 * math.sqrt(6.0 / n),
    )


@dataclass(frozen=True)
class DeterministicSequence:
    """A fixed perturbation pattern with values in ``[-1, 1]``.

    ``constant`` repeats one value, ``alternating`` cycles two, ``explicit``
    cycles through a given list.
    """

    kind: str
    pattern: tuple[float, ...] = field(default=())

    def __post_init__(self):
        if self.kind not in ("constant", "alternating", "explicit"):
            raise DomainError(f"unknown sequence kind {self.kind!r}")
        expected = {"constant": 1, "alternating": 2}.get(self.kind)
        if expected is not None and len(self.pattern) != expected:
            raise DomainError(f"{self.kind} sequence needs {expected} value(s)")
        if not self.pattern:
            raise DomainError("empty sequence")
        if any(not (-1.0 <= v <= 1.0) for v in self.pattern):
            raise DomainError("sequence values must lie in [-1, 1]")

    @classmethod
    def constant(cls, v: float) -> DeterministicSequence:
        return cls("constant", (float(v),))

    @classmethod
    def alternating(cls, v1: float, v2: float) -> DeterministicSequence:
        return cls("alternating", (float(v1), float(v2)))

    @classmethod
    def explicit(cls, values: Sequence[float]) -> DeterministicSequence:
        return cls("explicit", tuple(float(v) for v in values))

    def values(self, n: int) -> np.ndarray:
        reps = -(-n // len(self.pattern))
        return np.tile(np.asarray(self.pattern, dtype=float), reps)[:n]
