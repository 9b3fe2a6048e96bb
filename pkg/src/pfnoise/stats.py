"""Finite-horizon evidence for eventual containment.

"Eventually inside ``[lo, hi]``" is estimated by the first entry step of each
run and by whether the run ever leaves afterwards.  The ensemble-wide
``N_used`` is the latest first entry; ``empirical_gamma`` is the share of runs
that are inside for every ``n >= N_used``.
"""
from __future__ import annotations

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import binomtest

from . import analysis
from .errors import BoundViolationError, PreconditionError, RangeError
from .maps import GrowthMap
from .noise import NoiseSpec


def tail_window(x: np.ndarray) -> np.ndarray:
    """Final half of a series, used as an assumption-free burn-in."""
    return x[len(x) // 2 :]


def entry_and_violations(series: np.ndarray, lo: float, hi: float) -> tuple[int | None, int]:
    """First index inside ``[lo, hi]`` and the number of later indices outside."""
    inside = (series >= lo) & (series <= hi)
    hits = np.flatnonzero(inside)
    if hits.size == 0:
        return None, 0
    first = int(hits[0])
    return first, int(np.count_nonzero(~inside[first:]))


def wilson_interval(k: int, n: int, confidence: float = 0.95) -> tuple[float, float]:
    ci = binomtest(k, n).proportion_ci(confidence_level=confidence, method="wilson")
    return float(ci.low), float(ci.high)


@dataclass(frozen=True)
class ContainmentReport:
    interval: tuple[float, float]
    first_entry: tuple[int | None, ...]
    post_entry_violations: tuple[int, ...]
    stayed: tuple[bool, ...]
    empirical_gamma: float
    n_used: int | None
    gamma_ci: tuple[float, float]

    @property
    def run_count(self) -> int:
        return len(self.first_entry)

    @property
    def gamma_low(self) -> float:
        return self.gamma_ci[0]

    def to_dict(self) -> dict:
        return {
            "interval": list(self.interval),
            "run_count": self.run_count,
            "first_entry": list(self.first_entry),
            "post_entry_violations": list(self.post_entry_violations),
            "stayed": list(self.stayed),
            "empirical_gamma": self.empirical_gamma,
            "gamma_wilson95": list(self.gamma_ci),
            "N_used": self.n_used,
        }


def _series(traj, use_scaled: bool) -> np.ndarray:
    if isinstance(traj, np.ndarray):
        return traj
    s = traj.scaled if use_scaled else traj.x
    if s is None:
        raise PreconditionError("trajectory has no scaled states")
    return np.asarray(s, dtype=float)


def containment(
    trajs: Iterable, interval: tuple[float, float], use_scaled: bool = False
) -> ContainmentReport:
    """Containment statistics of trajectories (or raw arrays) in ``[lo, hi]``.

    A run that was aborted by a simulation fault never counts as contained.
    """
    lo, hi = map(float, interval)
    if not lo < hi:
        raise PreconditionError(f"need lo < hi, got {interval}")
    runs = list(getattr(trajs, "runs", trajs))
    if not runs:
        raise PreconditionError("no trajectories")
    series = [_series(t, use_scaled) for t in runs]
    faulted = [getattr(t, "fault", None) is not None for t in runs]

    firsts, viols, stayed = [], [], []
    for s in series:
        first, v = entry_and_violations(s, lo, hi)
        firsts.append(first)
        viols.append(v)
        stayed.append(first is not None and v == 0)

    entered = [f for f in firsts if f is not None]
    n_used = max(entered) if entered else None
    good = 0
    if n_used is not None:
        for s, first, bad in zip(series, firsts, faulted):
            if first is None or bad or len(s) <= n_used:
                continue
            tail = s[n_used:]
            if np.all((tail >= lo) & (tail <= hi)):
                good += 1
    n = len(runs)
    return ContainmentReport(
        interval=(lo, hi),
        first_entry=tuple(firsts),
        post_entry_violations=tuple(viols),
        stayed=tuple(stayed),
        empirical_gamma=good / n,
        n_used=n_used,
        gamma_ci=wilson_interval(good, n),
    )


def liminf_limsup_estimates(traj, burn_in: int | None = None) -> tuple[float, float]:
    """Min and max of ``x_n`` after ``burn_in`` (default: the final half)."""
    x = _series(traj, False)
    if burn_in is None:
        burn_in = len(x) // 2
    if len(x) < 2 or len(x) < 2 * burn_in:
        raise PreconditionError(f"trajectory of length {len(x)} too short for burn-in {burn_in}")
    tail = x[burn_in:]
    return float(np.min(tail)), float(np.max(tail))


@dataclass(frozen=True)
class ShrinkageEntry:
    ell: float
    width: float
    tail_dev: float
    gamma_low: float
    interval: tuple[float, float] = (math.nan, math.nan)
    skipped: str | None = None


@dataclass(frozen=True)
class ShrinkageCurve:
    xstar: float
    regime: str
    entries: tuple[ShrinkageEntry, ...] = field(default_factory=tuple)

    def rows(self) -> list[tuple[float, float, float, float]]:
        return [(e.ell, e.width, e.tail_dev, e.gamma_low) for e in self.entries if e.skipped is None]


def shrinkage_sweep(
    m: GrowthMap,
    xstar: float,
    ells: Sequence[float],
    *,
    regime: str = "mult",
    x0: float = 0.5,
    steps: int = 2000,
    runs: int = 20,
    noise: NoiseSpec | None = None,
    delta: float = 1e-6,
    epsilon: float = 1e-3,
) -> ShrinkageCurve:
    """Theoretical interval width and observed tail spread for each noise level.

    ``regime="mult"`` uses the multiplicative containment interval (slack
    ``delta``); ``regime="add"`` uses ``[y1, y2 + epsilon]`` with ``d = ell``.
    Inadmissible levels produce an entry with ``skipped`` set.
    """
    from .sim import AddNoise, MultNoise, SimConfig, run_ensemble

    noise = noise or NoiseSpec()
    design = analysis.design_nu(m, xstar)
    entries = []
    for ell in sorted(float(e) for e in ells):
        try:
            if regime == "mult":
                lo0, hi0 = analysis.mult_interval(m, design.nu, ell, 0.0)
                interval = (lo0 - delta, hi0 + delta)
                reg = MultNoise(design.nu, ell, noise)
            elif regime == "add":
                add = analysis.additive_design(m, design.nu, ell, epsilon)
                lo0, hi0 = add.y1, add.y2
                interval = add.interval
                reg = AddNoise(design.nu, ell, noise, d=ell)
            else:
                raise ValueError(f"unknown regime {regime!r}")
        except (BoundViolationError, RangeError) as exc:
            entries.append(ShrinkageEntry(ell, math.nan, math.nan, math.nan, skipped=str(exc)))
            continue
        ens = run_ensemble(SimConfig(m, reg, x0, steps, runs))
        dev = max(float(np.max(np.abs(tail_window(t.x) - xstar))) for t in ens.runs)
        rep = containment(ens, interval)
        entries.append(ShrinkageEntry(ell, hi0 - lo0, dev, rep.gamma_low, interval))
    return ShrinkageCurve(float(xstar), regime, tuple(entries))
