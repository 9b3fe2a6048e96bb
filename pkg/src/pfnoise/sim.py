"""Iteration of the uncontrolled, controlled and perturbed recurrences.

Regimes (``chi`` is a noise draw in ``[-1, 1]``, ``s`` a fixed sequence):

=============  =============================================
``Plain``      ``x' = f(x)``
``PF``         ``x' = f(nu x)``
``MultNoise``  ``x' = f((nu + ell chi) x)``
``AddNoise``   ``x' = max(f(nu x) + ell chi, 0)``
``DetMult``    ``x' = f(nu_n x)``, ``nu_n = mid + half * s_n``
``DetAdd``     ``x' = max(f(nu x) + d s_n, 0)``
=============  =============================================

Ensembles are advanced as rows of one array; each row owns its noise stream,
so row ``k`` is bitwise identical to ``run(config, run_index=k)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from . import analysis
from .errors import BoundViolationError, DomainError, SimulationFault
from .maps import GrowthMap
from .noise import DeterministicSequence, NoiseSpec, sample_stream

DIVERGENCE_LIMIT = 1e12


@dataclass(frozen=True)
class Plain:
    pass


@dataclass(frozen=True)
class PF:
    nu: float


@dataclass(frozen=True)
class MultNoise:
    nu: float
    ell: float
    noise: NoiseSpec = field(default_factory=NoiseSpec)


@dataclass(frozen=True)
class AddNoise:
    nu: float
    ell: float
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    d: float | None = None


@dataclass(frozen=True)
class DetMult:
    """Deterministic gains swept across ``[mu_lo, mu_hi]`` by ``sequence``."""

    mu_lo: float
    mu_hi: float
    sequence: DeterministicSequence

    def gains(self, n: int) -> np.ndarray:
        mid = 0.5 * (self.mu_lo + self.mu_hi)
        half = 0.5 * (self.mu_hi - self.mu_lo)
        return mid + half * self.sequence.values(n)


@dataclass(frozen=True)
class DetAdd:
    nu: float
    d: float
    sequence: DeterministicSequence

    def shifts(self, n: int) -> np.ndarray:
        return self.d * self.sequence.values(n)


Regime = Union[Plain, PF, MultNoise, AddNoise, DetMult, DetAdd]
_MULTIPLICATIVE = (MultNoise, DetMult)


@dataclass(frozen=True)
class SimConfig:
    map: GrowthMap
    regime: Regime
    x0: float
    steps: int
    run_count: int = 1
    # Negative-control experiments (gains outside the admissible range) switch this off.
    check_design: bool = True

    def validate(self) -> dict:
        """Raise on an inadmissible configuration; returns the bounds it checked."""
        info: dict = {}
        if not (math.isfinite(self.x0) and self.x0 > 0.0):
            raise DomainError(f"x0 must be positive, got {self.x0}")
        if self.steps < 1 or self.run_count < 1:
            raise DomainError("steps and run_count must be at least 1")
        r = self.regime
        if isinstance(r, (MultNoise, AddNoise)) and r.ell < 0.0:
            raise BoundViolationError("noise level must be nonnegative")
        if isinstance(r, MultNoise) and r.ell >= r.nu:
            raise BoundViolationError(f"ell = {r.ell} must be below nu = {r.nu}")
        if not self.check_design:
            return info
        m = self.map
        if isinstance(r, MultNoise):
            prof = analysis.phi_profile(m)
            ell_max = min(prof.phi_at_b - r.nu, r.nu - prof.phi_at_zero)
            info["ell_max"] = ell_max
            if r.ell >= ell_max:
                raise BoundViolationError(f"ell = {r.ell} must be below ell_max = {ell_max}")
        elif isinstance(r, AddNoise):
            d_max = analysis.additive_d_max(m, r.nu)[0]
            d = r.ell if r.d is None else r.d
            info.update(d_max=d_max, d=d)
            if not (r.ell <= d < d_max):
                raise BoundViolationError(
                    f"need ell <= d < d_max, got ell = {r.ell}, d = {d}, d_max = {d_max}"
                )
        elif isinstance(r, DetMult):
            analysis.perturbation_band(m, r.mu_lo, r.mu_hi)
        elif isinstance(r, DetAdd):
            d_max = analysis.additive_d_max(m, r.nu)[0]
            info["d_max"] = d_max
            if not (0.0 < r.d < d_max):
                raise BoundViolationError(f"need 0 < d < d_max = {d_max}, got {r.d}")
        return info


@dataclass
class Trajectory:
    """States ``x_0 .. x_steps``.

    ``scaled[n]`` is the argument actually passed to ``f`` at step ``n`` in
    multiplicative regimes and ``chi[n]`` the draw used at step ``n``.  A
    faulted run keeps only the states computed before ``fault_step``.
    """

    x: np.ndarray
    scaled: np.ndarray | None = None
    chi: np.ndarray | None = None
    seed: int | None = None
    run_index: int = 0
    fault: str | None = None
    fault_step: int | None = None

    @property
    def steps(self) -> int:
        return len(self.x) - 1


@dataclass(frozen=True)
class RunSummary:
    run_index: int
    tail_min: float
    tail_max: float
    fault: str | None = None
    first_entry: int | None = None
    stayed: bool | None = None


@dataclass
class EnsembleResult:
    runs: list[Trajectory]
    summaries: list[RunSummary]
    interval: tuple[float, float] | None = None

    @property
    def run_count(self) -> int:
        return len(self.runs)

    @property
    def fault_count(self) -> int:
        return sum(s.fault is not None for s in self.summaries)

    @property
    def entered_count(self) -> int:
        return sum(s.first_entry is not None for s in self.summaries)

    @property
    def stayed_count(self) -> int:
        return sum(bool(s.stayed) for s in self.summaries)


def step_mult(m: GrowthMap, nu: float, ell: float, chi: float, x: float) -> float:
    """One step of ``x' = f((nu + ell chi) x)``."""
    factor = nu + ell * chi
    if not factor > 0.0:
        raise SimulationFault(f"nonpositive gain {factor}", 0)
    y = float(m(factor * x))
    if not math.isfinite(y):
        raise SimulationFault("non-finite state", 0)
    return y


def step_add(m: GrowthMap, nu: float, ell: float, chi: float, x: float) -> float:
    """One step of ``x' = max(f(nu x) + ell chi, 0)``."""
    y = max(float(m(nu * x)) + ell * chi, 0.0)
    if not math.isfinite(y):
        raise SimulationFault("non-finite state", 0)
    return y


def _noise_matrix(regime: Regime, steps: int, run_indices: range) -> np.ndarray | None:
    if isinstance(regime, (MultNoise, AddNoise)):
        return np.vstack([sample_stream(regime.noise, steps, k) for k in run_indices])
    return None


def _iterate(m: GrowthMap, regime: Regime, x0: float, steps: int, rows: int, chi):
    X = np.empty((rows, steps + 1))
    X[:, 0] = x0
    scaled = np.empty((rows, steps)) if isinstance(regime, _MULTIPLICATIVE) else None
    fault_step = np.full(rows, -1)
    fault_msg: list[str | None] = [None] * rows
    alive = np.ones(rows, dtype=bool)
    if isinstance(regime, DetMult):
        gains = regime.gains(steps)
    elif isinstance(regime, DetAdd):
        shifts = regime.shifts(steps)

    x = X[:, 0].copy()
    with np.errstate(all="ignore"):
        for n in range(steps):
            bad_gain = None
            if isinstance(regime, Plain):
                xn = m(x)
            elif isinstance(regime, PF):
                xn = m(regime.nu * x)
            elif isinstance(regime, MultNoise):
                factor = regime.nu + regime.ell * chi[:, n]
                s = factor * x
                scaled[:, n] = s
                bad_gain = factor <= 0.0
                xn = m(s)
            elif isinstance(regime, AddNoise):
                xn = np.maximum(m(regime.nu * x) + regime.ell * chi[:, n], 0.0)
            elif isinstance(regime, DetMult):
                s = gains[n] * x
                scaled[:, n] = s
                xn = m(s)
            elif isinstance(regime, DetAdd):
                xn = np.maximum(m(regime.nu * x) + shifts[n], 0.0)
            else:
                raise TypeError(f"unknown regime {regime!r}")
            xn = np.asarray(xn, dtype=float)
            bad = ~np.isfinite(xn) | (xn > DIVERGENCE_LIMIT)
            if bad_gain is not None:
                bad |= bad_gain
            newly = bad & alive
            if newly.any():
                for r in np.flatnonzero(newly):
                    fault_step[r] = n + 1
                    fault_msg[r] = (
                        "nonpositive multiplicative gain"
                        if bad_gain is not None and bad_gain[r]
                        else "divergent or non-finite state"
                    )
                alive &= ~bad
            X[:, n + 1] = xn
            x = xn
    return X, scaled, fault_step, fault_msg


def _trajectories(config: SimConfig, run_indices: range) -> list[Trajectory]:
    regime = config.regime
    chi = _noise_matrix(regime, config.steps, run_indices)
    X, scaled, fault_step, fault_msg = _iterate(
        config.map, regime, float(config.x0), config.steps, len(run_indices), chi
    )
    seed = regime.noise.seed if isinstance(regime, (MultNoise, AddNoise)) else None
    out = []
    for row, k in enumerate(run_indices):
        end = config.steps + 1 if fault_step[row] < 0 else int(fault_step[row])
        out.append(
            Trajectory(
                x=X[row, :end].copy(),
                scaled=None if scaled is None else scaled[row, : min(end, config.steps)].copy(),
                chi=None if chi is None else chi[row, : min(end, config.steps)].copy(),
                seed=seed,
                run_index=k,
                fault=fault_msg[row],
                fault_step=None if fault_step[row] < 0 else int(fault_step[row]),
            )
        )
    return out


def run(config: SimConfig, run_index: int = 0) -> Trajectory:
    """Single trajectory; raises :class:`SimulationFault` carrying the partial orbit."""
    config.validate()
    traj = _trajectories(config, range(run_index, run_index + 1))[0]
    if traj.fault is not None:
        raise SimulationFault(traj.fault, traj.fault_step, partial=traj)
    return traj


def run_ensemble(
    config: SimConfig, interval: tuple[float, float] | None = None, use_scaled: bool = False
) -> EnsembleResult:
    """``config.run_count`` runs with per-run noise streams.

    Faulted runs are recorded, not raised.  When ``interval`` is given each
    summary also carries the first entry step and whether the run stayed.
    """
    from .stats import entry_and_violations, tail_window

    config.validate()
    runs = _trajectories(config, range(config.run_count))
    summaries = []
    for t in runs:
        tail = tail_window(t.x) if len(t.x) >= 2 else t.x
        first, stayed = None, None
        if interval is not None:
            series = t.scaled if use_scaled else t.x
            first, viol = entry_and_violations(series, *interval)
            stayed = first is not None and viol == 0
        summaries.append(
            RunSummary(
                run_index=t.run_index,
                tail_min=float(np.min(tail)),
                tail_max=float(np.max(tail)),
                fault=t.fault,
                first_entry=first,
                stayed=stayed,
            )
        )
    return EnsembleResult(runs, summaries, interval)
