"""Acceptance criteria, one test each.

Every test prints a single ``[PASS]`` / ``[FAIL]`` line (visible even without
``-s``) and then asserts.  Runtime limits are part of each criterion.

    pytest tests/test_acceptance.py -v
"""
from __future__ import annotations

import os
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from pfnoise import analysis, maps, stats
from pfnoise.errors import PFNoiseError
from pfnoise.noise import DeterministicSequence, NoiseSpec
from pfnoise.sim import AddNoise, DetAdd, DetMult, MultNoise, SimConfig, run, run_ensemble

pytestmark = pytest.mark.acceptance

BH = maps.bh_example()
QUAIL = maps.quail_example()


@pytest.fixture
def verdict(capsys):
    def emit(label: str, ok: bool, detail: str, seconds: float, limit: float | None):
        timing = f"{seconds:.2f}s" + (f" (limit {limit:g}s)" if limit else "")
        full_ok = ok and (limit is None or seconds < limit)
        with capsys.disabled():
            print(f"\n[{'PASS' if full_ok else 'FAIL'}] {label}: {detail}; {timing}")
        assert ok, detail
        if limit is not None:
            assert seconds < limit, f"took {seconds:.2f}s, limit {limit}s"

    return emit


def test_c1_bh_constants(verdict):
    t0 = time.perf_counter()
    m = maps.bh_example()
    prof = analysis.phi_profile(m)
    dt = time.perf_counter() - t0
    errs = {
        "b": abs(m.b - 2 ** (-2 / 5)),
        "f(b)": abs(m.f_b - 1.5157),
        "phi(0)": abs(prof.phi_at_zero - 0.4),
        "phi(b)": abs(prof.phi_at_b - 0.5),
    }
    tol = {"b": 1e-9, "f(b)": 1e-4, "phi(0)": 1e-9, "phi(b)": 1e-9}
    ok = all(errs[k] <= tol[k] for k in errs)
    detail = ", ".join(f"|{k} err|={errs[k]:.2e}<={tol[k]:g}" for k in errs)
    verdict("C1 map constants", ok, detail, dt, 1.0)


C2_TABLE = [
    ("bh", 1.5, 0.4685),
    ("bh", 1.125, 0.415033),
    ("bh", 1.1, 0.40721),
    ("quail", 2.5, 0.253555),
    ("quail", 2.877, 0.282),
]


def test_c2_design_table(verdict):
    t0 = time.perf_counter()
    lines, ok = [], True
    for name, xstar, expected in C2_TABLE:
        m = BH if name == "bh" else QUAIL
        try:
            nu = analysis.design_nu(m, xstar).nu
            err = abs(nu - expected)
            good = err <= 5e-4
            lines.append(f"{name} nu({xstar})={nu:.6f} vs {expected} err={err:.1e} {'ok' if good else 'MISS'}")
        except PFNoiseError as exc:
            good = False
            lines.append(f"{name} nu({xstar}) not computable ({type(exc).__name__}) MISS")
        ok &= good
    dt = time.perf_counter() - t0
    verdict("C2 gain table, tol 5e-4", ok, "; ".join(lines), dt, 1.0)


def test_c3_multiplicative_containment(verdict):
    t0 = time.perf_counter()
    nu, ell = 0.4685, 0.01
    interval = analysis.mult_interval(BH, nu, ell, 1e-6)
    cfg = SimConfig(BH, MultNoise(nu, ell, NoiseSpec(seed=0)), 0.5, 5000, run_count=100)
    rep = stats.containment(run_ensemble(cfg), interval)
    dt = time.perf_counter() - t0
    entered = [f for f in rep.first_entry if f is not None]
    latest = max(entered) if len(entered) == rep.run_count else None
    violations = sum(rep.post_entry_violations)
    ok = latest is not None and latest <= 500 and violations == 0 and rep.empirical_gamma == 1.0
    detail = (f"interval=({interval[0]:.6f}, {interval[1]:.6f}), latest entry={latest} (<=500), "
              f"post-entry violations={violations}, gamma={rep.empirical_gamma}")
    verdict("C3 multiplicative containment, 100x5000", ok, detail, dt, 10.0)


def test_c4_shrinkage(verdict):
    t0 = time.perf_counter()
    ells = [0.025, 0.01, 0.005, 0.001]
    curve = stats.shrinkage_sweep(BH, 1.5, ells, x0=0.5, steps=5000, runs=20, noise=NoiseSpec(seed=0))
    dt = time.perf_counter() - t0
    by_ell = sorted(curve.entries, key=lambda e: -e.ell)
    widths = [e.width for e in by_ell]
    devs = [e.tail_dev for e in by_ell]
    widths_ok = all(b < a for a, b in zip(widths, widths[1:]))
    devs_ok = all(b <= 1.1 * a for a, b in zip(devs, devs[1:]))
    small_ok = devs[-1] < 0.02
    ok = widths_ok and devs_ok and small_ok and not any(e.skipped for e in by_ell)
    detail = (f"widths={[round(w, 5) for w in widths]} strictly decreasing={widths_ok}, "
              f"tail devs={[round(d, 5) for d in devs]} nonincreasing(10%)={devs_ok}, "
              f"smallest-ell dev<0.02={small_ok}")
    verdict("C4 shrinkage with noise level", ok, detail, dt, 30.0)


def test_c5_additive_containment(verdict):
    t0 = time.perf_counter()
    nu = 0.4685
    d_max = analysis.additive_d_max(BH, nu)[0]
    d = 0.5 * d_max
    ell = min(d, 0.01)
    add = analysis.additive_design(BH, nu, d, epsilon=1e-3)
    cfg = SimConfig(BH, AddNoise(nu, ell, NoiseSpec(seed=0), d=d), 0.5, 5000, run_count=200)
    rep = stats.containment(run_ensemble(cfg), add.interval)
    dt = time.perf_counter() - t0
    ok = rep.gamma_low >= 0.95
    detail = (f"d={d:.6f}, ell={ell}, interval=[{add.y1:.6f}, {add.y2 + 1e-3:.6f}], N_used={rep.n_used}, "
              f"gamma={rep.empirical_gamma}, Wilson low={rep.gamma_low:.4f} (>=0.95)")
    verdict("C5 additive containment, 200x5000", ok, detail, dt, 20.0)


def test_c6_negative_controls(verdict):
    t0 = time.perf_counter()
    ell = 0.015
    low = run_ensemble(SimConfig(BH, MultNoise(0.39, ell, NoiseSpec(seed=0)), 0.5, 5000, 100, check_design=False))
    high = run_ensemble(SimConfig(BH, MultNoise(0.75, ell, NoiseSpec(seed=0)), 0.5, 5000, 100, check_design=False))
    dt = time.perf_counter() - t0
    worst_low = max(s.tail_max for s in low.summaries)
    narrow_high = min(s.tail_max - s.tail_min for s in high.summaries)
    faults = low.fault_count + high.fault_count
    ok = worst_low < 1e-3 and narrow_high > 0.5 and faults == 0
    detail = (f"nu=0.39 worst tail max={worst_low:.3e} (<1e-3); "
              f"nu=0.75 narrowest tail range={narrow_high:.4f} (>0.5); faults={faults}")
    verdict("C6 negative controls, 2x100x5000", ok, detail, dt, 10.0)


def _round_trip_errors() -> dict[str, float]:
    out = {}
    for m in (BH, QUAIL, maps.ricker(3.0)):
        prof = analysis.phi_profile(m)
        ys = np.linspace(m.f_at_zero, m.f_b, 1002)[1:-1]
        out[f"{m.label} f(f^-1)"] = max(abs(m(analysis.invert_f(m, y)) - y) for y in ys)
        mus = np.linspace(prof.phi_at_zero, prof.phi_at_b, 1002)[1:-1]
        out[f"{m.label} phi(phi^-1)"] = max(abs(analysis.eval_phi(m, analysis.invert_phi(m, mu)) - mu) for mu in mus)
    return out


def _random_triples(count: int, seed: int):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        pick = int(rng.integers(4))
        if pick == 0:
            m = BH
        elif pick == 1:
            m = QUAIL
        elif pick == 2:
            m = maps.ricker(float(rng.uniform(2.0, 3.5)))
        else:
            m = maps.maynard_smith(float(rng.uniform(2.0, 4.0)), 1.0, float(rng.uniform(3.0, 8.0)))
        xstar = m.f_at_zero + float(rng.uniform(0.05, 0.98)) * (m.f_b - m.f_at_zero)
        nu = analysis.design_nu(m, xstar).nu
        d = float(rng.uniform(0.05, 0.95)) * analysis.additive_d_max(m, nu)[0]
        yield m, xstar, nu, d


def _landmark_check():
    worst, order_failures = 0.0, 0
    for m, xstar, nu, d in _random_triples(50, 20261016):
        y1, y2, y3 = analysis.additive_y_points(m, nu, d)
        worst = max(worst, abs(m(nu * y1) - d - y1), abs(m(nu * y2) + d - y2))
        if not (y1 < xstar < y2 < m.b / nu < y3):
            order_failures += 1
    return worst, order_failures


def _stays_after_entry(series, lo, hi, slack):
    inside = (series >= lo - slack) & (series <= hi + slack)
    hits = np.flatnonzero(inside)
    return hits.size > 0 and bool(np.all(inside[hits[0]:]))


def _absorption_check(steps: int = 10_000, slack: float = 1e-10):
    failures = []
    mu_lo, mu_hi = 0.42, 0.49
    band = analysis.perturbation_band(BH, mu_lo, mu_hi, epsilon=1e-9)
    for pattern in ((-1.0, 1.0), (1.0, -1.0)):
        for x0 in (0.05, 0.5, 1.5, 3.0):
            t = run(SimConfig(BH, DetMult(mu_lo, mu_hi, DeterministicSequence.alternating(*pattern)), x0, steps))
            if not _stays_after_entry(t.scaled, *band.interval, slack):
                failures.append(f"DetMult{pattern} x0={x0}")

    nu = 0.4685
    add = analysis.additive_design(BH, nu, epsilon=1e-3)
    seqs = {
        "alternating": DeterministicSequence.alternating(1.0, -1.0),
        "alternating-": DeterministicSequence.alternating(-1.0, 1.0),
        "+d": DeterministicSequence.constant(1.0),
        "-d": DeterministicSequence.constant(-1.0),
    }
    # the deterministic additive invariant is stated for starts inside [y1, y3]
    top = add.y3 if np.isfinite(add.y3) else 10.0 * add.c
    starts = (add.y1, 0.5 * (add.y1 + add.xstar), add.xstar, add.y2, 0.5 * (add.y2 + top), top)
    for name, seq in seqs.items():
        for x0 in starts:
            t = run(SimConfig(BH, DetAdd(nu, add.d, seq), x0, steps))
            absorbing = _stays_after_entry(t.x, add.y1, add.y3, slack)
            eventual = _stays_after_entry(t.x, *add.interval, slack)
            if not (absorbing and eventual):
                failures.append(f"DetAdd{name} x0={x0:.4f}")
    return failures


def test_c7_oracle_and_property_suites(verdict):
    t0 = time.perf_counter()
    trips = _round_trip_errors()
    worst_trip = max(trips.values())
    ident, order_failures = _landmark_check()
    absorb = _absorption_check()
    dt = time.perf_counter() - t0
    ok = worst_trip <= 1e-9 and ident <= 1e-9 and order_failures == 0 and not absorb
    detail = (f"worst round-trip={worst_trip:.1e} (<=1e-9), landmark identity={ident:.1e} (<=1e-9), "
              f"ordering failures={order_failures}/50, absorption failures={absorb or 0}")
    verdict("C7 oracle and property suites", ok, detail, dt, None)


def _cli_ensemble(out: Path, preset: str, seed: int):
    env = dict(os.environ, PYTHONHASHSEED=str(seed + 1))
    env.pop("PFNOISE_OUT", None)
    subprocess.run(
        [sys.executable, "-m", "pfnoise.cli", "ensemble", "--preset", preset, "--seed", "12345",
         "--out", str(out)],
        check=False, capture_output=True, env=env,
    )


def test_c8_determinism(verdict, tmp_path):
    t0 = time.perf_counter()
    mismatched, compared = [], 0
    for preset in ("fig2-upper-left", "fig3-upper-right", "fig4-left"):
        a, b = tmp_path / preset / "a", tmp_path / preset / "b"
        _cli_ensemble(a, preset, 0)
        _cli_ensemble(b, preset, 1)
        csvs = sorted(p.name for p in a.glob("*.csv"))
        if not csvs or csvs != sorted(p.name for p in b.glob("*.csv")):
            mismatched.append(f"{preset}: file sets differ")
            continue
        for name in csvs:
            compared += 1
            if (a / name).read_bytes() != (b / name).read_bytes():
                mismatched.append(f"{preset}/{name}")
    dt = time.perf_counter() - t0
    ok = compared > 0 and not mismatched
    verdict("C8 byte-identical reruns", ok, f"{compared} CSV files compared, mismatches={mismatched or 0}", dt, None)
