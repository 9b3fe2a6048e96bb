"""Command-line front end.

    pfnoise analyze  --preset bh-1.5
    pfnoise verify   --preset quail-2.5
    pfnoise simulate --preset bh-pf --out run1
    pfnoise ensemble --preset fig2-upper-left --runs 5 --seed 7
    pfnoise sweep    --preset sweep-bh

Exit codes: 0 ok, 1 validation or certificate failure, 2 runtime fault.
A JSON report is written to the output directory in every case.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import analysis, export
from .config import ConfigError, Experiment, output_dir, preset_names, resolve
from .errors import (
    AnalysisError,
    BoundViolationError,
    DesignError,
    DomainError,
    InvalidMapError,
    RangeError,
    SimulationFault,
)
from .maps import map_from_dict
from .sim import run, run_ensemble
from .stats import containment, shrinkage_sweep, tail_window

log = logging.getLogger("pfnoise")

EXIT_OK, EXIT_INVALID, EXIT_FAULT = 0, 1, 2

_VALIDATION_ERRORS = (
    ConfigError,
    RangeError,
    BoundViolationError,
    InvalidMapError,
    DomainError,
    DesignError,
)


def _overrides(args) -> dict:
    o: dict = {}
    if args.seed is not None:
        o.setdefault("noise", {})["seed"] = args.seed
    if args.runs is not None:
        o["runs"] = args.runs
    if args.steps is not None:
        o["steps"] = args.steps
    if args.format is not None:
        o.setdefault("output", {})["format"] = args.format
    return o


class _CertificateFailed(Exception):
    def __init__(self, cert: dict):
        super().__init__("slope certificate failed")
        self.cert = cert


def _certificate(cfg: dict) -> dict:
    """Check the map before any design step; raises when the certificate fails."""
    cert = analysis.verify_slope_assumption(map_from_dict(cfg["map"]))
    if not cert.overall:
        raise _CertificateFailed(cert.to_dict())
    return cert.to_dict()


def analyze_report(exp: Experiment) -> dict:
    """The design numbers for one configuration (map, gain, both intervals)."""
    m, cfg = exp.map, exp.cfg
    prof = analysis.phi_profile(m)
    xstar = exp.xstar
    if xstar is None and exp.nu is not None:
        xstar = analysis.fixed_point(m, exp.nu)
    report = {
        "map": m.to_dict(),
        "b": m.b,
        "f_b": m.f_b,
        "phi0": prof.phi_at_zero,
        "phi_b": prof.phi_at_b,
        "xstar": xstar,
        "nu": None,
        "ell_max": None,
        "mult_interval": None,
        "additive": None,
    }
    if xstar is None:
        return report
    design = analysis.design_nu(m, xstar)
    nu = design.nu
    report["nu"] = nu
    report["f_inv_xstar"] = design.f_inv_xstar
    report["ell_max"] = design.ell_max
    ell = cfg.get("ell", 0.0)
    if ell:
        report["ell"] = ell
        report["delta"] = cfg["delta"]
        report["mult_interval"] = list(analysis.mult_interval(m, nu, ell, cfg["delta"]))
    add = analysis.additive_design(m, nu, cfg.get("d"), cfg["epsilon"])
    report["additive"] = {
        "c": add.c,
        "d_max": add.d_max,
        "g_minus_x_max": add.g_minus_x_max,
        "x_max": add.x_max,
        "d": add.d,
        "y1": add.y1,
        "y2": add.y2,
        "y3": add.y3,
    }
    return report


def cmd_analyze(exp: Experiment, out: Path) -> tuple[int, dict]:
    report = analyze_report(exp)
    report["status"] = "ok"
    return EXIT_OK, report


def _write_runs(out: Path, runs, fmt: str, stem_name: str | None = None) -> list[str]:
    written = []
    for t in runs:
        stem = out / (stem_name or f"run_{t.run_index:03d}")
        if fmt == "json":
            written.append(export.write_trajectory_json(stem.with_suffix(".json"), t).name)
        else:
            written.append(export.write_trajectory_csv(stem.with_suffix(".csv"), t).name)
    return written


def cmd_simulate(exp: Experiment, out: Path) -> tuple[int, dict]:
    sc = exp.sim_config()
    fmt = exp.cfg["output"]["format"]
    code, fault = EXIT_OK, None
    try:
        traj = run(sc)
    except SimulationFault as exc:
        traj, code, fault = exc.partial, EXIT_FAULT, str(exc)
    files = _write_runs(out, [traj], fmt, "trajectory")
    files.append(export.write_gnuplot(out / "trajectory.dat", [traj]).name)
    tail_min, tail_max = (float(np.min(tail_window(traj.x))), float(np.max(tail_window(traj.x))))
    return code, {
        "status": "ok" if code == EXIT_OK else "fault",
        "fault": fault,
        "steps": len(traj.x) - 1,
        "final_x": float(traj.x[-1]),
        "tail_min": tail_min,
        "tail_max": tail_max,
        "files": files,
    }


def cmd_ensemble(exp: Experiment, out: Path) -> tuple[int, dict]:
    sc = exp.sim_config()
    interval = exp.theory_interval()
    ens = run_ensemble(sc, interval)
    fmt = exp.cfg["output"]["format"]
    files = _write_runs(out, ens.runs, fmt)
    files.append(export.write_ensemble_csv(out / "ensemble.csv", ens.runs).name)
    files.append(export.write_gnuplot(out / "ensemble.dat", ens.runs).name)
    report: dict = {
        "status": "ok",
        "run_count": ens.run_count,
        "fault_count": ens.fault_count,
        "faults": {s.run_index: s.fault for s in ens.summaries if s.fault},
        "tail_min": [s.tail_min for s in ens.summaries],
        "tail_max": [s.tail_max for s in ens.summaries],
        "containment": None,
    }
    code = EXIT_OK
    if interval is not None:
        rep = containment(ens, interval)
        report["containment"] = rep.to_dict()
        need = exp.cfg.get("require_gamma")
        if need is not None and rep.gamma_low < need:
            report["status"] = "gamma_below_requirement"
            code = EXIT_INVALID
    if ens.fault_count:
        report["status"] = "fault"
        code = EXIT_FAULT
    files.append("containment.json")
    export.write_json(out / "containment.json", report.get("containment") or {})
    report["files"] = files
    return code, report


def cmd_sweep(exp: Experiment, out: Path) -> tuple[int, dict]:
    cfg = exp.cfg
    if exp.xstar is None:
        raise ConfigError("sweep needs xstar")
    ells = cfg.get("ells") or [cfg["ell"]]
    curve = shrinkage_sweep(
        exp.map,
        exp.xstar,
        ells,
        regime=cfg["regime"],
        x0=cfg["x0"],
        steps=cfg["steps"],
        runs=cfg["runs"],
        noise=exp.noise,
        delta=cfg["delta"],
        epsilon=cfg["epsilon"],
    )
    export.write_sweep_csv(out / "sweep.csv", curve)
    export.write_sweep_gnuplot(out / "sweep.dat", curve)
    entries = [
        {
            "ell": e.ell,
            "width": e.width,
            "tail_dev": e.tail_dev,
            "gamma_low": e.gamma_low,
            "interval": list(e.interval),
            "skipped": e.skipped,
        }
        for e in curve.entries
    ]
    code = EXIT_OK
    need = cfg.get("require_gamma")
    status = "ok"
    if need is not None and any(e.skipped is None and e.gamma_low < need for e in curve.entries):
        code, status = EXIT_INVALID, "gamma_below_requirement"
    return code, {"status": status, "xstar": exp.xstar, "regime": curve.regime, "entries": entries,
                  "files": ["sweep.csv", "sweep.dat"]}


COMMANDS = {
    "analyze": (cmd_analyze, "analysis.json"),
    "verify": (None, "certificate.json"),
    "simulate": (cmd_simulate, "simulate.json"),
    "ensemble": (cmd_ensemble, "ensemble.json"),
    "sweep": (cmd_sweep, "sweep.json"),
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="pfnoise",
        description="Proportional feedback control of population maps under bounded noise.",
    )
    p.add_argument("command", choices=sorted(COMMANDS) + ["presets"])
    p.add_argument("--config", help="JSON experiment config")
    p.add_argument("--preset", help="named preset (see `pfnoise presets`)")
    p.add_argument("--seed", type=int, help="master noise seed (unsigned 64-bit)")
    p.add_argument("--out", help="output directory (overrides $PFNOISE_OUT)")
    p.add_argument("--runs", type=int)
    p.add_argument("--steps", type=int)
    p.add_argument("--format", choices=["csv", "json"])
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if args.command == "presets":
        print("\n".join(preset_names()))
        return EXIT_OK

    func, report_name = COMMANDS[args.command]
    out = None
    try:
        cfg = resolve(args.config, args.preset, _overrides(args))
        out = output_dir(cfg, args.out)
        out.mkdir(parents=True, exist_ok=True)
        cert = None
        if args.command in ("analyze", "verify") or cfg["check_design"]:
            cert = _certificate(cfg)
        if func is None:
            code, report = EXIT_OK, {"status": "ok"}
        else:
            code, report = func(Experiment.from_config(cfg), out)
        report = {"command": args.command, "config": cfg, **report, "certificate": cert}
    except _CertificateFailed as exc:
        code = EXIT_INVALID
        report = {"command": args.command, "status": "certificate_failed", "certificate": exc.cert}
    except RangeError as exc:
        code = EXIT_INVALID
        report = {"command": args.command, "status": "error", "error": str(exc),
                  "admissible": list(exc.admissible) if exc.admissible else None}
    except _VALIDATION_ERRORS as exc:
        code = EXIT_INVALID
        report = {"command": args.command, "status": "error", "error": str(exc)}
    except (SimulationFault, AnalysisError, OSError) as exc:
        code = EXIT_FAULT
        report = {"command": args.command, "status": "fault", "error": str(exc)}

    text = json.dumps(export.jsonable(report), indent=2)
    print(text)
    if out is None:
        out = Path(args.out) if args.out else output_dir({}, None)
    try:
        out.mkdir(parents=True, exist_ok=True)
        (out / report_name).write_text(text + "\n")
    except OSError as exc:
        print(f"pfnoise: cannot write report to {out / report_name}: {exc}", file=sys.stderr)
        return EXIT_FAULT
    if code != EXIT_OK:
        log.warning("%s finished with exit code %d", args.command, code)
    return code


if __name__ == "__main__":
    sys.exit(main())
