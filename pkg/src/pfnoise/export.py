"""CSV / JSON / gnuplot writers.

Floats are written with ``repr`` (shortest round-trip form), so a rerun with the
same seed reproduces files byte for byte.
"""
from __future__ import annotations

import json
import math
from collections.abc import Sequence
from pathlib import Path

import numpy as np

from .sim import Trajectory
from .stats import ShrinkageCurve


def fmt(v) -> str:
    if v is None:
        return ""
    v = float(v)
    if math.isnan(v):
        return "NaN"
    return repr(v)


def jsonable(obj):
    """Recursively convert numpy scalars, tuples and non-finite floats for JSON."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return "nan"
        return v
    return obj


def write_json(path: Path, obj) -> Path:
    path = Path(path)
    path.write_text(json.dumps(jsonable(obj), indent=2) + "\n")
    return path


def _trajectory_rows(t: Trajectory):
    for n, x in enumerate(t.x):
        s = t.scaled[n] if t.scaled is not None and n < len(t.scaled) else None
        c = t.chi[n] if t.chi is not None and n < len(t.chi) else None
        yield n, x, s, c


def write_trajectory_csv(path: Path, t: Trajectory) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write("step,x,scaled_x,chi\n")
        for n, x, s, c in _trajectory_rows(t):
            fh.write(f"{n},{fmt(x)},{fmt(s)},{fmt(c)}\n")
    return path


def write_trajectory_json(path: Path, t: Trajectory) -> Path:
    return write_json(
        path,
        {
            "run": t.run_index,
            "seed": t.seed,
            "fault": t.fault,
            "fault_step": t.fault_step,
            "x": t.x,
            "scaled_x": t.scaled,
            "chi": t.chi,
        },
    )


def write_ensemble_csv(path: Path, runs: Sequence[Trajectory]) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write("run,step,x,scaled_x,chi\n")
        for t in runs:
            for n, x, s, c in _trajectory_rows(t):
                fh.write(f"{t.run_index},{n},{fmt(x)},{fmt(s)},{fmt(c)}\n")
    return path


def write_gnuplot(path: Path, runs: Sequence[Trajectory]) -> Path:
    """Whitespace table ``step x_run0 x_run1 ...``; missing values are NaN."""
    path = Path(path)
    length = max(len(t.x) for t in runs)
    with path.open("w") as fh:
        fh.write("# step " + " ".join(f"run{t.run_index}" for t in runs) + "\n")
        for n in range(length):
            cols = [fmt(t.x[n]) if n < len(t.x) else "NaN" for t in runs]
            fh.write(f"{n} " + " ".join(cols) + "\n")
    return path


def write_sweep_csv(path: Path, curve: ShrinkageCurve) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write("ell,width,tail_dev,gamma_low\n")
        for row in curve.rows():
            fh.write(",".join(fmt(v) for v in row) + "\n")
    return path


def write_sweep_gnuplot(path: Path, curve: ShrinkageCurve) -> Path:
    path = Path(path)
    with path.open("w") as fh:
        fh.write("# ell width tail_dev gamma_low\n")
        for row in curve.rows():
            fh.write(" ".join(fmt(v) for v in row) + "\n")
    return path
