"""CSV and JSON output shared by the command line and the demos.

CSV files carry a header row and write every float with 17 significant
digits so that reading them back reproduces the doubles bit for bit.
"""
from __future__ import annotations

import json
import math
from importlib import metadata
from pathlib import Path

import numpy as np

CODE_NAME = "fraclimits"


def code_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def write_csv(path, columns: dict):
    """Write equal-length columns ``{name: sequence}`` with a header row."""
    names = list(columns)
    cols = [np.asarray(columns[n]) for n in names]
    lengths = {c.shape[0] for c in cols}
    if len(lengths) > 1:
        raise ValueError(f"columns have different lengths: {sorted(lengths)}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        fh.write(",".join(names) + "\n")
        for row in zip(*cols):
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    return path


def read_csv(path) -> dict:
    """Read a file written by :func:`write_csv`; numeric columns become float
    arrays and any other column stays an array of strings."""
    with open(path) as fh:
        names = fh.readline().strip().split(",")
        rows = [line.rstrip("\n").split(",") for line in fh if line.strip()]
    text = np.array(rows, dtype=str).reshape(len(rows), len(names))
    out = {}
    for i, n in enumerate(names):
        try:
            out[n] = text[:, i].astype(float)
        except ValueError:
            out[n] = text[:, i]
    return out


def to_jsonable(obj):
    """Convert numpy scalars/arrays and non-finite floats for ``json``."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if hasattr(obj, "__dict__") and not isinstance(obj, type):
        return to_jsonable(vars(obj))
    return obj


def write_json(path, obj):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(to_jsonable(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def trajectory_columns(trajectory, column="n") -> dict:
    """Long-format table ``t, x, <column>, I`` over all snapshots."""
    fields = [trajectory.initial] + list(trajectory.fields)
    mass_at = dict(zip(trajectory.mass_times, trajectory.mass_values))
    t, x, v, mass = [], [], [], []
    for f in fields:
        m = f.grid.x.size
        t.append(np.full(m, f.time))
        x.append(f.grid.x)
        v.append(f.values)
        mass.append(np.full(m, mass_at.get(float(f.time), np.nan)))
    cols = {"t": np.concatenate(t), "x": np.concatenate(x), column: np.concatenate(v)}
    if trajectory.mass_times:
        cols["I"] = np.concatenate(mass)
    return cols


def run_metadata(verb, config=None, extra=None) -> dict:
    """Self-describing record: command, resolved config and code version."""
    meta = {"code": CODE_NAME, "version": code_version(), "verb": verb}
    if config is not None:
        meta["config"] = config.to_dict()
        meta["config_ini"] = config.to_ini()
    if extra:
        meta.update(extra)
    return meta
