"""CSV/JSON writers for trajectories and ensembles."""
from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".12g")


def atomic_write(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def table_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) if isinstance(v, (int, float, np.number)) and not isinstance(v, bool)
                    else v for v in row])
    return buf.getvalue()


def trajectory_csv(traj) -> str:
    rows = ([t, *c] for t, c in zip(traj.times, traj.counts.tolist()))
    return table_csv(["time", *traj.species], rows)


def ensemble_summary_csv(ensemble) -> str:
    from ..analysis import ensemble_stats
    mean, std = ensemble_stats(ensemble)
    header = ["time"]
    for s in ensemble.species:
        header += [f"{s}_mean", f"{s}_std"]
    rows = []
    for i, t in enumerate(ensemble.times):
        row = [float(t)]
        for j in range(len(ensemble.species)):
            row += [float(mean[i, j]), float(std[i, j])]
        rows.append(row)
    return table_csv(header, rows)


def to_json(obj) -> str:
    def default(o):
        if isinstance(o, np.integer):
            return int(o)
        if isinstance(o, np.floating):
            return float(o)
        if isinstance(o, np.ndarray):
            return o.tolist()
        raise TypeError(type(o).__name__)
    return json.dumps(obj, indent=2, sort_keys=True, default=default) + "\n"


def write_trajectory(traj, path) -> Path:
    return atomic_write(path, trajectory_csv(traj))


def write_ensemble_summary(ensemble, path) -> Path:
    return atomic_write(path, ensemble_summary_csv(ensemble))


def write_json(obj, path) -> Path:
    return atomic_write(path, to_json(obj))
