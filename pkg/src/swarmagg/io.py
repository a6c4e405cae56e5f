"""Delimited-text artifacts written by the runner.

Floats are written with ``repr`` so every value round-trips exactly and
repeated runs produce byte-identical files.
"""

from __future__ import annotations

import csv
from collections import defaultdict

import numpy as np

from .integrator import Trajectory


def _f(x):
    return repr(float(x))


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def write_trajectory_csv(traj: Trajectory, path):
    dim = traj.dim
    with open(path, "w", newline="") as fh:
        out = _writer(fh)
        out.writerow(["t", "agent"] + [f"x{k}" for k in range(dim)])
        for t, frame in zip(traj.times, traj.positions):
            ts = _f(t)
            for i, p in enumerate(frame):
                out.writerow([ts, i] + [_f(v) for v in p])


def read_trajectory_csv(path) -> Trajectory:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[:2] != ["t", "agent"]:
            raise ValueError(f"{path}: unexpected header {header!r}")
        frames = defaultdict(dict)
        times = []
        for row in reader:
            t = float(row[0])
            if not times or times[-1] != t:
                times.append(t)
            frames[t][int(row[1])] = [float(v) for v in row[2:]]
    positions = np.array([[frames[t][i] for i in sorted(frames[t])] for t in times])
    return Trajectory(times=np.array(times), positions=positions)


def write_center_csv(traj: Trajectory, path):
    with open(path, "w", newline="") as fh:
        out = _writer(fh)
        out.writerow(["t"] + [f"x{k}" for k in range(traj.dim)])
        for t, c in zip(traj.times, traj.center):
            out.writerow([_f(t)] + [_f(v) for v in c])


def write_series_csv(traj: Trajectory, rho_sq, path):
    with open(path, "w", newline="") as fh:
        out = _writer(fh)
        out.writerow(["t", "V", "dispersion", "rho_sq"])
        r = _f(rho_sq)
        for t, V, d in zip(traj.times, traj.V, traj.dispersion):
            out.writerow([_f(t), _f(V), _f(d), r])


def read_csv_columns(path):
    """Numeric CSV file as a dict of column name -> array."""
    data = np.genfromtxt(path, delimiter=",", names=True, dtype=float)
    data = np.atleast_1d(data)
    return {name: np.asarray(data[name]) for name in data.dtype.names}


def write_key_values(rows, path):
    with open(path, "w", newline="") as fh:
        out = _writer(fh)
        out.writerow(["key", "value"])
        for key, value in rows:
            out.writerow([key, _f(value) if isinstance(value, float) else value])


def write_table(rows, columns, fh):
    out = _writer(fh)
    out.writerow(columns)
    for row in rows:
        out.writerow([_cell(row.get(c)) for c in columns])


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return value
