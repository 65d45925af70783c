"""Plot-ready time-series CSV.

Header: ``t,X,V,Tnorm,E,xc_1..xc_d,vc_1..vc_d,Tinf,L,minT,maxT``; every value
in 17-significant-digit scientific notation, so a read returns the exact
doubles that were written.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..errors import ConfigError
from ..integrator import Trajectory


def header(dim: int) -> list:
    return (["t", "X", "V", "Tnorm", "E"]
            + [f"xc_{i}" for i in range(1, dim + 1)]
            + [f"vc_{i}" for i in range(1, dim + 1)]
            + ["Tinf", "L", "minT", "maxT"])


def _row(t, r) -> list:
    return [t, r.X, r.V, r.Tnorm, r.energy, *r.x_c, *r.v_c, r.T_inf, r.lyapunov, r.minT, r.maxT]


def write_timeseries(traj: Trajectory, path) -> None:
    dim = len(traj.records[0].x_c)
    with open(path, "w") as fh:
        fh.write(",".join(header(dim)) + "\n")
        for t, r in zip(traj.times, traj.records):
            fh.write(",".join(format(float(v), ".16e") for v in _row(t, r)) + "\n")


def read_timeseries(path) -> dict:
    """Return ``{column name: array}`` from a file written by :func:`write_timeseries`."""
    path = Path(path)
    with open(path) as fh:
        first = fh.readline().strip()
    names = first.split(",")
    dim = (len(names) - 9) // 2
    if dim < 1 or names != header(dim):
        raise ConfigError(f"{path}: unrecognised time-series header")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != len(names):
        raise ConfigError(f"{path}: expected {len(names)} columns, got {data.shape[1]}")
    return {name: data[:, i] for i, name in enumerate(names)}
