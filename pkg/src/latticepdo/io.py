"""CSV reports and grid dumps.

Floats are written with ``repr`` so that identical runs give byte-identical
files.  Nothing time-dependent is written.
"""

from __future__ import annotations

import configparser
import csv
from pathlib import Path

import numpy as np

from .lattice import GridFunction, LatticeGrid, QuadrantConvention, SpectrumFunction


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (complex, np.complexfloating)):
        return f"{float(x.real)!r}{float(x.imag):+}j"
    return str(x)


def write_table(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            if isinstance(row, dict):
                row = [row[k] for k in header]
            w.writerow([_fmt(v) for v in row])
    return path


def read_table(path):
    with Path(path).open(newline="") as fh:
        return list(csv.DictReader(fh))


def write_metadata(path, grid: LatticeGrid, conv="closed", **extra):
    cp = configparser.ConfigParser()
    cp.optionxform = str
    meta = {k: _fmt(v) for k, v in grid.metadata(QuadrantConvention.coerce(conv)).items()}
    meta.update({k: _fmt(v) for k, v in extra.items()})
    cp["grid"] = meta
    path = Path(path)
    with path.open("w") as fh:
        cp.write(fh)
    return path


def dump_grid(path, obj, conv="closed", **extra):
    """Write a grid or spectrum function as ``m1,m2,re,im`` (or ``k1,k2,re,im``) rows.

    A ``.meta`` sidecar records ``h``, ``N`` and the convention.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    grid = obj.grid
    idx = grid.indices
    header = ["k1", "k2", "re", "im"] if isinstance(obj, SpectrumFunction) else ["m1", "m2", "re", "im"]
    vals = obj.values
    rows = (
        (int(a), int(b), float(vals[i, j].real), float(vals[i, j].imag))
        for i, a in enumerate(idx)
        for j, b in enumerate(idx)
    )
    write_table(path, header, rows)
    write_metadata(path.with_suffix(".meta"), grid, conv, kind="frequency" if header[0] == "k1" else "spatial", **extra)
    return path


def load_grid(path):
    """Read a grid dump back; returns a GridFunction or SpectrumFunction."""
    path = Path(path)
    cp = configparser.ConfigParser()
    cp.optionxform = str
    cp.read(path.with_suffix(".meta"))
    meta = cp["grid"]
    grid = LatticeGrid(float(meta["h"]), int(meta["N"]))
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    vals = (data[:, 2] + 1j * data[:, 3]).reshape(grid.size, grid.size)
    cls = SpectrumFunction if meta.get("kind") == "frequency" else GridFunction
    return cls(grid, vals)
