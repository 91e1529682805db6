"""Snapshot CSV, diagnostics JSON lines and summary JSON.

Floats are written with ``repr``, the shortest decimal that round-trips, so
a snapshot read back reproduces the field bit for bit.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .scheme import GridField
from .thermo import GasConstants

SNAPSHOT_COLUMNS = ("x", "rho", "m", "u", "S", "w", "z")


def _fmt(v) -> str:
    return repr(float(v))


def _json_safe(obj):
    """Plain JSON types; non-finite floats become the strings ``"nan"``/``"inf"``."""
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else repr(f)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(_json_safe(obj), sort_keys=True)


def write_snapshot(path, fld: GridField, k: GasConstants):
    w, z = fld.invariants(k)
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write(f"# t={_fmt(fld.time)},dx={_fmt(fld.dx)},x_left={_fmt(fld.x_left)},"
                 f"boundary={fld.boundary}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SNAPSHOT_COLUMNS)
        cols = (fld.centers, fld.rho, fld.m, fld.aux_u, fld.S, w, z)
        for row in zip(*cols):
            writer.writerow([_fmt(v) for v in row])


def read_snapshot(path) -> GridField:
    path = Path(path)
    with path.open(newline="") as fh:
        meta_line = fh.readline()
        if not meta_line.startswith("#"):
            raise ValueError("snapshot is missing its metadata line")
        meta = dict(item.split("=", 1) for item in meta_line[1:].strip().split(","))
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != SNAPSHOT_COLUMNS:
            raise ValueError(f"unexpected snapshot columns {header}")
        rows = np.array([[float(v) for v in row] for row in reader], dtype=float).reshape(-1, 7)
    return GridField(
        rho=rows[:, 1].copy(),
        m=rows[:, 2].copy(),
        S=rows[:, 4].copy(),
        aux_u=rows[:, 3].copy(),
        dx=float(meta["dx"]),
        x_left=float(meta["x_left"]),
        time=float(meta["t"]),
        boundary=meta["boundary"],
    )


class SnapshotSink:
    """Writes ``snapshot_<step>.csv`` files into a directory."""

    def __init__(self, out_dir, k: GasConstants, prefix: str = "snapshot"):
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.k = k
        self.prefix = prefix
        self.paths: list[Path] = []

    def snapshot(self, step: int, fld: GridField):
        path = self.out_dir / f"{self.prefix}_{step:06d}.csv"
        write_snapshot(path, fld, self.k)
        self.paths.append(path)


class JsonLinesSink:
    """Appends one JSON record per line, flushed as it goes."""

    def __init__(self, path):
        self.path = Path(path)
        self._fh = self.path.open("w")

    def record(self, rec: dict):
        self._fh.write(dumps(rec) + "\n")
        self._fh.flush()

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def write_json(path, obj):
    Path(path).write_text(json.dumps(_json_safe(obj), sort_keys=True, indent=2) + "\n")
