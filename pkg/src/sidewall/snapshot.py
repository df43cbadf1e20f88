"""Self-describing field snapshots and CSV time series.

A snapshot is a short text header followed by the values in row-major
(r-major) order, either as ASCII ``repr`` floats or as raw little-endian
float64 bytes.  Both encodings round-trip bit-exactly.
"""

from __future__ import annotations

import csv
import io
import math

import numpy as np

from .grid import GridSpec, ScalarField

MAGIC = "# sidewall-field v1"
ASCII = "ascii"
BINARY = "binary"


class SnapshotError(ValueError):
    pass


def write_field(path: str, f: ScalarField, encoding: str = BINARY):
    if encoding not in (ASCII, BINARY):
        raise SnapshotError(f"unknown encoding {encoding!r}")
    g = f.grid
    header = "\n".join([
        MAGIC, f"Nr {g.Nr}", f"Nz {g.Nz}", f"zPeriod {g.z_period!r}",
        f"hr {g.hr!r}", f"hz {g.hz!r}", f"parity {f.parity}", f"encoding {encoding}",
        "end", ""]).encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        if encoding == BINARY:
            fh.write(np.ascontiguousarray(f.values, dtype="<f8").tobytes())
        else:
            for row in f.values:
                fh.write((" ".join(repr(float(v)) for v in row) + "\n").encode("ascii"))


def read_field(path: str) -> ScalarField:
    with open(path, "rb") as fh:
        data = fh.read()
    meta = {}
    pos = 0
    first = True
    while True:
        nl = data.find(b"\n", pos)
        if nl < 0:
            raise SnapshotError(f"{path}: truncated header")
        line = data[pos:nl].decode("ascii").strip()
        pos = nl + 1
        if first:
            if line != MAGIC:
                raise SnapshotError(f"{path}: not a field snapshot")
            first = False
            continue
        if line == "end":
            break
        k, _, v = line.partition(" ")
        meta[k] = v
    try:
        grid = GridSpec(int(meta["Nr"]), int(meta["Nz"]), float(meta["zPeriod"]))
        parity, enc = meta["parity"], meta["encoding"]
    except KeyError as e:
        raise SnapshotError(f"{path}: header lacks {e}") from None
    body = data[pos:]
    if enc == BINARY:
        n = grid.Nr * grid.Nz
        if len(body) != 8 * n:
            raise SnapshotError(f"{path}: expected {8 * n} value bytes, found {len(body)}")
        vals = np.frombuffer(body, dtype="<f8").reshape(grid.Nr, grid.Nz).astype(float)
    elif enc == ASCII:
        vals = np.loadtxt(io.StringIO(body.decode("ascii")), dtype=float, ndmin=2)
    else:
        raise SnapshotError(f"{path}: unknown encoding {enc!r}")
    return ScalarField(grid, vals, parity)


def _cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return "nan" if math.isnan(v) else repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    return str(v)


def write_series(path_or_buf, rows, columns) -> None:
    """CSV with a fixed column order; floats written with ``repr``."""
    own = isinstance(path_or_buf, str)
    fh = open(path_or_buf, "w", newline="", encoding="utf-8") if own else path_or_buf
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_cell(row.get(c, math.nan)) for c in columns])
    finally:
        if own:
            fh.close()


def read_series(path: str) -> dict[str, np.ndarray]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise SnapshotError(f"{path}: empty CSV")
    head, body = rows[0], rows[1:]
    out = {}
    for i, name in enumerate(head):
        try:
            out[name] = np.array([float(r[i]) for r in body])
        except (ValueError, IndexError):
            raise SnapshotError(f"{path}: column {name!r} is not numeric") from None
    return out
