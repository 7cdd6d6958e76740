"""Atomic CSV/JSON writers and the binary state-dump format.

State dump layout (little-endian):

    magic    8 bytes  b"PHYSTATE"
    version  u32      1
    dim      u32
    n        u32
    m        u32      components
    samples  u32
    then per sample: time f64, values f64[m * n^dim] in C order
"""
from __future__ import annotations

import csv
import io
import json
import os
import struct
import tempfile
from pathlib import Path
from typing import Iterable

import numpy as np

from .spectral import Field, GridSpec

MAGIC = b"PHYSTATE"
VERSION = 1
_HEADER = struct.Struct("<8sIIIII")

NORMALIZATION_NOTE = (
    "# domain [0,2pi)^d; L2 norm = ((2pi/n)^d sum |f|^2)^(1/2); "
    "amplitudes c = fft(f)/n^d; H^s weight (1+|xi|^2)^(s/2)"
)


def atomic_write(path: str | Path, data: bytes | str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, mode, **({} if mode == "wb" else {"newline": ""})) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def _cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def csv_text(rows: list[dict], comments: Iterable[str] = ()) -> str:
    buf = io.StringIO()
    buf.write(NORMALIZATION_NOTE + "\n")
    for c in comments:
        buf.write(f"# {c}\n")
    if rows:
        cols = list(rows[0])
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            w.writerow([_cell(r[c]) for c in cols])
    return buf.getvalue()


def write_csv(path, rows: list[dict], comments: Iterable[str] = ()):
    atomic_write(path, csv_text(rows, comments))


def read_csv(path) -> list[dict]:
    """Rows as dicts; numeric cells become floats, everything else stays a string."""
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    out = []
    for r in csv.DictReader(lines):
        row = {}
        for k, v in r.items():
            try:
                row[k] = float(v)
            except ValueError:
                row[k] = v
        out.append(row)
    return out


def write_json(path, obj):
    atomic_write(path, json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n")


def _jsonable(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if hasattr(o, "__dict__"):
        return vars(o)
    return str(o)


def dump_states(path, times: list[float], states: list[Field]):
    if not states:
        raise ValueError("nothing to dump")
    grid = states[0].grid
    m = states[0].components
    parts = [_HEADER.pack(MAGIC, VERSION, grid.dim, grid.n, m, len(states))]
    for t, st in zip(times, states):
        if st.grid != grid or st.components != m:
            raise ValueError("all dumped states must share grid and component count")
        parts.append(struct.pack("<d", t))
        parts.append(np.ascontiguousarray(st.values, dtype="<f8").tobytes())
    atomic_write(path, b"".join(parts))


def load_states(path) -> tuple[list[float], list[Field]]:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError("truncated state dump")
    magic, version, dim, n, m, samples = _HEADER.unpack_from(raw)
    if magic != MAGIC or version != VERSION:
        raise ValueError(f"{path}: not a state dump (magic {magic!r}, version {version})")
    grid = GridSpec(dim, n)
    count = m * n**dim
    step = 8 + 8 * count
    if len(raw) != _HEADER.size + samples * step:
        raise ValueError(f"{path}: size does not match header")
    times, states = [], []
    off = _HEADER.size
    for _ in range(samples):
        (t,) = struct.unpack_from("<d", raw, off)
        vals = np.frombuffer(raw, dtype="<f8", count=count, offset=off + 8).reshape((m,) + grid.shape)
        times.append(t)
        states.append(Field(grid, vals.astype(float)))
        off += step
    return times, states
