"""SPIN1 text format for spin fields.

Layout::

    SPIN1
    d 2
    window 4 4
    origin -2 -2
    eps 0.5
    boundary periodic periodic
    offsets 1
    0.0 0.0
    <row-major 0/1 characters, one line per row slab>

A row slab is the last cell axis together with the offset axis, so each data
line holds ``window[-1] * n_offsets`` characters.
"""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np

from .field import PeriodicLattice, SpinField

MAGIC = "SPIN1"


class Spin1Error(ValueError):
    pass


def dumps(f: SpinField) -> str:
    out = io.StringIO()
    out.write(f"{MAGIC}\n")
    out.write(f"d {f.dim}\n")
    out.write("window " + " ".join(str(n) for n in f.extents) + "\n")
    out.write("origin " + " ".join(str(o) for o in f.origin) + "\n")
    out.write(f"eps {f.eps!r}\n")
    out.write("boundary " + " ".join("periodic" if p else "restricted" for p in f.periodic) + "\n")
    out.write(f"offsets {f.lattice.n_offsets}\n")
    for off in f.lattice.offsets:
        out.write(" ".join(repr(float(x)) for x in off) + "\n")
    rows = f.values.reshape(-1, f.extents[-1] * f.lattice.n_offsets)
    chars = (rows + ord("0")).astype(np.uint8)
    for row in chars:
        out.write(row.tobytes().decode("ascii") + "\n")
    return out.getvalue()


def _field(line: str, key: str) -> list[str]:
    parts = line.split()
    if not parts or parts[0] != key:
        raise Spin1Error(f"expected {key!r} line, got {line!r}")
    return parts[1:]


def loads(text: str) -> SpinField:
    lines = text.splitlines()
    if not lines or lines[0].strip() != MAGIC:
        raise Spin1Error("missing SPIN1 magic")
    try:
        d = int(_field(lines[1], "d")[0])
        window = tuple(int(x) for x in _field(lines[2], "window"))
        origin = tuple(int(x) for x in _field(lines[3], "origin"))
        eps = float(_field(lines[4], "eps")[0])
        boundary = _field(lines[5], "boundary")
        m = int(_field(lines[6], "offsets")[0])
        offsets = [[float(x) for x in lines[7 + k].split()] for k in range(m)]
    except (IndexError, ValueError) as exc:
        if isinstance(exc, Spin1Error):
            raise
        raise Spin1Error(f"malformed SPIN1 header: {exc}") from exc
    if len(window) != d or len(origin) != d or len(boundary) != d:
        raise Spin1Error("header arity does not match d")
    data = lines[7 + m:]
    width = window[-1] * m
    n_rows = int(np.prod(window[:-1], dtype=np.int64))
    if len(data) != n_rows or any(len(r) != width for r in data):
        raise Spin1Error("data block does not match the window extents")
    raw = np.frombuffer("".join(data).encode("ascii"), dtype=np.uint8) - ord("0")
    if np.any(raw > 1):
        raise Spin1Error("data block may only contain '0' and '1'")
    values = raw.reshape(window + (m,))
    return SpinField(PeriodicLattice(np.asarray(offsets).reshape(m, d)), eps, origin, values, boundary)


def write(f: SpinField, path) -> None:
    Path(path).write_text(dumps(f), encoding="ascii", newline="\n")


def read(path) -> SpinField:
    return loads(Path(path).read_text(encoding="ascii"))
