"""Field snapshot files.

Layout (stable across versions): an ASCII header terminated by a ``data``
line, followed by the raw samples.

    VIRIALAB-FIELD 1
    n <int>
    N <int>
    L <float repr>
    name <string, single line>
    time <float repr>
    data
    <N^n little-endian float64 values, row-major axis order>
"""

from __future__ import annotations

import os

import numpy as np

from .spectral import GridSpec, ScalarField

__all__ = ["save_field", "load_field"]

_MAGIC = "VIRIALAB-FIELD 1"


def save_field(path: str | os.PathLike, field: ScalarField, name: str = "u", time: float = 0.0) -> None:
    if "\n" in name:
        raise ValueError("field name must be a single line")
    header = (
        f"{_MAGIC}\n"
        f"n {field.grid.n}\n"
        f"N {field.grid.N}\n"
        f"L {field.grid.L!r}\n"
        f"name {name}\n"
        f"time {float(time)!r}\n"
        f"data\n"
    )
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(np.ascontiguousarray(field.values, dtype="<f8").tobytes())


def load_field(path: str | os.PathLike) -> tuple[ScalarField, str, float]:
    with open(path, "rb") as fh:
        raw = fh.read()
    try:
        head, payload = raw.split(b"data\n", 1)
    except ValueError:
        raise ValueError(f"{path}: missing data marker") from None
    lines = head.decode("ascii").splitlines()
    if not lines or lines[0] != _MAGIC:
        raise ValueError(f"{path}: not a {_MAGIC} file")
    meta: dict[str, str] = {}
    for line in lines[1:]:
        key, _, value = line.partition(" ")
        meta[key] = value
    try:
        grid = GridSpec(n=int(meta["n"]), N=int(meta["N"]), L=float(meta["L"]))
        name = meta["name"]
        time = float(meta["time"])
    except KeyError as exc:
        raise ValueError(f"{path}: missing header field {exc}") from None
    count = grid.N ** grid.n
    values = np.frombuffer(payload, dtype="<f8", count=count).reshape(grid.shape)
    return ScalarField(grid, values.copy()), name, time
