"""
Text snapshot format for spectral fields.

Layout:
    GEOB1 scalar|vector N_h N_v L_h parity t
    kx ky kz re im                      (scalar: one row per mode)
    kx ky kz re1 im1 re2 im2 re3 im3    (vector: one row per mode)

Rows are sorted lexicographically by (kx, ky, kz), with kx, ky the signed
horizontal mode numbers and kz the vertical basis index.  Floats are written
with 17 significant digits, so save -> load round-trips are bit exact.
"""

from __future__ import annotations

import numpy as np

from .fields import ScalarField, VectorField, require_coef
from .grid import Grid

__all__ = ["save_snapshot", "load_snapshot"]

MAGIC = "GEOB1"


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _sorted_mode_indices(grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    order = np.argsort(grid.modes_h)
    return order, grid.modes_h[order]


def save_snapshot(path, field, t: float = 0.0) -> None:
    """Write a coefficient-space field to a GEOB1 text snapshot."""
    require_coef(field, "save_snapshot")
    grid = field.grid
    if isinstance(field, ScalarField):
        kind, parity_token = "scalar", field.parity
        comps = field.data[None]
    elif isinstance(field, VectorField):
        kind, parity_token = "vector", ",".join(field.parities)
        comps = field.data
    else:
        raise TypeError(f"cannot snapshot {type(field).__name__}")

    order, modes = _sorted_mode_indices(grid)
    lines = [f"{MAGIC} {kind} {grid.N_h} {grid.N_v} {_fmt(grid.L_h)} {parity_token} {_fmt(t)}"]
    sorted_data = comps[:, order][:, :, order]
    for ix, kx in enumerate(modes):
        for iy, ky in enumerate(modes):
            for kz in range(grid.N_v):
                vals = []
                for c in range(comps.shape[0]):
                    z = sorted_data[c, ix, iy, kz]
                    vals.append(_fmt(z.real))
                    vals.append(_fmt(z.imag))
                lines.append(f"{kx} {ky} {kz} " + " ".join(vals))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_snapshot(path):
    """Read a GEOB1 snapshot; returns (field, t)."""
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 7 or header[0] != MAGIC:
            raise ValueError(f"not a {MAGIC} snapshot: {path}")
        _, kind, n_h, n_v, l_h, parity_token, t = header
        grid = Grid(float(l_h), int(n_h), int(n_v))
        if kind == "scalar":
            ncomp, parities = 1, (parity_token,)
        elif kind == "vector":
            ncomp, parities = 3, tuple(parity_token.split(","))
            if len(parities) != 3:
                raise ValueError(f"vector snapshot needs 3 parities, got {parity_token!r}")
        else:
            raise ValueError(f"unknown snapshot kind {kind!r}")

        data = np.zeros((ncomp,) + grid.coef_shape, dtype=np.complex128)
        expected = grid.N_h * grid.N_h * grid.N_v
        count = 0
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 3 + 2 * ncomp:
                raise ValueError(f"bad row ({len(parts)} columns) in {path}")
            kx, ky, kz = int(parts[0]), int(parts[1]), int(parts[2])
            ix, iy = kx % grid.N_h, ky % grid.N_h
            for c in range(ncomp):
                re = float(parts[3 + 2 * c])
                im = float(parts[4 + 2 * c])
                data[c, ix, iy, kz] = complex(re, im)
            count += 1
        if count != expected:
            raise ValueError(f"snapshot has {count} rows, expected {expected}")

    if kind == "scalar":
        return ScalarField(grid, parities[0], data[0]), float(t)
    return VectorField(grid, parities, data), float(t)
