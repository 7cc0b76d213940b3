"""
Scalar and vector fields on the slab grid, with transforms between physical
samples and parity-constrained spectral coefficients.

Coefficients follow the analytic convention: a field is
f(x_h, x3) = sum_xi sum_k c[xi, k] * exp(i xi . x_h) * basis_k(x3), with
basis_k = cos(2 pi k x3) for even parity and sin(2 pi k x3) for odd parity.
A constant field therefore has the single coefficient c[0, 0] = const.

Fields are treated as immutable values: every operation returns new arrays.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, replace

import numpy as np
import scipy.fft as sfft

from .grid import Grid

__all__ = [
    "ScalarField",
    "VectorField",
    "HelmholtzParts",
    "transform",
    "as_coefficients",
    "as_physical",
    "coef_to_phys",
    "phys_to_coef",
    "l2_norm",
    "l2_inner",
    "VELOCITY_PARITIES",
]

COEF = "coef"
PHYS = "phys"
VELOCITY_PARITIES = ("even", "even", "odd")


def fft_workers() -> int:
    """
    Worker count for scipy.fft, capped by GEOB_THREADS.  Each transform in a
    batch is computed independently, so results are bitwise identical for any
    worker count.
    """
    cap = os.environ.get("GEOB_THREADS")
    if cap is None:
        return os.cpu_count() or 1
    try:
        return max(1, int(cap))
    except ValueError:
        return 1


# ---------------------------------------------------------------------------
# Low-level transforms on raw arrays (..., N_h, N_h, N_v/N3).


def _basis(grid: Grid, parity: str, analysis: bool) -> np.ndarray:
    if parity == "even":
        return grid.cos_analysis_c if analysis else grid.cos_basis_c
    if parity == "odd":
        return grid.sin_analysis_c if analysis else grid.sin_basis_c
    raise ValueError(f"unknown parity {parity!r}")


def _apply_vertical(arr: np.ndarray, matrix: np.ndarray) -> np.ndarray:
    """Contract the last axis with matrix (modes/points, out); BLAS path."""
    flat = arr.reshape(-1, arr.shape[-1])
    return (flat @ matrix).reshape(arr.shape[:-1] + (matrix.shape[1],))


def coef_to_phys(coef: np.ndarray, grid: Grid, parity: str) -> np.ndarray:
    """Synthesize physical samples from coefficients (complex preserved)."""
    slab = sfft.ifft2(coef, axes=(-3, -2), workers=fft_workers()) * grid.N_h**2
    return _apply_vertical(slab, _basis(grid, parity, analysis=False))


def phys_to_coef(phys: np.ndarray, grid: Grid, parity: str) -> np.ndarray:
    """Analyze physical samples into coefficients (projects onto the parity band)."""
    slab = _apply_vertical(phys, _basis(grid, parity, analysis=True).T)
    return sfft.fft2(slab, axes=(-3, -2), workers=fft_workers()) / grid.N_h**2


# ---------------------------------------------------------------------------
# Field containers.


@dataclass(frozen=True)
class ScalarField:
    grid: Grid
    parity: str
    data: np.ndarray
    rep: str = COEF

    def __post_init__(self) -> None:
        if self.parity not in ("even", "odd"):
            raise ValueError(f"unknown parity {self.parity!r}")
        if self.rep not in (COEF, PHYS):
            raise ValueError(f"unknown representation {self.rep!r}")
        want = self.grid.coef_shape if self.rep == COEF else self.grid.phys_shape
        if self.data.shape != want:
            raise ValueError(f"data shape {self.data.shape} != {want} for rep {self.rep!r}")

    @classmethod
    def zeros(cls, grid: Grid, parity: str = "even", rep: str = COEF) -> "ScalarField":
        shape = grid.coef_shape if rep == COEF else grid.phys_shape
        return cls(grid, parity, np.zeros(shape, dtype=np.complex128), rep)

    @classmethod
    def from_physical(cls, grid: Grid, parity: str, values: np.ndarray) -> "ScalarField":
        return cls(grid, parity, np.asarray(values, dtype=np.complex128), PHYS)

    def with_data(self, data: np.ndarray, rep: str | None = None) -> "ScalarField":
        return replace(self, data=data, rep=self.rep if rep is None else rep)

    def copy(self) -> "ScalarField":
        return self.with_data(self.data.copy())

    def __add__(self, other: "ScalarField") -> "ScalarField":
        _check_compatible(self, other)
        return self.with_data(self.data + other.data)

    def __sub__(self, other: "ScalarField") -> "ScalarField":
        _check_compatible(self, other)
        return self.with_data(self.data - other.data)

    def __mul__(self, c: complex) -> "ScalarField":
        return self.with_data(self.data * c)

    __rmul__ = __mul__


@dataclass(frozen=True)
class VectorField:
    grid: Grid
    parities: tuple[str, str, str]
    data: np.ndarray
    rep: str = COEF

    def __post_init__(self) -> None:
        if self.rep not in (COEF, PHYS):
            raise ValueError(f"unknown representation {self.rep!r}")
        want = (3,) + (self.grid.coef_shape if self.rep == COEF else self.grid.phys_shape)
        if self.data.shape != want:
            raise ValueError(f"data shape {self.data.shape} != {want} for rep {self.rep!r}")

    @classmethod
    def zeros(cls, grid: Grid, parities: tuple[str, str, str] = VELOCITY_PARITIES, rep: str = COEF) -> "VectorField":
        shape = (3,) + (grid.coef_shape if rep == COEF else grid.phys_shape)
        return cls(grid, parities, np.zeros(shape, dtype=np.complex128), rep)

    @classmethod
    def from_components(cls, comps: tuple[ScalarField, ScalarField, ScalarField]) -> "VectorField":
        grid, rep = comps[0].grid, comps[0].rep
        if any(c.grid is not grid and c.grid != grid for c in comps) or any(c.rep != rep for c in comps):
            raise ValueError("components live on different grids or representations")
        data = np.stack([c.data for c in comps])
        return cls(grid, tuple(c.parity for c in comps), data, rep)

    def component(self, i: int) -> ScalarField:
        return ScalarField(self.grid, self.parities[i], self.data[i], self.rep)

    def with_data(self, data: np.ndarray, rep: str | None = None) -> "VectorField":
        return replace(self, data=data, rep=self.rep if rep is None else rep)

    def copy(self) -> "VectorField":
        return self.with_data(self.data.copy())

    def __add__(self, other: "VectorField") -> "VectorField":
        _check_compatible(self, other)
        return self.with_data(self.data + other.data)

    def __sub__(self, other: "VectorField") -> "VectorField":
        _check_compatible(self, other)
        return self.with_data(self.data - other.data)

    def __mul__(self, c: complex) -> "VectorField":
        return self.with_data(self.data * c)

    __rmul__ = __mul__


def _check_compatible(a, b) -> None:
    if a.grid != b.grid:
        raise ValueError("fields live on different grids")
    if a.rep != b.rep:
        raise ValueError(f"representation mismatch: {a.rep!r} vs {b.rep!r}")
    pa = a.parity if isinstance(a, ScalarField) else a.parities
    pb = b.parity if isinstance(b, ScalarField) else b.parities
    if pa != pb:
        raise ValueError(f"parity mismatch: {pa!r} vs {pb!r}")


# ---------------------------------------------------------------------------
# Transforms.


def as_coefficients(f):
    """Return f in coefficient representation (no-op if already there)."""
    if f.rep == COEF:
        return f
    if isinstance(f, ScalarField):
        return f.with_data(phys_to_coef(f.data, f.grid, f.parity), COEF)
    comps = [phys_to_coef(f.data[i], f.grid, f.parities[i]) for i in range(3)]
    return f.with_data(np.stack(comps), COEF)


def as_physical(f):
    """Return f in physical representation (no-op if already there)."""
    if f.rep == PHYS:
        return f
    if isinstance(f, ScalarField):
        return f.with_data(coef_to_phys(f.data, f.grid, f.parity), PHYS)
    comps = [coef_to_phys(f.data[i], f.grid, f.parities[i]) for i in range(3)]
    return f.with_data(np.stack(comps), PHYS)


def transform(f):
    """Toggle between physical and coefficient space."""
    return as_physical(f) if f.rep == COEF else as_coefficients(f)


def require_coef(f, what: str = "operation"):
    if f.rep != COEF:
        raise ValueError(f"{what} requires coefficient representation, got {f.rep!r}")
    return f


# ---------------------------------------------------------------------------
# Norms and inner products (L^2 over the box [0,L_h)^2 x unit torus).


def _coef_weight(grid: Grid, parity: str) -> np.ndarray:
    return grid.L_h**2 * grid.vertical_weights(parity)


def l2_inner(a, b) -> complex:
    """Complex L^2 pairing <a, b> = integral a * conj(b)."""
    _check_compatible(a, b)
    a = as_coefficients(a)
    b = as_coefficients(b)
    if isinstance(a, ScalarField):
        w = _coef_weight(a.grid, a.parity)
        return complex(np.sum(a.data * np.conj(b.data) * w))
    total = 0.0 + 0.0j
    for i in range(3):
        w = _coef_weight(a.grid, a.parities[i])
        total += np.sum(a.data[i] * np.conj(b.data[i]) * w)
    return complex(total)


def l2_norm(f) -> float:
    """L^2 norm, computable in either representation (Parseval)."""
    if f.rep == COEF:
        return float(np.sqrt(max(l2_inner(f, f).real, 0.0)))
    # Physical quadrature: uniform samples are exact for band-limited fields.
    grid = f.grid
    cell = (grid.L_h / grid.N_h) ** 2 / grid.N3
    return float(np.sqrt(np.sum(np.abs(f.data) ** 2) * cell))


def grad_sq_norm(f) -> float:
    """||grad f||^2 for coefficient fields (used by energy diagnostics)."""
    f = as_coefficients(f)
    if isinstance(f, ScalarField):
        w = _coef_weight(f.grid, f.parity)
        return float(np.sum(np.abs(f.data) ** 2 * f.grid.kappa_sq * w).real)
    total = 0.0
    for i in range(3):
        w = _coef_weight(f.grid, f.parities[i])
        total += float(np.sum(np.abs(f.data[i]) ** 2 * f.grid.kappa_sq * w).real)
    return total


@dataclass(frozen=True)
class HelmholtzParts:
    """Leray split u = solenoidal + grad(potential)."""

    solenoidal: VectorField
    potential: ScalarField
