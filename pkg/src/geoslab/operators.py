"""
Spectral differential operators, Leray projection, and the vertical-structure
operators (average, oscillation, antiderivative) on slab fields.

All operators act on coefficient-space fields and are exact per mode.
Horizontal derivatives preserve vertical parity; one vertical derivative
flips it (cosine <-> sine).
"""

from __future__ import annotations

import numpy as np

from .fields import (
    HelmholtzParts,
    ScalarField,
    VectorField,
    as_coefficients,
    require_coef,
)
from .grid import Grid

__all__ = [
    "diff",
    "grad",
    "div",
    "laplacian",
    "grad_h",
    "div_h",
    "laplacian_h",
    "leray_decompose",
    "leray_p",
    "leray_q",
    "vertical_average",
    "oscillation",
    "vertical_antiderivative",
    "vorticity_component",
    "dealias",
    "embed_horizontal",
]

_FLIP = {"even": "odd", "odd": "even"}


def diff(f: ScalarField, axis: int) -> ScalarField:
    """Spectral derivative along physical axis 1, 2 or 3."""
    require_coef(f, "diff")
    g = f.grid
    if axis == 1:
        return ScalarField(g, f.parity, 1j * g.xi1[:, :, None] * f.data)
    if axis == 2:
        return ScalarField(g, f.parity, 1j * g.xi2[:, :, None] * f.data)
    if axis == 3:
        # d/dx3 cos(2 pi k x3) = -kappa3 sin, d/dx3 sin = +kappa3 cos.
        sign = -1.0 if f.parity == "even" else 1.0
        return ScalarField(g, _FLIP[f.parity], sign * g.kappa3 * f.data)
    raise ValueError(f"axis must be 1, 2 or 3, got {axis}")


def grad(f: ScalarField) -> VectorField:
    return VectorField.from_components((diff(f, 1), diff(f, 2), diff(f, 3)))


def div(u: VectorField) -> ScalarField:
    parts = [diff(u.component(i), i + 1) for i in range(3)]
    out = parts[0]
    for p in parts[1:]:
        out = out + p
    return out


def laplacian(f):
    require_coef(f, "laplacian")
    return f.with_data(-f.grid.kappa_sq * f.data)


def grad_h(f: ScalarField) -> tuple[ScalarField, ScalarField]:
    return diff(f, 1), diff(f, 2)


def div_h(u: VectorField) -> ScalarField:
    return diff(u.component(0), 1) + diff(u.component(1), 2)


def laplacian_h(f):
    require_coef(f, "laplacian_h")
    return f.with_data(-f.grid.xi_sq[:, :, None] * f.data)


# ---------------------------------------------------------------------------
# Leray / Helmholtz decomposition.


def leray_decompose(u: VectorField) -> HelmholtzParts:
    """
    Split u = Z + grad(Psi) with div Z = 0 per mode and mean(Psi) = 0.

    Psi solves laplacian(Psi) = div u mode by mode; the zero spatial mode of
    Psi is gauged to zero.
    """
    require_coef(u, "leray_decompose")
    g = u.grid
    d = div(u)
    ksq = g.kappa_sq.copy()
    ksq[0, 0, 0] = 1.0  # zero mode: kernel of the Laplacian, gauged away
    psi_data = -d.data / ksq
    psi_data[0, 0, 0] = 0.0
    psi = ScalarField(g, "even", psi_data)
    grad_psi = grad(psi)
    if grad_psi.parities != u.parities:
        raise ValueError("leray_decompose expects velocity parities (even, even, odd)")
    z = u - grad_psi
    return HelmholtzParts(solenoidal=z, potential=psi)


def leray_p(u: VectorField) -> VectorField:
    """Projection onto divergence-free fields."""
    return leray_decompose(u).solenoidal


def leray_q(u: VectorField) -> VectorField:
    """Projection onto gradient fields."""
    return grad(leray_decompose(u).potential)


# ---------------------------------------------------------------------------
# Vertical structure operators.


def vertical_average(f: ScalarField) -> ScalarField:
    """
    Vertical average <f> as a purely horizontal field (N_v = 1 grid).

    Equals the k = 0 vertical mode; identically zero for odd parity.
    """
    require_coef(f, "vertical_average")
    g2 = f.grid.horizontal()
    data = np.zeros(g2.coef_shape, dtype=np.complex128)
    if f.parity == "even":
        data[:, :, 0] = f.data[:, :, 0]
    return ScalarField(g2, "even", data)


def oscillation(f: ScalarField) -> ScalarField:
    """{f} = f - <f>: zero out the k = 0 vertical mode."""
    require_coef(f, "oscillation")
    data = f.data.copy()
    if f.parity == "even":
        data[:, :, 0] = 0.0
    return f.with_data(data)


def vertical_antiderivative(f: ScalarField, tol: float = 1e-12) -> ScalarField:
    """
    I[f] with d/dx3 I[f] = f and zero vertical mean.

    Requires <f> = 0 (k = 0 mode empty up to tol * ||f||).
    """
    require_coef(f, "vertical_antiderivative")
    g = f.grid
    if f.parity == "even":
        scale = np.max(np.abs(f.data)) or 1.0
        if np.max(np.abs(f.data[:, :, 0])) > tol * scale:
            raise ValueError("vertical_antiderivative requires zero vertical mean")
    inv_k = np.zeros(g.N_v)
    inv_k[1:] = 1.0 / g.kappa3[1:]
    if f.parity == "even":
        # f = sum f_k cos -> I = sum (f_k / kappa3) sin
        return ScalarField(g, "odd", f.data * inv_k)
    # f = sum f_k sin -> I = -sum (f_k / kappa3) cos, no k = 0 term
    return ScalarField(g, "even", -f.data * inv_k)


def vorticity_component(u: VectorField, i: int, j: int) -> ScalarField:
    """omega_{i,j} = d_i u_j - d_j u_i for i != j in {1, 2, 3}."""
    if i == j:
        raise ValueError("vorticity_component requires i != j")
    if i not in (1, 2, 3) or j not in (1, 2, 3):
        raise ValueError("component indices must lie in {1, 2, 3}")
    return diff(u.component(j - 1), i) - diff(u.component(i - 1), j)


# ---------------------------------------------------------------------------
# Dealiasing.


def dealias(f):
    """Zero coefficients outside the retained band (idempotent)."""
    f = as_coefficients(f)
    return f.with_data(f.data * f.grid.dealias_mask)


def embed_horizontal(f2d: ScalarField, grid: Grid) -> ScalarField:
    """Lift a horizontal (N_v = 1) field onto a 3D grid as its k = 0 mode."""
    require_coef(f2d, "embed_horizontal")
    if f2d.grid.N_v != 1:
        raise ValueError("embed_horizontal expects an N_v = 1 field")
    if (f2d.grid.N_h, f2d.grid.L_h) != (grid.N_h, grid.L_h):
        raise ValueError("horizontal resolutions differ")
    data = np.zeros(grid.coef_shape, dtype=np.complex128)
    if f2d.parity == "even":
        data[:, :, 0] = f2d.data[:, :, 0]
    return ScalarField(grid, f2d.parity, data)
