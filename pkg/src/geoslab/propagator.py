"""
The acoustic propagator W(p, u) = (div u, g x u + grad p), its per-mode
spectral blocks, closed-form eigenvalues, kernel projectors, band truncation,
half-wave evolution, and the localized time-average (RAGE-type) functionals.

Per-mode state order throughout this module is (p, u1, u2, u3).  In the
parity basis the per-mode block is skew-Hermitian, so its eigensystem comes
from a Hermitian eigensolve and the evolution exp(-t W / eps) is unitary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fields import (
    ScalarField,
    VectorField,
    as_coefficients,
    as_physical,
    coef_to_phys,
    l2_norm,
    require_coef,
)
from .grid import Grid
from .operators import diff, div, grad

__all__ = [
    "ModeBlock",
    "Truncation",
    "RecurrenceError",
    "apply_W",
    "eigenvalues_closed_form",
    "mode_block",
    "kernel_project",
    "complement_project",
    "truncate",
    "truncate_state",
    "half_wave",
    "local_decay_functional",
    "rage_functional",
    "make_chi_bump",
    "make_chi_one",
    "evolve_wave_state",
    "mode_table_rows",
    "export_mode_table",
]


class RecurrenceError(RuntimeError):
    """A periodic image would re-enter the observation window."""


# ---------------------------------------------------------------------------
# The operator and its spectrum.


def apply_W(p: ScalarField, u: VectorField) -> tuple[ScalarField, VectorField]:
    """W(p, u) = (div u, g x u + grad p) with g = (0, 0, 1)."""
    require_coef(p, "apply_W")
    require_coef(u, "apply_W")
    gp = grad(p)
    g_cross = np.stack([-u.data[1], u.data[0], np.zeros_like(u.data[2])])
    return div(u), VectorField(u.grid, u.parities, g_cross + gp.data)


def eigenvalues_closed_form(xi_sq: float, kz: float) -> np.ndarray:
    """
    The four per-mode eigenvalues, ordered by imaginary part.

    lambda^2 = -( (1 + |xi|^2 + kz^2) +- sqrt((1 + |xi|^2 + kz^2)^2 - 4 kz^2) ) / 2,
    where xi_sq = |xi|^2 and kz is the vertical wavenumber of the mode.  All
    eigenvalues are purely imaginary; zero occurs exactly when kz = 0.
    """
    a = 1.0 + xi_sq + kz * kz
    disc = max(a * a - 4.0 * kz * kz, 0.0)
    root = math.sqrt(disc)
    lam_plus = math.sqrt((a + root) / 2.0)
    lam_minus = math.sqrt(max((a - root) / 2.0, 0.0))
    vals = np.array([-lam_plus, -lam_minus, lam_minus, lam_plus])
    return 1j * vals


def _symbol_block(xi1: float, xi2: float, kz: float) -> np.ndarray:
    """Per-mode W block in the parity basis, state order (p, u1, u2, u3)."""
    return np.array(
        [
            [0.0, 1j * xi1, 1j * xi2, kz],
            [1j * xi1, 0.0, -1.0, 0.0],
            [1j * xi2, 1.0, 0.0, 0.0],
            [-kz, 0.0, 0.0, 0.0],
        ],
        dtype=np.complex128,
    )


def _kernel_vector(xi1: float, xi2: float) -> np.ndarray:
    """Unit kernel vector at a kz = 0 mode: p free, u = (-d2 p, d1 p, 0)."""
    v = np.array([1.0, -1j * xi2, 1j * xi1, 0.0], dtype=np.complex128)
    return v / np.linalg.norm(v)


@dataclass(frozen=True)
class ModeBlock:
    """Eigenstructure of one (xi_h, kz) mode of the acoustic propagator."""

    xi_h: tuple[float, float]
    kz: float
    eigenvalues: np.ndarray
    kernel_vector: np.ndarray | None

    @property
    def has_kernel(self) -> bool:
        return self.kernel_vector is not None


def mode_block(xi_h: tuple[float, float], kz: float) -> ModeBlock:
    xi1, xi2 = float(xi_h[0]), float(xi_h[1])
    lam = eigenvalues_closed_form(xi1 * xi1 + xi2 * xi2, float(kz))
    kernel = _kernel_vector(xi1, xi2) if kz == 0 else None
    return ModeBlock((xi1, xi2), float(kz), lam, kernel)


# ---------------------------------------------------------------------------
# Grid-wide eigensystem (cached) and unitary evolution.

_EIG_CACHE: dict[tuple, tuple[np.ndarray, np.ndarray]] = {}


def _grid_symbol(grid: Grid) -> np.ndarray:
    shape = grid.coef_shape
    A = np.zeros(shape + (4, 4), dtype=np.complex128)
    xi1 = grid.xi1[:, :, None]
    xi2 = grid.xi2[:, :, None]
    kz = np.broadcast_to(grid.kappa3, shape)
    A[..., 0, 1] = 1j * xi1
    A[..., 0, 2] = 1j * xi2
    A[..., 0, 3] = kz
    A[..., 1, 0] = 1j * xi1
    A[..., 1, 2] = -1.0
    A[..., 2, 0] = 1j * xi2
    A[..., 2, 1] = 1.0
    A[..., 3, 0] = -kz
    return A


def wave_eigensystem(grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    """
    Unitary eigensystem of the skew-Hermitian symbol: W = V diag(-i w) V^H
    with real frequencies w.  Cached per grid.
    """
    key = grid.cache_key()
    hit = _EIG_CACHE.get(key)
    if hit is not None:
        return hit
    H = 1j * _grid_symbol(grid)  # Hermitian
    w, V = np.linalg.eigh(H)
    _EIG_CACHE[key] = (w, V)
    return w, V


def _state_array(p: ScalarField, u: VectorField) -> np.ndarray:
    return np.stack([p.data, u.data[0], u.data[1], u.data[2]])


def _state_fields(grid: Grid, S: np.ndarray, parities) -> tuple[ScalarField, VectorField]:
    return (
        ScalarField(grid, "even", S[0]),
        VectorField(grid, parities, S[1:4].copy()),
    )


def evolve_wave_state(p: ScalarField, u: VectorField, t: float, eps: float = 1.0):
    """Apply exp(-t W / eps) exactly, mode by mode."""
    require_coef(p, "evolve_wave_state")
    require_coef(u, "evolve_wave_state")
    grid = p.grid
    w, V = wave_eigensystem(grid)
    S = np.moveaxis(_state_array(p, u), 0, -1)  # (..., 4)
    amp = np.einsum("...ab,...b->...a", np.conj(np.swapaxes(V, -1, -2)), S)
    amp *= np.exp(1j * w * (t / eps))
    S = np.einsum("...ab,...b->...a", V, amp)
    S = np.moveaxis(S, -1, 0)
    return _state_fields(grid, S, u.parities)


# ---------------------------------------------------------------------------
# Kernel projector and band truncation.


def _kernel_project_array(grid: Grid, S: np.ndarray) -> np.ndarray:
    """Project the (4, ...) state array onto Ker(W): kz = 0 modes only."""
    out = np.zeros_like(S)
    xi1, xi2 = grid.xi1, grid.xi2
    norm_sq = 1.0 + grid.xi_sq
    v = np.stack(
        [
            np.ones_like(xi1, dtype=np.complex128),
            -1j * xi2,
            1j * xi1,
            np.zeros_like(xi1, dtype=np.complex128),
        ]
    ) / np.sqrt(norm_sq)
    slab = S[:, :, :, 0]
    amp = np.sum(np.conj(v) * slab, axis=0)
    out[:, :, :, 0] = amp * v
    return out


def kernel_project(p: ScalarField, u: VectorField) -> tuple[ScalarField, VectorField]:
    """Orthogonal projection Q onto Ker(W); zero on every kz != 0 mode."""
    require_coef(p, "kernel_project")
    require_coef(u, "kernel_project")
    S = _kernel_project_array(p.grid, _state_array(p, u))
    return _state_fields(p.grid, S, u.parities)


def complement_project(p: ScalarField, u: VectorField) -> tuple[ScalarField, VectorField]:
    """Q_perp = identity - kernel_project."""
    qp, qu = kernel_project(p, u)
    return p - qp, u - qu


@dataclass(frozen=True)
class Truncation:
    """Band limit: retain modes with |xi_h| + |k| <= M (k the vertical index)."""

    M: int

    def __post_init__(self) -> None:
        if self.M < 0:
            raise ValueError("truncation order M must be non-negative")

    def mask(self, grid: Grid) -> np.ndarray:
        xi_abs = np.sqrt(grid.xi_sq)[:, :, None]
        k_abs = grid.modes_v[None, None, :]
        return (xi_abs + k_abs) <= self.M


def truncate(f, M: int):
    """P_M: zero all modes with |xi_h| + |k| > M; idempotent."""
    f = as_coefficients(f)
    return f.with_data(f.data * Truncation(M).mask(f.grid))


def truncate_state(p: ScalarField, u: VectorField, M: int):
    return truncate(p, M), truncate(u, M)


# ---------------------------------------------------------------------------
# Half-wave group exp(i sqrt(-Laplace) t).


def half_wave(v: ScalarField, t: float) -> ScalarField:
    """Unitary spectral multiplier exp(i |kappa| t) per mode."""
    require_coef(v, "half_wave")
    mult = np.exp(1j * np.sqrt(v.grid.kappa_sq) * t)
    return v.with_data(v.data * mult)


def _centered_box_mask(grid: Grid, fraction: float) -> np.ndarray:
    """Indicator of the centered horizontal sub-box of side fraction * L_h."""
    half = 0.5 * fraction * grid.L_h
    center = 0.5 * grid.L_h
    inside = np.abs(grid.x_h - center) <= half + 1e-12 * grid.L_h
    return inside[:, None] & inside[None, :]


def recurrence_time(grid: Grid, K_fraction: float, eps: float, m: float) -> float:
    """Time before a unit-speed wave image can wrap back into K."""
    diam = K_fraction * grid.L_h
    return (grid.L_h / 2.0 - diam / 2.0) * eps**m


def local_decay_functional(
    v: ScalarField,
    m: float,
    eps: float,
    T: float,
    K_fraction: float,
    n_t: int = 129,
) -> float:
    """
    integral_0^T integral_K |exp(i sqrt(-Laplace) t / eps^m) v|^2 dx dt over
    the centered sub-box K of side K_fraction * L_h (full vertical torus).

    Refuses to report a value once T exceeds the recurrence window, except in
    the degenerate full-box case K_fraction = 1 where the value is T ||v||^2
    by unitarity and periodic images are irrelevant.
    """
    require_coef(v, "local_decay_functional")
    if not 0.0 < K_fraction <= 1.0:
        raise ValueError("K_fraction must lie in (0, 1]")
    grid = v.grid
    if K_fraction < 1.0:
        t_rec = recurrence_time(grid, K_fraction, eps, m)
        if T > t_rec:
            raise RecurrenceError(
                f"T = {T:g} exceeds the recurrence window {t_rec:g} "
                f"(eps = {eps:g}, m = {m:g}, K = {K_fraction:g} of the box)"
            )
    mask = _centered_box_mask(grid, K_fraction)
    cell = (grid.L_h / grid.N_h) ** 2 / grid.N3
    t_nodes = np.linspace(0.0, T, n_t)
    weights = np.full(n_t, T / (n_t - 1))
    weights[0] *= 0.5
    weights[-1] *= 0.5
    total = 0.0
    for t, wt in zip(t_nodes, weights):
        phys = coef_to_phys(half_wave(v, t / eps**m).data, grid, v.parity)
        local = np.sum(np.abs(phys) ** 2 * mask[:, :, None]) * cell
        total += wt * local
    return float(total)


# ---------------------------------------------------------------------------
# RAGE-type time averages.


def make_chi_bump(grid: Grid, K_fraction: float) -> np.ndarray:
    """
    Smooth cutoff chi in [0, 1], compactly supported in the centered
    horizontal sub-box of side K_fraction * L_h (constant vertically).
    """
    if not 0.0 < K_fraction <= 1.0:
        raise ValueError("K_fraction must lie in (0, 1]")
    s = 2.0 * (grid.x_h - 0.5 * grid.L_h) / (K_fraction * grid.L_h)
    profile = np.zeros_like(s)
    inner = np.abs(s) < 1.0
    profile[inner] = np.exp(1.0 - 1.0 / (1.0 - s[inner] ** 2))
    return profile[:, None] * profile[None, :]


def make_chi_one(grid: Grid) -> np.ndarray:
    """The trivial cutoff chi = 1 (no localization control case)."""
    return np.ones((grid.N_h, grid.N_h))


def _chi_weighted_energy(grid: Grid, p: ScalarField, u: VectorField, chi: np.ndarray) -> float:
    pp = as_physical(p)
    up = as_physical(u)
    dens = np.abs(pp.data) ** 2 + np.sum(np.abs(up.data) ** 2, axis=0)
    cell = (grid.L_h / grid.N_h) ** 2 / grid.N3
    return float(np.sum(dens * chi[:, :, None]) * cell)


def _check_chi(chi: np.ndarray) -> None:
    if np.min(chi) < -1e-14 or np.max(chi) > 1.0 + 1e-14:
        raise ValueError("cutoff chi must take values in [0, 1]")


def rage_functional(
    state_or_series,
    chi: np.ndarray,
    T: float | None = None,
    *,
    eps: float | None = None,
    M: int | None = None,
    n_t: int = 129,
) -> float:
    """
    Localized time average (1/T) int_0^T int chi |Q_perp X(t)|^2 dx dt.

    Two input forms:
      * a single (p, u) pair: X(t) is the free evolution exp(-t W / eps) of
        the truncated, kernel-complement part of the state (eps required);
      * a sequence of (t, p, u) samples: X(t) is the given series (trapezoid
        over the supplied times; T defaults to the covered span).
    """
    _check_chi(chi)
    if isinstance(state_or_series, tuple) and len(state_or_series) == 2:
        p, u = state_or_series
        if eps is None or T is None:
            raise ValueError("free-evolution form needs both eps and T")
        if M is not None:
            p, u = truncate_state(p, u, M)
        p, u = complement_project(p, u)
        grid = p.grid
        t_nodes = np.linspace(0.0, T, n_t)
        weights = np.full(n_t, T / (n_t - 1))
        weights[0] *= 0.5
        weights[-1] *= 0.5
        total = 0.0
        for t, wt in zip(t_nodes, weights):
            pt, ut = evolve_wave_state(p, u, t, eps)
            total += wt * _chi_weighted_energy(grid, pt, ut, chi)
        return total / T

    series = list(state_or_series)
    if len(series) < 2:
        raise ValueError("series form needs at least two samples")
    times = np.array([s[0] for s in series])
    if np.any(np.diff(times) <= 0):
        raise ValueError("series times must be strictly increasing")
    span = float(times[-1] - times[0]) if T is None else T
    vals = []
    for t, p, u in series:
        if M is not None:
            p, u = truncate_state(p, u, M)
        p, u = complement_project(p, u)
        vals.append(_chi_weighted_energy(p.grid, p, u, chi))
    integral = float(np.trapezoid(vals, times))
    return integral / span


# ---------------------------------------------------------------------------
# Mode tables.


def mode_table_rows(grid: Grid, M: int | None = None):
    """Yield (kx, ky, kz, eigenvalues, has_kernel) over grid modes."""
    tmask = Truncation(M).mask(grid) if M is not None else None
    order = np.argsort(grid.modes_h)
    for ix in order:
        for iy in order:
            for kz_idx in range(grid.N_v):
                if tmask is not None and not tmask[ix, iy, kz_idx]:
                    continue
                xi = (grid.xi1[ix, iy], grid.xi2[ix, iy])
                block = mode_block(xi, grid.kappa3[kz_idx])
                yield (
                    int(grid.modes_h[ix]),
                    int(grid.modes_h[iy]),
                    int(kz_idx),
                    block.eigenvalues,
                    block.has_kernel,
                )


def export_mode_table(grid: Grid, path, M: int | None = None) -> None:
    """CSV: kx ky kz re_l1 im_l1 ... re_l4 im_l4 has_kernel."""
    header = ["kx", "ky", "kz"]
    for i in range(1, 5):
        header += [f"re_l{i}", f"im_l{i}"]
    header.append("has_kernel")
    lines = [",".join(header)]
    for kx, ky, kz, lam, has_kernel in mode_table_rows(grid, M):
        cells = [str(kx), str(ky), str(kz)]
        for z in lam:
            cells += [format(z.real, ".17g"), format(z.imag, ".17g")]
        cells.append("1" if has_kernel else "0")
        lines.append(",".join(cells))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
