"""
Time integration of the rotating artificial-compressibility system

    du/dt + (1/eps) g x u + (1/eps^(2 beta)) grad p
        = mu Laplace(u) - (u . grad) u - (1/2) (div u) u,
    eps^(2 beta) dp/dt + div u = 0,

with g = (0, 0, 1) on the slab grid.  The stiff linear block (Coriolis +
pressure coupling + viscosity) is advanced by its exact per-mode matrix
exponential, so time-step selection never depends on eps; the energy-neutral
nonlinearity is advanced explicitly (Strang splitting, RK4 substep).

Per-mode state order in this module is (u1, u2, u3, p).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .fields import ScalarField, VectorField, coef_to_phys, l2_norm, phys_to_coef, require_coef
from .grid import Grid
from .operators import dealias

__all__ = [
    "ACParams",
    "ACState",
    "Trajectory",
    "EnergyReport",
    "NumericsError",
    "CFLError",
    "mode_matrix",
    "linear_phase",
    "nonlinear_rhs",
    "step",
    "energy",
    "run",
    "check_energy",
    "run_metadata",
]


class NumericsError(RuntimeError):
    """Non-finite values appeared during time stepping."""

    def __init__(self, message: str, step_index: int):
        super().__init__(message)
        self.step_index = step_index


class CFLError(RuntimeError):
    """Advective CFL bound violated in strict mode."""


@dataclass(frozen=True)
class ACParams:
    """Model parameters: Rossby eps, Mach exponent beta, viscosity mu."""

    eps: float
    beta: float
    mu: float = 1.0

    def __post_init__(self) -> None:
        if not self.eps > 0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        if self.mu < 0:
            raise ValueError(f"mu must be >= 0, got {self.mu}")
        if self.beta != 0.5 and self.beta < 1.0:
            warnings.warn(
                f"beta = {self.beta} lies outside {{1/2}} union [1, inf); "
                "the limit theory does not cover this exponent",
                stacklevel=2,
            )


@dataclass(frozen=True)
class ACState:
    u: VectorField
    p: ScalarField
    t: float = 0.0

    def __post_init__(self) -> None:
        if self.u.parities != ("even", "even", "odd") or self.p.parity != "even":
            raise ValueError("state parities must be u = (even, even, odd), p = even")
        if self.u.grid != self.p.grid:
            raise ValueError("u and p live on different grids")

    @property
    def grid(self) -> Grid:
        return self.u.grid

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.u.data)) and np.all(np.isfinite(self.p.data)))


@dataclass
class Trajectory:
    params: ACParams
    dt: float
    snapshots: list[ACState] = field(default_factory=list)
    energies: list[float] = field(default_factory=list)
    dissipation: list[float] = field(default_factory=list)  # running integral of ||grad u||^2
    cfl_violations: int = 0

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.snapshots])

    @property
    def dissipation_integral(self) -> float:
        return self.dissipation[-1] if self.dissipation else 0.0


@dataclass(frozen=True)
class EnergyReport:
    ok: bool
    tol: float
    initial_energy: float
    max_excess: float
    violating_snapshots: tuple[int, ...]


# ---------------------------------------------------------------------------
# Linear block: assembly, exact exponential, cache.


def _mode_matrix_entries(params: ACParams, xi1, xi2, kz):
    """Entries of d/dt (u1, u2, u3, p) = M (u1, u2, u3, p), broadcastable."""
    e2b = params.eps ** (2.0 * params.beta)
    inv_rot = 1.0 / params.eps
    inv_mach = 1.0 / e2b
    visc = -params.mu * (xi1**2 + xi2**2 + kz**2)
    return inv_rot, inv_mach, visc


def mode_matrix(params: ACParams, xi_h: tuple[float, float], kz: float):
    """
    The 4x4 linear block of one mode and its eigendecomposition.

    Returns (M, eigenvalues, eigenvectors) with M skew-Hermitian when mu = 0.
    """
    xi1, xi2 = float(xi_h[0]), float(xi_h[1])
    kz = float(kz)
    inv_rot, inv_mach, visc = _mode_matrix_entries(params, xi1, xi2, kz)
    M = np.array(
        [
            [visc, inv_rot, 0.0, -1j * xi1 * inv_mach],
            [-inv_rot, visc, 0.0, -1j * xi2 * inv_mach],
            [0.0, 0.0, visc, kz * inv_mach],
            [-1j * xi1 * inv_mach, -1j * xi2 * inv_mach, -kz * inv_mach, 0.0],
        ],
        dtype=np.complex128,
    )
    if params.mu == 0.0:
        w, V = np.linalg.eigh(1j * M)
        lam = -1j * w
    else:
        lam, V = np.linalg.eig(M)
    return M, lam, V


def _grid_matrices(params: ACParams, grid: Grid) -> np.ndarray:
    xi1 = grid.xi1[:, :, None]
    xi2 = grid.xi2[:, :, None]
    kz = np.broadcast_to(grid.kappa3, grid.coef_shape)
    inv_rot, inv_mach, visc = _mode_matrix_entries(params, xi1, xi2, kz)
    M = np.zeros(grid.coef_shape + (4, 4), dtype=np.complex128)
    M[..., 0, 0] = visc
    M[..., 1, 1] = visc
    M[..., 2, 2] = visc
    M[..., 0, 1] = inv_rot
    M[..., 1, 0] = -inv_rot
    M[..., 0, 3] = -1j * xi1 * inv_mach
    M[..., 1, 3] = -1j * xi2 * inv_mach
    M[..., 2, 3] = kz * inv_mach
    M[..., 3, 0] = -1j * xi1 * inv_mach
    M[..., 3, 1] = -1j * xi2 * inv_mach
    M[..., 3, 2] = -kz * inv_mach
    return M


_PROPAGATOR_CACHE: dict[tuple, np.ndarray] = {}


def _propagator(params: ACParams, grid: Grid, dt: float) -> np.ndarray:
    """exp(dt M) for every mode, computed once per (params, grid, dt)."""
    key = (params.eps, params.beta, params.mu, grid.cache_key(), dt)
    hit = _PROPAGATOR_CACHE.get(key)
    if hit is None:
        hit = sla.expm(_grid_matrices(params, grid) * dt)
        if len(_PROPAGATOR_CACHE) > 32:
            _PROPAGATOR_CACHE.clear()
        _PROPAGATOR_CACHE[key] = hit
    return hit


def _pack(state: ACState) -> np.ndarray:
    return np.stack([state.u.data[0], state.u.data[1], state.u.data[2], state.p.data])


def _unpack(grid: Grid, S: np.ndarray, t: float) -> ACState:
    u = VectorField(grid, ("even", "even", "odd"), S[:3].copy())
    p = ScalarField(grid, "even", S[3])
    return ACState(u=u, p=p, t=t)


def linear_phase(state: ACState, params: ACParams, dt: float) -> ACState:
    """Exact per-mode advance of the stiff linear block by dt."""
    require_coef(state.u, "linear_phase")
    require_coef(state.p, "linear_phase")
    P = _propagator(params, state.grid, dt)
    S = np.moveaxis(_pack(state), 0, -1)
    S = np.einsum("...ab,...b->...a", P, S)
    return _unpack(state.grid, np.moveaxis(S, -1, 0), state.t + dt)


# ---------------------------------------------------------------------------
# Nonlinearity N(u) = -(u . grad) u - (1/2) (div u) u, pseudo-spectral.


def _nonlinear_core(u: VectorField):
    """
    Return (N_coef (3, ...), max |u| on the grid).

    States are real fields (conjugate-symmetric spectra), so the physical
    products run in real arithmetic; the imaginary round-off of the inverse
    transforms is discarded.
    """
    grid = u.grid
    c = u.data * grid.dealias_mask
    xi1 = grid.xi1[:, :, None]
    xi2 = grid.xi2[:, :, None]
    k3 = grid.kappa3

    # Vertical derivative flips parity: d3(cos) = -k sin, d3(sin) = +k cos.
    even_batch = np.empty((7,) + grid.coef_shape, dtype=np.complex128)
    even_batch[0] = c[0]  # u1
    even_batch[1] = c[1]  # u2
    np.multiply(1j * xi1, c[0], out=even_batch[2])  # d1 u1
    np.multiply(1j * xi2, c[0], out=even_batch[3])  # d2 u1
    np.multiply(1j * xi1, c[1], out=even_batch[4])  # d1 u2
    np.multiply(1j * xi2, c[1], out=even_batch[5])  # d2 u2
    np.multiply(k3, c[2], out=even_batch[6])  # d3 u3 (odd -> even)
    odd_batch = np.empty((5,) + grid.coef_shape, dtype=np.complex128)
    odd_batch[0] = c[2]  # u3
    np.multiply(-k3, c[0], out=odd_batch[1])  # d3 u1 (even -> odd)
    np.multiply(-k3, c[1], out=odd_batch[2])  # d3 u2
    np.multiply(1j * xi1, c[2], out=odd_batch[3])  # d1 u3
    np.multiply(1j * xi2, c[2], out=odd_batch[4])  # d2 u3

    ev = coef_to_phys(even_batch, grid, "even").real
    od = coef_to_phys(odd_batch, grid, "odd").real
    u1, u2, d1u1, d2u1, d1u2, d2u2, d3u3 = ev
    u3, d3u1, d3u2, d1u3, d2u3 = od
    divu = d1u1 + d2u2 + d3u3

    prods = np.empty((3,) + grid.phys_shape)
    prods[0] = -(u1 * d1u1 + u2 * d2u1 + u3 * d3u1) - 0.5 * divu * u1
    prods[1] = -(u1 * d1u2 + u2 * d2u2 + u3 * d3u2) - 0.5 * divu * u2
    prods[2] = -(u1 * d1u3 + u2 * d2u3 + u3 * d3u3) - 0.5 * divu * u3

    n_even = phys_to_coef(prods[:2], grid, "even")
    n_odd = phys_to_coef(prods[2], grid, "odd")
    N = np.concatenate([n_even, n_odd[None]]) * grid.dealias_mask
    umax = float(max(np.max(np.abs(u1)), np.max(np.abs(u2)), np.max(np.abs(u3))))
    return N, umax


def nonlinear_rhs(state: ACState) -> VectorField:
    """N(u); dealiased, energy-neutral up to quadrature error."""
    require_coef(state.u, "nonlinear_rhs")
    N, _ = _nonlinear_core(state.u)
    return VectorField(state.grid, ("even", "even", "odd"), N)


# ---------------------------------------------------------------------------
# Energy and stepping.


def energy(state: ACState) -> float:
    """E = (1/2) integral |u|^2 + |p|^2."""
    return 0.5 * (l2_norm(state.u) ** 2 + l2_norm(state.p) ** 2)


def _rk4_nonlinear(u_data: np.ndarray, grid: Grid, dt: float):
    """Classical RK4 on du/dt = N(u); p is untouched by the nonlinearity."""
    def rhs(ud):
        return _nonlinear_core(VectorField(grid, ("even", "even", "odd"), ud))

    k1, umax = rhs(u_data)
    k2, _ = rhs(u_data + 0.5 * dt * k1)
    k3, _ = rhs(u_data + 0.5 * dt * k2)
    k4, _ = rhs(u_data + dt * k3)
    return u_data + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4), umax


def _step_impl(state: ACState, params: ACParams, dt: float, nonlinear: bool):
    """One Strang step; returns (state, viscous energy drop, umax or None)."""
    grid = state.grid
    e_before = energy(state)
    half = linear_phase(state, params, 0.5 * dt)
    drop = e_before - energy(half)

    umax = None
    if nonlinear:
        u_new, umax = _rk4_nonlinear(half.u.data, grid, dt)
        half = ACState(
            u=VectorField(grid, ("even", "even", "odd"), u_new),
            p=half.p,
            t=half.t,
        )

    e_mid = energy(half)
    out = linear_phase(half, params, 0.5 * dt)
    drop += e_mid - energy(out)
    out = ACState(u=out.u, p=out.p, t=state.t + dt)
    return out, drop, umax


def step(
    state: ACState,
    params: ACParams,
    dt: float,
    nonlinear: bool = True,
    cfl: float = 0.5,
    strict_cfl: bool = False,
) -> ACState:
    """
    Advance one step of size dt: exact linear half-phase, RK4 nonlinear
    substep, exact linear half-phase.  Second order in dt; parities and the
    dealias band are preserved.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    out, _, umax = _step_impl(state, params, dt, nonlinear)
    if umax is not None and umax > 0:
        dx = min(state.grid.L_h / state.grid.N_h, 1.0 / state.grid.N3)
        if dt > cfl * dx / umax:
            msg = f"CFL violated: dt = {dt:g} > {cfl * dx / umax:g} (|u|_max = {umax:g})"
            if strict_cfl:
                raise CFLError(msg)
            warnings.warn(msg, stacklevel=2)
    if not out.is_finite():
        raise NumericsError("non-finite state after step", step_index=0)
    return out


def run(
    params: ACParams,
    ic: ACState,
    T: float,
    dt: float,
    snap_every: int = 1,
    nonlinear: bool = True,
    cfl: float = 0.5,
    strict_cfl: bool = False,
) -> Trajectory:
    """
    Integrate to time T from the (dealiased) initial state, snapshotting
    every snap_every steps.  Aborts with NumericsError on non-finite values,
    reporting the offending step index.
    """
    if not T > 0:
        raise ValueError("run requires T > 0")
    if not dt > 0:
        raise ValueError("run requires dt > 0")
    n_steps = int(round(T / dt))
    if abs(n_steps * dt - T) > 1e-9 * max(T, 1.0):
        n_steps = int(np.ceil(T / dt))

    grid = ic.grid
    state = ACState(u=dealias(ic.u), p=dealias(ic.p), t=ic.t)
    traj = Trajectory(params=params, dt=dt)
    traj.snapshots.append(state)
    traj.energies.append(energy(state))
    traj.dissipation.append(0.0)

    dx = min(grid.L_h / grid.N_h, 1.0 / grid.N3)
    drop_total = 0.0
    for n in range(1, n_steps + 1):
        state, drop, umax = _step_impl(state, params, dt, nonlinear)
        drop_total += drop
        if umax is not None and umax > 0 and dt > cfl * dx / umax:
            traj.cfl_violations += 1
            if strict_cfl:
                raise CFLError(f"CFL violated at step {n} (|u|_max = {umax:g})")
        if not state.is_finite():
            raise NumericsError(f"non-finite state at step {n}", step_index=n)
        if n % snap_every == 0 or n == n_steps:
            traj.snapshots.append(state)
            traj.energies.append(energy(state))
            diss = drop_total / params.mu if params.mu > 0 else 0.0
            traj.dissipation.append(diss)
    return traj


def check_energy(traj: Trajectory, tol_E: float = 1e-8) -> EnergyReport:
    """
    Verify E(t) + mu * integral ||grad u||^2 <= E(0) (1 + tol_E) at every
    snapshot.  The dissipation integral is the exact viscous loss along the
    linear phases, so the check isolates spurious energy injection.
    """
    e0 = traj.energies[0]
    bound = e0 * (1.0 + tol_E)
    bad = []
    max_excess = 0.0
    for i, (e, d) in enumerate(zip(traj.energies, traj.dissipation)):
        total = e + traj.params.mu * d
        excess = total - e0
        max_excess = max(max_excess, excess)
        if total > bound:
            bad.append(i)
    return EnergyReport(
        ok=not bad,
        tol=tol_E,
        initial_energy=e0,
        max_excess=max_excess,
        violating_snapshots=tuple(bad),
    )


def run_metadata(params: ACParams, grid: Grid, dt: float, seed=None, **extra) -> str:
    """Flat key = value text block describing a run."""
    items = {
        "eps": params.eps,
        "beta": params.beta,
        "mu": params.mu,
        "L_h": grid.L_h,
        "N_h": grid.N_h,
        "N_v": grid.N_v,
        "dealias_fraction": grid.dealias_fraction,
        "dt": dt,
    }
    if seed is not None:
        items["seed"] = seed
    items.update(extra)
    return "\n".join(f"{k} = {v}" for k, v in items.items()) + "\n"
