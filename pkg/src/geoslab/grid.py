"""
Spectral grid for the slab: a periodic horizontal box crossed with the unit
vertical torus, with vertical parity encoded as cosine/sine series.

Even quantities (pressure, horizontal velocity) live on the cosine basis
cos(2*pi*k*x3); the odd vertical velocity lives on sin(2*pi*k*x3).  This
realizes the complete-slip slab through its symmetry extension without ever
storing the reflected half.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["Grid", "make_grid"]


@dataclass(frozen=True)
class Grid:
    """
    Pre-computed wavenumber tables for the periodic slab.

    Parameters
    ----------
    L_h : float
        Horizontal box side length (the box is [0, L_h)^2).
    N_h : int
        Horizontal points per axis; even.
    N_v : int
        Number of vertical basis modes k = 0..N_v-1 on the unit torus.
    dealias_fraction : float
        Retained-mode fraction for the nonlinear-product mask (default 2/3).
    """

    L_h: float
    N_h: int
    N_v: int
    dealias_fraction: float = 2.0 / 3.0

    def __post_init__(self) -> None:
        if self.N_h % 2 != 0 or self.N_h < 2:
            raise ValueError(f"N_h must be even and >= 2, got {self.N_h}")
        if self.N_v < 1:
            raise ValueError(f"N_v must be >= 1, got {self.N_v}")
        if not self.L_h > 0:
            raise ValueError(f"L_h must be positive, got {self.L_h}")
        if not 0.0 < self.dealias_fraction <= 1.0:
            raise ValueError("dealias_fraction must lie in (0, 1]")

        set_ = object.__setattr__

        # Signed integer horizontal mode numbers in FFT layout, and wavenumbers
        # xi = 2*pi*n/L_h.
        n = np.rint(np.fft.fftfreq(self.N_h) * self.N_h).astype(np.int64)
        set_(self, "modes_h", n)
        xi_axis = 2.0 * np.pi * n / self.L_h
        xi1, xi2 = np.meshgrid(xi_axis, xi_axis, indexing="ij")
        set_(self, "xi1", xi1)
        set_(self, "xi2", xi2)
        set_(self, "xi_sq", xi1**2 + xi2**2)

        # Vertical: basis index k, wavenumber kappa3 = 2*pi*k, and a physical
        # sampling of the unit torus fine enough to hold products exactly.
        kz = np.arange(self.N_v, dtype=np.int64)
        set_(self, "modes_v", kz)
        kappa3 = 2.0 * np.pi * kz.astype(np.float64)
        set_(self, "kappa3", kappa3)
        n3 = 2 * self.N_v
        set_(self, "N3", n3)

        x_h = np.arange(self.N_h) * (self.L_h / self.N_h)
        set_(self, "x_h", x_h)
        x3 = np.arange(n3) / n3
        set_(self, "x3", x3)

        # Synthesis bases (mode, point) and the matching analysis matrices;
        # analysis is exact for content up to mode N_v-1 on 2*N_v samples.
        phase = np.outer(kappa3, x3)
        cos_b = np.cos(phase)
        sin_b = np.sin(phase)
        set_(self, "cos_basis", cos_b)
        set_(self, "sin_basis", sin_b)
        cos_a = cos_b * (2.0 / n3)
        cos_a[0, :] = 1.0 / n3
        set_(self, "cos_analysis", cos_a)
        set_(self, "sin_analysis", sin_b * (2.0 / n3))
        # Complex copies keep the BLAS path of the transforms cast-free.
        set_(self, "cos_basis_c", cos_b.astype(np.complex128))
        set_(self, "sin_basis_c", sin_b.astype(np.complex128))
        set_(self, "cos_analysis_c", cos_a.astype(np.complex128))
        set_(self, "sin_analysis_c", (sin_b * (2.0 / n3)).astype(np.complex128))

        # |kappa|^2 over the full mode set, used by Laplacian and viscosity.
        set_(self, "kappa_sq", self.xi_sq[:, :, None] + kappa3[None, None, :] ** 2)

        # Dealias mask: horizontal modes up to floor(N_h/2 * fraction);
        # vertical cut additionally capped so quadratic products in the
        # retained band stay alias-free on the N3-point sampling.
        h_cut = int(np.floor((self.N_h // 2) * self.dealias_fraction))
        v_cut = min(int(np.floor(self.N_v * self.dealias_fraction)), (n3 - 1) // 3)
        v_cut = min(v_cut, self.N_v - 1)
        set_(self, "h_cut", h_cut)
        set_(self, "v_cut", v_cut)
        mask_h = (np.abs(n)[:, None] <= h_cut) & (np.abs(n)[None, :] <= h_cut)
        mask = mask_h[:, :, None] & (kz[None, None, :] <= v_cut)
        mask.setflags(write=False)
        set_(self, "dealias_mask", mask)

        # Parseval weights of the vertical basis functions on the unit torus.
        w_cos = np.full(self.N_v, 0.5)
        w_cos[0] = 1.0
        w_sin = np.full(self.N_v, 0.5)
        w_sin[0] = 0.0
        set_(self, "w_cos", w_cos)
        set_(self, "w_sin", w_sin)

    # -- helpers -----------------------------------------------------------

    @property
    def coef_shape(self) -> tuple[int, int, int]:
        return (self.N_h, self.N_h, self.N_v)

    @property
    def phys_shape(self) -> tuple[int, int, int]:
        return (self.N_h, self.N_h, self.N3)

    def cache_key(self) -> tuple:
        return (self.L_h, self.N_h, self.N_v, self.dealias_fraction)

    def horizontal(self) -> "Grid":
        """The matching purely horizontal grid (2D fields, N_v = 1)."""
        return Grid(self.L_h, self.N_h, 1, self.dealias_fraction)

    def vertical_weights(self, parity: str) -> np.ndarray:
        if parity == "even":
            return self.w_cos
        if parity == "odd":
            return self.w_sin
        raise ValueError(f"unknown parity {parity!r}")


def make_grid(L_h: float, N_h: int, N_v: int, dealias_fraction: float = 2.0 / 3.0) -> Grid:
    """
    Build a validated simulation grid.

    Raises
    ------
    ValueError
        For odd or too-small N_h, N_v < 4, or non-positive sizes.
    """
    if N_h % 2 != 0:
        raise ValueError(f"N_h must be even, got {N_h}")
    if N_h < 8:
        raise ValueError(f"N_h must be >= 8, got {N_h}")
    if N_v < 4:
        raise ValueError(f"N_v must be >= 4, got {N_v}")
    return Grid(float(L_h), int(N_h), int(N_v), float(dealias_fraction))
