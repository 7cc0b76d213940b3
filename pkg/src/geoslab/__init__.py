"""
geoslab: pseudo-spectral tools for a rotating, artificially compressible
fluid on a slab, reference solvers for its incompressible and
quasi-geostrophic limits, and the epsilon-sweep studies that probe the
limit behavior numerically.
"""

__version__ = "0.1.0"

from .grid import Grid, make_grid
from .fields import (
    ScalarField,
    VectorField,
    HelmholtzParts,
    transform,
    as_coefficients,
    as_physical,
    l2_norm,
    l2_inner,
    VELOCITY_PARITIES,
)
from .operators import (
    diff,
    grad,
    div,
    laplacian,
    grad_h,
    div_h,
    laplacian_h,
    leray_decompose,
    leray_p,
    leray_q,
    vertical_average,
    oscillation,
    vertical_antiderivative,
    vorticity_component,
    dealias,
    embed_horizontal,
)
from .snapshot import save_snapshot, load_snapshot

__all__ = [
    "Grid",
    "make_grid",
    "ScalarField",
    "VectorField",
    "HelmholtzParts",
    "transform",
    "as_coefficients",
    "as_physical",
    "l2_norm",
    "l2_inner",
    "VELOCITY_PARITIES",
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
    "save_snapshot",
    "load_snapshot",
    "__version__",
]
