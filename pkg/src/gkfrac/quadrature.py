"""Graded meshes and product integration against the Abel kernel (u-v)^(alpha-1).

The mesh nodes u_j = L*(j/N)^r cluster near u = 0, where both the kernel and
the admissible data (powers u^sigma with sigma > -1) may be singular.  The
convolution weights interpolate the data linearly per panel and integrate the
kernel moments in closed form, so the only discretisation error is the
interpolation error of the data.

Weight matrices are assembled once per (mesh, order) pair and cached on the
mesh, making repeated convolutions (one per Picard sweep) a single mat-vec.
The assembly is the O(N^2) hot loop; a compiled extension is preferred and a
numpy fallback is selected at import when the extension is unavailable or
GKFRAC_PURE is set in the environment.
"""

import math
import os
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

if os.environ.get("GKFRAC_PURE"):
    from . import _abel_fallback as _impl

    COMPILED = False
else:
    try:
        from . import _abel as _impl  # type: ignore[no-redef]

        COMPILED = True
    except ImportError:
        from . import _abel_fallback as _impl  # type: ignore[no-redef]

        COMPILED = False


class MeshError(ValueError):
    """Raised for invalid mesh parameters or mesh/data mismatches."""


def kernel_backend() -> str:
    """Name of the weight-assembly backend selected at import."""
    return "compiled" if COMPILED else "numpy"


@dataclass(frozen=True)
class GradedMesh:
    """Nodes u_j = L*(j/N)^r on [0, L], j = 0..N.

    r = 1 is the uniform mesh; r > 1 concentrates nodes at u = 0.  Instances
    are immutable; the private dict caches assembled weight matrices per
    convolution order.
    """

    L: float
    N: int
    r: float
    nodes: np.ndarray
    _weights: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self.nodes.setflags(write=False)

    def __len__(self) -> int:
        return self.N + 1


def build_mesh(L: float, N: int, r: float = 3.0) -> GradedMesh:
    """Build the graded mesh with nodes L*(j/N)^r."""
    if not L > 0:
        raise MeshError(f"mesh length must be positive, got {L}")
    if N < 2:
        raise MeshError(f"node count N must be >= 2, got {N}")
    if not r >= 1:
        raise MeshError(f"grading exponent must be >= 1, got {r}")
    nodes = L * (np.arange(N + 1, dtype=np.float64) / N) ** r
    return GradedMesh(L=float(L), N=int(N), r=float(r), nodes=nodes)


class PanelMoments(NamedTuple):
    m0: float
    m1: float


def panel_moments(T: float, j: int, mesh: GradedMesh, alpha: float) -> PanelMoments:
    """Exact moments of (T-v)^(alpha-1) and (T-v)^(alpha-1)*v over panel j.

    Requires u_{j+1} <= T.  Closed-form antiderivatives in (T-v)^alpha and
    (T-v)^(alpha+1); finite even when T coincides with the panel's right edge.
    """
    _check_order(alpha)
    if j < 0 or j >= mesh.N:
        raise MeshError(f"panel index {j} out of range for N={mesh.N}")
    p = float(mesh.nodes[j])
    q = float(mesh.nodes[j + 1])
    if q > T:
        raise MeshError(f"panel [{p}, {q}] lies right of evaluation point T={T}")
    d0 = T - p
    d1 = T - q
    m0 = (d0**alpha - d1**alpha) / alpha
    m1 = T * m0 - (d0 ** (alpha + 1) - d1 ** (alpha + 1)) / (alpha + 1)
    return PanelMoments(m0=m0, m1=m1)


def abel_weight_matrix(mesh: GradedMesh, alpha: float) -> np.ndarray:
    """Cached dense weight matrix: (W @ g)[i] = (1/Gamma(a)) * (K*g)(u_i)."""
    _check_order(alpha)
    w = mesh._weights.get(alpha)
    if w is None:
        w = _impl.assemble_weights(mesh.nodes, alpha, 1.0 / math.gamma(alpha))
        w.setflags(write=False)
        mesh._weights[alpha] = w
    return w


def abel_convolve(values, alpha: float, mesh: GradedMesh) -> np.ndarray:
    """Node values of (1/Gamma(a)) int_0^{u_i} (u_i-v)^(a-1) g(v) dv.

    g is the piecewise-linear interpolant of `values` on the mesh; node 0 of
    the output is 0 by construction.
    """
    g = np.asarray(values, dtype=np.float64)
    if g.shape != (mesh.N + 1,):
        raise MeshError(
            f"value sequence has length {g.shape}, mesh has {mesh.N + 1} nodes"
        )
    return abel_weight_matrix(mesh, alpha) @ g


def _check_order(alpha: float) -> None:
    if not 0 < alpha <= 1:
        raise ValueError(f"convolution order must be in (0, 1], got {alpha}")
