"""Dense TT* kernel assembly and the same-sector / cross-sector split.

The composition TT* of a linearized averaging operator has the kernel
``|R_x ∩ R_z| / (|R_x| |R_z|)``.  Assembly is dense and therefore capped at
small rasters; entries carry the discrete integration weight spacing**2 so
the matrix acts directly on flattened fields.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import rect_intersection_area
from .grid import GridField, _contained_pixel_block
from .operators import Selector

DENSE_CAP = 32


@dataclass(frozen=True)
class KernelMatrix:
    """Symmetric PSD kernel with the integration weight folded in."""

    matrix: np.ndarray  # (n*n, n*n)
    sectors: np.ndarray  # (n*n,), sector index per pixel
    n: int

    def spectral_norm(self) -> float:
        return float(np.max(np.abs(np.linalg.eigvalsh(self.matrix))))

    def min_eigenvalue(self) -> float:
        return float(np.min(np.linalg.eigvalsh(self.matrix)))

    def apply(self, values: np.ndarray) -> np.ndarray:
        return (self.matrix @ values.ravel()).reshape(self.n, self.n)


def ttstar_kernel(phi: Selector, x: tuple[int, int], z: tuple[int, int]) -> float:
    """Kernel value for one pixel pair from clipped intersection areas."""
    rx = phi.rect_at(*x)
    rz = phi.rect_at(*z)
    return rect_intersection_area(rx, rz) / (rx.area * rz.area)


def dense_T_matrix(phi: Selector) -> np.ndarray:
    """Row x holds chi_{R_x}(y) * spacing**2 / |R_x| over pixel centers y.

    Direct geometric assembly (no FFT); this is the oracle the fast paths
    are checked against.
    """
    n = phi.n
    if n > DENSE_CAP:
        raise ValueError(f"dense assembly capped at n = {DENSE_CAP}, got {n}")
    s2 = (1.0 / n) ** 2
    A = np.zeros((n * n, n * n))
    for i in range(n):
        for j in range(n):
            r = phi.rect_at(i, j)
            block = _contained_pixel_block(n, r)
            if block is None:
                continue
            i_lo, j_lo, mask = block
            w = s2 / r.area
            row = np.zeros((n, n))
            row[i_lo : i_lo + mask.shape[0], j_lo : j_lo + mask.shape[1]] = mask * w
            A[i * n + j] = row.ravel()
    return A


def ttstar_matrix(phi: Selector, mode: str = "pixelated") -> KernelMatrix:
    """Dense TT*: pixelated (shared-pixel areas) or geometric (clipped areas).

    The pixelated assembly equals the composition of the discrete T and T*
    matrices exactly; the geometric one replaces pixel counting by polygon
    clipping and differs by a discretization term.
    """
    n = phi.n
    if n > DENSE_CAP:
        raise ValueError(f"dense assembly capped at n = {DENSE_CAP}, got {n}")
    sectors = phi.sector_indices().ravel()
    if mode == "pixelated":
        A = dense_T_matrix(phi)
        return KernelMatrix(A @ A.T, sectors, n)
    if mode != "geometric":
        raise ValueError(f"unknown assembly mode {mode!r}")
    s2 = (1.0 / n) ** 2
    N = n * n
    rects = [phi.rect_at(i, j) for i in range(n) for j in range(n)]
    centers = np.array([r.center for r in rects])
    radii = np.array([0.5 * np.hypot(r.h, r.w) for r in rects])
    K = np.zeros((N, N))
    for x in range(N):
        rx = rects[x]
        dx = centers[x + 1 :] - centers[x]
        close = np.nonzero(np.hypot(dx[:, 0], dx[:, 1]) <= radii[x] + radii[x + 1 :])[0]
        K[x, x] = s2 / rx.area
        for off in close:
            z = x + 1 + int(off)
            rz = rects[z]
            val = rect_intersection_area(rx, rz) / (rx.area * rz.area) * s2
            K[x, z] = val
            K[z, x] = val
    return KernelMatrix(K, sectors, n)


def split_K(phi: Selector, K: KernelMatrix) -> tuple[KernelMatrix, KernelMatrix]:
    """Same-sector block part K1 and the cross-sector remainder K2 = K - K1."""
    sec = K.sectors
    same = sec[:, None] == sec[None, :]
    K1 = np.where(same, K.matrix, 0.0)
    return (
        KernelMatrix(K1, sec, K.n),
        KernelMatrix(K.matrix - K1, sec, K.n),
    )


def dump_triplets(K: KernelMatrix, path) -> None:
    with open(path, "w") as fh:
        for r in range(K.matrix.shape[0]):
            row = K.matrix[r]
            for c in np.nonzero(row)[0]:
                fh.write(f"{r} {c} {float(row[c])!r}\n")


def ttstar_apply(phi: Selector, f: GridField) -> GridField:
    """Matrix-free TT* through the linearized operator pair."""
    from .operators import apply_T, apply_T_adjoint

    return apply_T(phi, apply_T_adjoint(phi, f))
