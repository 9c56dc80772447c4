"""Raster fields on the unit square, summed-area tables, rectangle averages.

Pixel (i, j) of an n-raster covers [i/n, (i+1)/n) x [j/n, (j+1)/n); axis 0 is
x and axis 1 is y.  Fields are extended by zero outside the unit square.  A
rectangle average is the mean of the field over the pixel centers the
rectangle contains, divided by the rectangle's continuous area -- the same
normalization the kernel formulas use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import CLIP_EPS, Rect


@dataclass(frozen=True)
class GridField:
    """n x n raster of finite reals over the unit square."""

    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1] or v.shape[0] < 1:
            raise ValueError(f"values must be a square 2-d array, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def spacing(self) -> float:
        return 1.0 / self.n

    def l2_norm(self) -> float:
        return float(np.sqrt(np.sum(self.values**2) * self.spacing**2))

    def inner(self, other: "GridField") -> float:
        if other.n != self.n:
            raise ValueError("resolution mismatch")
        return float(np.sum(self.values * other.values) * self.spacing**2)

    def abs(self) -> "GridField":
        return GridField(np.abs(self.values))

    @classmethod
    def constant(cls, n: int, value: float = 1.0) -> "GridField":
        return cls(np.full((n, n), float(value)))

    def pixel_centers(self) -> tuple[np.ndarray, np.ndarray]:
        c = (np.arange(self.n) + 0.5) * self.spacing
        return np.meshgrid(c, c, indexing="ij")


def bilinear_sample(values: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Bilinear interpolation of an n x n raster at domain points, zero outside."""
    n = values.shape[0]
    s = 1.0 / n
    # Sample in pixel-center coordinates; pad by one zero ring for the
    # zero extension so edge queries interpolate toward 0.
    gx = np.asarray(x) / s - 0.5 + 1.0
    gy = np.asarray(y) / s - 0.5 + 1.0
    padded = np.zeros((n + 2, n + 2))
    padded[1:-1, 1:-1] = values
    i0 = np.clip(np.floor(gx).astype(int), 0, n)
    j0 = np.clip(np.floor(gy).astype(int), 0, n)
    fx = np.clip(gx - i0, 0.0, 1.0)
    fy = np.clip(gy - j0, 0.0, 1.0)
    out = (
        padded[i0, j0] * (1 - fx) * (1 - fy)
        + padded[i0 + 1, j0] * fx * (1 - fy)
        + padded[i0, j0 + 1] * (1 - fx) * fy
        + padded[i0 + 1, j0 + 1] * fx * fy
    )
    far = (gx < -1) | (gx > n + 1) | (gy < -1) | (gy > n + 1)
    if np.any(far):
        out = np.where(far, 0.0, out)
    return out


@dataclass(frozen=True)
class SummedAreaTable:
    """Cumulative sums S[i, j] = sum of values[:i, :j]; shape (n+1, n+1)."""

    table: np.ndarray

    @property
    def n(self) -> int:
        return self.table.shape[0] - 1

    def box_sum(self, i0: int, i1: int, j0: int, j1: int) -> float:
        """Sum of pixel values over index ranges [i0, i1) x [j0, j1)."""
        n = self.n
        i0, i1 = max(i0, 0), min(i1, n)
        j0, j1 = max(j0, 0), min(j1, n)
        if i0 >= i1 or j0 >= j1:
            return 0.0
        t = self.table
        return float(t[i1, j1] - t[i0, j1] - t[i1, j0] + t[i0, j0])


def sat_build(f: GridField) -> SummedAreaTable:
    t = np.zeros((f.n + 1, f.n + 1))
    np.cumsum(np.cumsum(f.values, axis=0), axis=1, out=t[1:, 1:])
    return SummedAreaTable(t)


def _contained_pixel_block(f_n: int, r: Rect):
    """Index ranges and membership mask of pixel centers inside ``r``.

    Returns (i_lo, j_lo, mask) where mask covers the bounding block of the
    rectangle clipped to the raster; None when the block misses the raster.
    """
    s = 1.0 / f_n
    (ux, uy), (vx, vy) = r.axes()
    a, b = 0.5 * r.h, 0.5 * r.w
    rx = a * abs(ux) + b * abs(vx)
    ry = a * abs(uy) + b * abs(vy)
    i_lo = max(int(math.floor((r.center[0] - rx) / s - 0.5)), 0)
    i_hi = min(int(math.ceil((r.center[0] + rx) / s - 0.5)) + 1, f_n)
    j_lo = max(int(math.floor((r.center[1] - ry) / s - 0.5)), 0)
    j_hi = min(int(math.ceil((r.center[1] + ry) / s - 0.5)) + 1, f_n)
    if i_lo >= i_hi or j_lo >= j_hi:
        return None
    ci = (np.arange(i_lo, i_hi) + 0.5) * s - r.center[0]
    cj = (np.arange(j_lo, j_hi) + 0.5) * s - r.center[1]
    dx, dy = np.meshgrid(ci, cj, indexing="ij")
    mask = (np.abs(dx * ux + dy * uy) <= a + CLIP_EPS) & (
        np.abs(dx * vx + dy * vy) <= b + CLIP_EPS
    )
    return i_lo, j_lo, mask


def _contains_any_lattice_center(f_n: int, r: Rect) -> bool:
    """Whether ``r`` contains any center of the (unclipped) pixel lattice."""
    s = 1.0 / f_n
    if min(r.h, r.w) >= s * math.sqrt(2.0):
        return True  # holds a disk wider than a pixel cell's circumradius
    (ux, uy), (vx, vy) = r.axes()
    a, b = 0.5 * r.h, 0.5 * r.w
    rx = a * abs(ux) + b * abs(vx)
    ry = a * abs(uy) + b * abs(vy)
    i_lo = int(math.floor((r.center[0] - rx) / s - 0.5))
    i_hi = int(math.ceil((r.center[0] + rx) / s - 0.5)) + 1
    j_lo = int(math.floor((r.center[1] - ry) / s - 0.5))
    j_hi = int(math.ceil((r.center[1] + ry) / s - 0.5)) + 1
    ci = (np.arange(i_lo, i_hi) + 0.5) * s - r.center[0]
    cj = (np.arange(j_lo, j_hi) + 0.5) * s - r.center[1]
    dx, dy = np.meshgrid(ci, cj, indexing="ij")
    mask = (np.abs(dx * ux + dy * uy) <= a + CLIP_EPS) & (
        np.abs(dx * vx + dy * vy) <= b + CLIP_EPS
    )
    return bool(np.any(mask))


def rect_average_exact(f: GridField, r: Rect) -> float:
    """Mean of ``f`` over pixel centers in ``r`` against the continuous area.

    Zero extension: centers outside the raster contribute nothing but the
    denominator stays ecc * h**2.  A rectangle capturing no lattice center at
    all falls back to bilinear interpolation at its center.
    """
    block = _contained_pixel_block(f.n, r)
    s = f.spacing
    if block is not None:
        i_lo, j_lo, mask = block
        if np.any(mask):
            sub = f.values[i_lo : i_lo + mask.shape[0], j_lo : j_lo + mask.shape[1]]
            return float(np.sum(sub[mask])) * s * s / r.area
    if _contains_any_lattice_center(f.n, r):
        return 0.0  # only out-of-domain centers, all zero by extension
    return float(bilinear_sample(f.values, np.array(r.center[0]), np.array(r.center[1])))


class RotatedSatBundle:
    """Per-direction resampled rasters with summed-area tables.

    For each prepared angle the field is resampled (bilinear, zero outside)
    on a grid rotated by -theta about the domain center, so rectangles with
    that slope become axis-aligned boxes answerable from one table.
    """

    def __init__(self, f: GridField, thetas, margin: float = 0.75):
        self.field = f
        self.margin = float(margin)
        self.entries: dict[float, tuple] = {}
        n = f.n
        s = f.spacing
        # canvas on the same lattice as the raster (origin an integer pixel
        # count below 0), so the theta = 0 entry is an exact copy
        pad = int(math.ceil((0.5 * math.sqrt(2.0) - 0.5 + self.margin) / s))
        m = n + 2 * pad
        o = -pad * s
        for theta in thetas:
            theta = float(theta)
            c, sn = math.cos(theta), math.sin(theta)
            q = o + (np.arange(m) + 0.5) * s
            qx, qy = np.meshgrid(q - 0.5, q - 0.5, indexing="ij")
            # rotated coords -> original coords: p = c0 + Rot(theta) (q - c0)
            px = 0.5 + c * qx - sn * qy
            py = 0.5 + sn * qx + c * qy
            vals = bilinear_sample(f.values, px, py)
            table = np.zeros((m + 1, m + 1))
            np.cumsum(np.cumsum(vals, axis=0), axis=1, out=table[1:, 1:])
            self.entries[theta] = (o, m, table)

    def _lookup(self, theta: float):
        for key, entry in self.entries.items():
            if abs(key - theta) <= 1e-12:
                return entry
        raise KeyError(f"direction not prepared: theta={theta}")

    def _integral(self, theta: float, qc: tuple[float, float], hx: float, hy: float) -> float:
        o, m, table = self._lookup(theta)
        s = self.field.spacing
        # Fractional 4-corner lookup on the SAT lattice.
        xs = (np.array([qc[0] - hx, qc[0] + hx]) - o) / s
        ys = (np.array([qc[1] - hy, qc[1] + hy]) - o) / s
        xs = np.clip(xs, 0.0, m)
        ys = np.clip(ys, 0.0, m)
        i0 = np.minimum(np.floor(xs).astype(int), m - 1)
        j0 = np.minimum(np.floor(ys).astype(int), m - 1)
        fx = xs - i0
        fy = ys - j0
        corners = np.empty((2, 2))
        for ai in range(2):
            for aj in range(2):
                t00 = table[i0[ai], j0[aj]]
                t10 = table[i0[ai] + 1, j0[aj]]
                t01 = table[i0[ai], j0[aj] + 1]
                t11 = table[i0[ai] + 1, j0[aj] + 1]
                corners[ai, aj] = (
                    t00 * (1 - fx[ai]) * (1 - fy[aj])
                    + t10 * fx[ai] * (1 - fy[aj])
                    + t01 * (1 - fx[ai]) * fy[aj]
                    + t11 * fx[ai] * fy[aj]
                )
        return (corners[1, 1] - corners[0, 1] - corners[1, 0] + corners[0, 0]) * s * s


def rect_average_fast(bundle: RotatedSatBundle, r: Rect) -> float:
    """Approximate rect average from a prepared rotated table.

    Relative error is bounded by about 3 * spacing / min(side lengths) on
    fields of bounded variation; rectangles narrower than 3 pixels fall back
    to the exact path.
    """
    f = bundle.field
    if min(r.h, r.w) < 3.0 * f.spacing:
        return rect_average_exact(f, r)
    theta = r.theta
    c, sn = math.cos(theta), math.sin(theta)
    dx, dy = r.center[0] - 0.5, r.center[1] - 0.5
    qc = (0.5 + c * dx + sn * dy, 0.5 - sn * dx + c * dy)
    integral = bundle._integral(theta, qc, 0.5 * r.h, 0.5 * r.w)
    return integral / r.area


def save_field_text(f: GridField, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"n={f.n}\n")
        np.savetxt(fh, f.values, fmt="%.17g")


def load_field_text(path) -> GridField:
    with open(path) as fh:
        header = fh.readline().strip()
        if not header.startswith("n="):
            raise ValueError(f"bad field header {header!r}")
        n = int(header[2:])
        vals = np.loadtxt(fh)
    vals = np.asarray(vals, dtype=float).reshape(n, n)
    return GridField(vals)


def save_field_binary(f: GridField, path) -> None:
    with open(path, "wb") as fh:
        fh.write(f"n={f.n}\n".encode())
        fh.write(np.ascontiguousarray(f.values, dtype="<f8").tobytes())


def load_field_binary(path) -> GridField:
    with open(path, "rb") as fh:
        header = fh.readline().strip().decode()
        if not header.startswith("n="):
            raise ValueError(f"bad field header {header!r}")
        n = int(header[2:])
        vals = np.frombuffer(fh.read(), dtype="<f8").reshape(n, n).copy()
    return GridField(vals)
