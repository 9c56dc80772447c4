"""Rotated-rectangle geometry and direction-set bookkeeping.

Rectangles are closed, described by center, longest-side length ``h``,
eccentricity ``ecc`` (width = ``ecc * h``) and the angle ``theta`` of the
longest side.  Direction sets are finite, strictly descending slope lists in
[0, 1] with a distinguished subset of anchor slopes that carve the remaining
slopes into sectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Absolute tolerance on containment / clipping predicates.  Areas feed
# averages, not topology decisions, so plain floats with a fixed epsilon
# are enough.
CLIP_EPS = 1e-12


@dataclass(frozen=True)
class Rect:
    """Closed rectangle with longest side ``h`` pointing along ``theta``."""

    center: tuple[float, float]
    h: float
    ecc: float
    theta: float

    def __post_init__(self) -> None:
        if not (self.h > 0.0 and math.isfinite(self.h)):
            raise ValueError(f"h must be positive and finite, got {self.h}")
        if not (0.0 < self.ecc <= 1.0):
            raise ValueError(f"ecc must lie in (0, 1], got {self.ecc}")
        if not (0.0 <= self.theta < math.pi):
            raise ValueError(f"theta must lie in [0, pi), got {self.theta}")

    @property
    def w(self) -> float:
        return self.ecc * self.h

    @property
    def area(self) -> float:
        return self.ecc * self.h * self.h

    def axes(self) -> tuple[tuple[float, float], tuple[float, float]]:
        """Unit vectors along the long side and the short side."""
        c, s = math.cos(self.theta), math.sin(self.theta)
        return (c, s), (-s, c)

    def corners(self) -> np.ndarray:
        """Vertices in counterclockwise order, shape (4, 2)."""
        (ux, uy), (vx, vy) = self.axes()
        a, b = 0.5 * self.h, 0.5 * self.w
        cx, cy = self.center
        return np.array(
            [
                (cx - a * ux - b * vx, cy - a * uy - b * vy),
                (cx + a * ux - b * vx, cy + a * uy - b * vy),
                (cx + a * ux + b * vx, cy + a * uy + b * vy),
                (cx - a * ux + b * vx, cy - a * uy + b * vy),
            ]
        )


def rect_contains(r: Rect, p: tuple[float, float]) -> bool:
    """True iff ``p`` lies in the closed rectangle ``r``."""
    (ux, uy), (vx, vy) = r.axes()
    dx, dy = p[0] - r.center[0], p[1] - r.center[1]
    return (
        abs(dx * ux + dy * uy) <= 0.5 * r.h + CLIP_EPS
        and abs(dx * vx + dy * vy) <= 0.5 * r.w + CLIP_EPS
    )


def _clip_polygon_halfplane(poly, a, b, c):
    """Keep the part of ``poly`` with a*x + b*y <= c (Sutherland-Hodgman step)."""
    out = []
    k = len(poly)
    for i in range(k):
        px, py = poly[i]
        qx, qy = poly[(i + 1) % k]
        pin = a * px + b * py <= c + CLIP_EPS
        qin = a * qx + b * qy <= c + CLIP_EPS
        if pin:
            out.append((px, py))
        if pin != qin:
            denom = a * (qx - px) + b * (qy - py)
            if abs(denom) > CLIP_EPS:
                t = (c - a * px - b * py) / denom
                out.append((px + t * (qx - px), py + t * (qy - py)))
    return out


def _polygon_area(poly) -> float:
    if len(poly) < 3:
        return 0.0
    acc = 0.0
    k = len(poly)
    for i in range(k):
        x0, y0 = poly[i]
        x1, y1 = poly[(i + 1) % k]
        acc += x0 * y1 - x1 * y0
    return 0.5 * abs(acc)


def rect_intersection_area(r1: Rect, r2: Rect) -> float:
    """Area of ``r1 ∩ r2`` by clipping r1's quadrilateral against r2's half-planes."""
    poly = [tuple(v) for v in r1.corners()]
    (ux, uy), (vx, vy) = r2.axes()
    cx, cy = r2.center
    a2, b2 = 0.5 * r2.h, 0.5 * r2.w
    # The four half-planes |<p - c, u>| <= a and |<p - c, v>| <= b.
    for nx, ny, ext in ((ux, uy, a2), (-ux, -uy, a2), (vx, vy, b2), (-vx, -vy, b2)):
        poly = _clip_polygon_halfplane(poly, nx, ny, nx * cx + ny * cy + ext)
        if not poly:
            return 0.0
    return _polygon_area(poly)


def rect_double(r: Rect) -> Rect:
    """Same center and slope, both dimensions doubled."""
    return Rect(center=r.center, h=2.0 * r.h, ecc=r.ecc, theta=r.theta)


def rect_reslope(r: Rect, new_theta: float) -> Rect:
    """Same center, dimensions doubled, longest side re-pointed along ``new_theta``."""
    return Rect(center=r.center, h=2.0 * r.h, ecc=r.ecc, theta=new_theta)


def slope_to_angle(slope: float) -> float:
    return math.atan(slope)


@dataclass(frozen=True)
class DirectionSet:
    """Finite slope set with anchors and the induced sector partition.

    ``slopes`` is strictly descending in [0, 1].  ``anchor_indices`` are
    ascending indices into ``slopes``.  Sector 0 holds slopes above the top
    anchor (empty when the top slope is an anchor); sector j >= 1 is opened
    by the j-th anchor and runs down to, but not including, the next anchor.
    Anchors carry the index of the sector they open.
    """

    slopes: tuple[float, ...]
    anchor_indices: tuple[int, ...]
    sector_of: tuple[int, ...]
    angles: tuple[float, ...]

    @property
    def size(self) -> int:
        return len(self.slopes)

    @property
    def anchor_slopes(self) -> tuple[float, ...]:
        return tuple(self.slopes[i] for i in self.anchor_indices)

    @property
    def sector_count(self) -> int:
        return len(self.anchor_indices) + 1  # sector 0 plus one per anchor

    def sector_members(self, j: int) -> list[int]:
        return [i for i, s in enumerate(self.sector_of) if s == j]

    def sector_endpoint_indices(self, j: int) -> tuple[int, int]:
        """Slope indices of the two anchors delimiting sector ``j``.

        Outermost sectors only have one available anchor; it is used twice.
        """
        m = len(self.anchor_indices)
        if m == 0:
            raise ValueError("direction set has no anchors")
        if j <= 0:
            return self.anchor_indices[0], self.anchor_indices[0]
        if j >= m:
            return self.anchor_indices[m - 1], self.anchor_indices[m - 1]
        return self.anchor_indices[j - 1], self.anchor_indices[j]


def _build_direction_set(slopes: list[float], anchor_indices: list[int]) -> DirectionSet:
    arr = np.asarray(slopes, dtype=float)
    if arr.size == 0:
        raise ValueError("slope list must be nonempty")
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValueError("slopes must lie in [0, 1]")
    if arr.size > 1 and not np.all(np.diff(arr) < 0.0):
        raise ValueError("slopes must be strictly descending")
    anchor_indices = sorted(set(int(i) for i in anchor_indices))
    if anchor_indices and (anchor_indices[0] < 0 or anchor_indices[-1] >= arr.size):
        raise ValueError("anchor index out of range")
    # sector of slope i = number of anchors with slope >= slopes[i],
    # i.e. number of anchor indices <= i (slopes are descending).
    anchors_arr = np.asarray(anchor_indices, dtype=int)
    sector = [int(np.sum(anchors_arr <= i)) for i in range(arr.size)]
    return DirectionSet(
        slopes=tuple(float(s) for s in arr),
        anchor_indices=tuple(anchor_indices),
        sector_of=tuple(sector),
        angles=tuple(math.atan(float(s)) for s in arr),
    )


def make_directions(kind: str, *, count: int | None = None, ratio: float | None = None,
                    slopes=None, anchors="all", lo: float = 0.0, hi: float = 1.0) -> DirectionSet:
    """Build a DirectionSet.

    kind:
        "uniform"  -- ``count`` equally spaced slopes {hi * k / count} down to hi/count
                      (scaled into [lo, hi], defaults to (0, 1]).
        "lacunary" -- {ratio**k : k = 1..count}.
        "explicit" -- the given strictly monotone ``slopes``.
    anchors:
        "all" (every slope), ("every", k), or an explicit list of slope values.
    """
    if kind == "uniform":
        if count is None or count < 1:
            raise ValueError("uniform direction set needs count >= 1")
        vals = [lo + (hi - lo) * k / count for k in range(count, 0, -1)]
    elif kind == "lacunary":
        if count is None or count < 1:
            raise ValueError("lacunary direction set needs count >= 1")
        if ratio is None or not (0.0 < ratio < 1.0):
            raise ValueError("lacunary ratio must lie in (0, 1)")
        vals = [ratio**k for k in range(1, count + 1)]
    elif kind == "explicit":
        if slopes is None or len(list(slopes)) == 0:
            raise ValueError("explicit direction set needs a nonempty slope list")
        vals = [float(s) for s in slopes]
        if len(vals) > 1:
            diffs = np.diff(vals)
            if np.all(diffs > 0):
                vals = vals[::-1]
            elif not np.all(diffs < 0):
                raise ValueError("explicit slopes must be strictly monotone")
    else:
        raise ValueError(f"unknown direction kind {kind!r}")

    if anchors == "all":
        idx = list(range(len(vals)))
    elif isinstance(anchors, tuple) and len(anchors) == 2 and anchors[0] == "every":
        step = int(anchors[1])
        if step < 1:
            raise ValueError("anchor stride must be >= 1")
        idx = list(range(0, len(vals), step))
    else:
        wanted = [float(a) for a in anchors]
        idx = []
        for a in wanted:
            hits = [i for i, v in enumerate(vals) if abs(v - a) <= 1e-12]
            if not hits:
                raise ValueError(f"anchor slope {a} is not a member slope")
            idx.append(hits[0])
    return _build_direction_set(vals, idx)


def mc_intersection_area(r1: Rect, r2: Rect, samples: int, seed: int = 0) -> tuple[float, float]:
    """Monte Carlo estimate of |r1 ∩ r2| with its standard error.

    Points are drawn uniformly inside r1 (exact sampler in r1's own frame),
    so the estimate is area(r1) * P(point in r2).
    """
    rng = np.random.default_rng(seed)
    (ux, uy), (vx, vy) = r1.axes()
    a, b = 0.5 * r1.h, 0.5 * r1.w
    ta = rng.uniform(-a, a, size=samples)
    tb = rng.uniform(-b, b, size=samples)
    px = r1.center[0] + ta * ux + tb * vx
    py = r1.center[1] + ta * uy + tb * vy
    (u2x, u2y), (v2x, v2y) = r2.axes()
    dx, dy = px - r2.center[0], py - r2.center[1]
    inside = (np.abs(dx * u2x + dy * u2y) <= 0.5 * r2.h + CLIP_EPS) & (
        np.abs(dx * v2x + dy * v2y) <= 0.5 * r2.w + CLIP_EPS
    )
    p = float(np.mean(inside))
    est = r1.area * p
    # add-one smoothing keeps the error estimate honest at p in {0, 1}
    ps = (float(np.sum(inside)) + 1.0) / (samples + 2.0)
    se = r1.area * math.sqrt(ps * (1.0 - ps) / samples)
    return est, se
