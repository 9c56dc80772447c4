"""Maximal and linearized averaging operators acting on raster fields.

The admissible rectangle family of a grid is finite: directions from a
DirectionSet, dimensions from a ScaleGrid, and a snapped lattice of
translation offsets realizing the "x belongs to R" positions.  Every
fixed-shape member is a stencil correlation (see ``_engine``), so maximal
operators are running maxima over shifted correlation fields and the
linearized operator T gathers each pixel's own choice.  Adjoints scatter
through the transposed convolution, which makes <Tf, g> = <f, T*g> hold to
FFT roundoff.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._engine import ConvEngine, build_stencil, snapped_offsets
from .geometry import DirectionSet, Rect
from .grid import GridField


@dataclass(frozen=True)
class ScaleGrid:
    """Dyadic-style lists of rectangle dimensions plus the offset resolution."""

    heights: tuple[float, ...]
    eccs: tuple[float, ...]
    offsets_per_axis: int = 3

    def __post_init__(self) -> None:
        hs = tuple(float(h) for h in self.heights)
        es = tuple(float(e) for e in self.eccs)
        if not hs or not es:
            raise ValueError("heights and eccs must be nonempty")
        if any(h <= 0 for h in hs) or any(not (0 < e <= 1) for e in es):
            raise ValueError("heights must be positive, eccs in (0, 1]")
        if any(b >= a for a, b in zip(hs, hs[1:])) or any(b >= a for a, b in zip(es, es[1:])):
            raise ValueError("heights and eccs must be strictly descending")
        if self.offsets_per_axis < 1 or self.offsets_per_axis % 2 == 0:
            raise ValueError("offsets_per_axis must be odd and >= 1")
        object.__setattr__(self, "heights", hs)
        object.__setattr__(self, "eccs", es)

    @classmethod
    def dyadic(cls, h_max: float = 0.25, num_heights: int = 2, num_eccs: int = 3,
               offsets_per_axis: int = 3, ecc_step: int = 1) -> "ScaleGrid":
        heights = tuple(h_max * 2.0**-k for k in range(num_heights))
        eccs = tuple(2.0 ** -(ecc_step * k) for k in range(1, num_eccs + 1))
        return cls(heights, eccs, offsets_per_axis)

    def feasible_pairs(self, spacing: float) -> list[tuple[int, int]]:
        """(height index, ecc index) pairs resolvable at this spacing."""
        return [
            (hi, ei)
            for hi, h in enumerate(self.heights)
            for ei, e in enumerate(self.eccs)
            if e * h >= spacing * (1.0 - 1e-12)
        ]


@dataclass(frozen=True)
class RectParam:
    """Centered-rectangle parameter triple with its log weight."""

    h: float
    theta: float
    ecc: float

    def __post_init__(self) -> None:
        if not (self.h > 0):
            raise ValueError("h must be positive")
        if not (0 < self.ecc <= 1):
            raise ValueError("ecc must lie in (0, 1]")
        if not (0 <= self.theta < math.pi):
            raise ValueError("theta must lie in [0, pi)")

    @property
    def weight(self) -> float:
        return 1.0 + abs(math.log(self.ecc))


class _Group:
    """One (direction, height, ecc) shape with its offsets."""

    __slots__ = ("d_pos", "h_pos", "e_pos", "dir_index", "theta", "h", "ecc",
                 "area", "offsets", "code")

    def __init__(self, d_pos, h_pos, e_pos, dir_index, theta, h, ecc, offsets, code):
        self.d_pos = d_pos
        self.h_pos = h_pos
        self.e_pos = e_pos
        self.dir_index = dir_index
        self.theta = theta
        self.h = h
        self.ecc = ecc
        self.area = ecc * h * h
        self.offsets = offsets
        self.code = code


class RectFamily:
    """Enumerated admissible rectangle family for an n-raster."""

    def __init__(self, n: int, dirs: DirectionSet, scales: ScaleGrid, *,
                 sector_filter: int | None = None, anchors_only: bool = False):
        self.n = n
        self.dirs = dirs
        self.scales = scales
        spacing = 1.0 / n

        if anchors_only and sector_filter is not None:
            raise ValueError("sector_filter and anchors_only are exclusive")
        if anchors_only:
            admitted = list(dirs.anchor_indices)
        elif sector_filter is not None:
            admitted = dirs.sector_members(sector_filter)
        else:
            admitted = list(range(dirs.size))
        if not admitted:
            raise ValueError("filtered direction set is empty")
        self.dir_indices = tuple(admitted)

        pairs = scales.feasible_pairs(spacing)
        if not pairs:
            raise ValueError("no (height, ecc) pair is resolvable at this grid spacing")
        self.pairs = pairs

        self.num_h = len(scales.heights)
        self.num_e = len(scales.eccs)
        self.groups: list[_Group] = []
        self._group_by_code: dict[int, _Group] = {}
        for d_pos, dir_index in enumerate(self.dir_indices):
            theta = dirs.angles[dir_index]
            for hi, ei in pairs:
                h, e = scales.heights[hi], scales.eccs[ei]
                offs = snapped_offsets(n, theta, h, e, scales.offsets_per_axis)
                code = (d_pos * self.num_h + hi) * self.num_e + ei
                g = _Group(d_pos, hi, ei, dir_index, theta, h, e, offs, code)
                self.groups.append(g)
                self._group_by_code[code] = g

        # Pad sizes use the angle-free extent bound (a + b)/s, which covers
        # every direction, plus the largest snapped offset.
        h_max = max(scales.heights[hi] for hi, _ in pairs)
        ext = 0.0
        omax = 0
        for g in self.groups:
            ext = max(ext, 0.5 * g.h * (1.0 + g.ecc))
            if g.offsets.size:
                omax = max(omax, int(np.max(np.abs(g.offsets))))
        self._pad_base = n + int(math.ceil(ext / spacing)) + omax + 3
        self._pad_doubled = n + int(math.ceil(2.0 * ext / spacing)) + omax + 3
        self._engines: dict[str, ConvEngine] = {}
        self.h_max = h_max

    def engine(self, doubled: bool = False) -> ConvEngine:
        key = "doubled" if doubled else "base"
        eng = self._engines.get(key)
        if eng is None:
            eng = ConvEngine(self.n, self._pad_doubled if doubled else self._pad_base)
            self._engines[key] = eng
        return eng

    def group(self, code: int) -> _Group:
        return self._group_by_code[code]

    def _pixel_index(self):
        n = self.n
        pi = np.repeat(np.arange(n, dtype=np.int64), n)
        pj = np.tile(np.arange(n, dtype=np.int64), n)
        return pi, pj

    # -- maximal operator and linearization ---------------------------------

    def maximal(self, values: np.ndarray, return_selector: bool = False):
        n = self.n
        g = np.abs(values)
        eng = self.engine()
        fhat = eng.field_fft(g)
        s2 = (1.0 / n) ** 2
        best = np.full((n, n), -np.inf)
        if return_selector:
            sel_code = np.zeros((n, n), dtype=np.int32)
            sel_off = np.zeros((n, n), dtype=np.int16)
        memo: dict[bytes, np.ndarray] = {}
        for grp in self.groups:
            st = build_stencil(n, grp.theta, grp.h, grp.ecc)
            C = memo.get(st.digest)
            if C is None:
                C = eng.correlate(fhat, st)
                memo[st.digest] = C
            w = s2 / grp.area
            for op, (oi, oj) in enumerate(grp.offsets):
                cand = eng.window(C, int(oi), int(oj)) * w
                if return_selector:
                    better = cand > best
                    np.copyto(best, cand, where=better)
                    np.copyto(sel_code, grp.code, where=better)
                    np.copyto(sel_off, op, where=better)
                else:
                    np.maximum(best, cand, out=best)
        np.maximum(best, 0.0, out=best)
        if return_selector:
            return best, Selector(self, sel_code, sel_off)
        return best

    # -- linearized operator and adjoint -------------------------------------

    def apply_selector(self, sel: "Selector", values: np.ndarray) -> np.ndarray:
        n = self.n
        eng = self.engine()
        fhat = eng.field_fft(values)
        s2 = (1.0 / n) ** 2
        out = np.empty(n * n)
        code_flat = sel.code.ravel()
        off_flat = sel.off.ravel()
        pi, pj = self._pixel_index()
        memo: dict[bytes, np.ndarray] = {}
        for code in np.unique(code_flat):
            grp = self._group_by_code[int(code)]
            st = build_stencil(n, grp.theta, grp.h, grp.ecc)
            C = memo.get(st.digest)
            if C is None:
                C = eng.correlate(fhat, st)
                memo[st.digest] = C
            pix = np.nonzero(code_flat == code)[0]
            offs = grp.offsets[off_flat[pix]]
            out[pix] = eng.gather_flat(C, pi[pix], pj[pix], offs[:, 0], offs[:, 1]) * (
                s2 / grp.area
            )
        return out.reshape(n, n)

    def apply_selector_adjoint(self, sel: "Selector", values: np.ndarray) -> np.ndarray:
        n = self.n
        eng = self.engine()
        s2 = (1.0 / n) ** 2
        g_flat = np.asarray(values).ravel()
        code_flat = sel.code.ravel()
        off_flat = sel.off.ravel()
        pi, pj = self._pixel_index()
        acc_hat = None
        for code in np.unique(code_flat):
            grp = self._group_by_code[int(code)]
            st = build_stencil(n, grp.theta, grp.h, grp.ecc)
            pix = np.nonzero(code_flat == code)[0]
            offs = grp.offsets[off_flat[pix]]
            acc = eng.scatter_flat(
                g_flat[pix] * (s2 / grp.area), pi[pix], pj[pix], offs[:, 0], offs[:, 1]
            )
            term = eng.convolve_hat(eng.raw_fft(acc), st)
            acc_hat = term if acc_hat is None else acc_hat + term
        return eng.inverse(acc_hat)[:n, :n]

    # -- doubled and resloped companions --------------------------------------

    def _apply_modified(self, sel: "Selector", values: np.ndarray, mode: str,
                        adjoint: bool) -> np.ndarray:
        """Shared path for the doubled (same slope) and resloped variants.

        mode "doubled": each pixel's rectangle keeps its slope, dimensions
        doubled.  mode "resloped": two rectangles per pixel at the sector's
        anchor slopes, dimensions doubled, summed.
        """
        n = self.n
        eng = self.engine(doubled=True)
        s2 = (1.0 / n) ** 2
        code_flat = sel.code.ravel()
        off_flat = sel.off.ravel()
        pi, pj = self._pixel_index()
        if not adjoint:
            fhat = eng.field_fft(values)
            out = np.zeros(n * n)
        else:
            g_flat = np.asarray(values).ravel()
            acc_hat = None

        if mode == "resloped":
            if not self.dirs.anchor_indices:
                raise ValueError("direction set has no anchors")
            endpoint = [
                self.dirs.sector_endpoint_indices(j) for j in range(self.dirs.sector_count)
            ]
            sec_of_pos = np.array(
                [self.dirs.sector_of[i] for i in self.dir_indices], dtype=np.int32
            )
            roles = (0, 1)
        else:
            roles = (0,)

        memo: dict[bytes, np.ndarray] = {}
        for role in roles:
            # target slope index per admitted direction position
            if mode == "resloped":
                tgt_of_pos = np.array(
                    [endpoint[s][role] for s in sec_of_pos], dtype=np.int32
                )
            for code in np.unique(code_flat):
                grp = self._group_by_code[int(code)]
                if mode == "resloped":
                    theta = self.dirs.angles[int(tgt_of_pos[grp.d_pos])]
                else:
                    theta = grp.theta
                h2 = 2.0 * grp.h
                st = build_stencil(n, theta, h2, grp.ecc)
                w = s2 / (grp.ecc * h2 * h2)
                pix = np.nonzero(code_flat == code)[0]
                offs = grp.offsets[off_flat[pix]]
                if not adjoint:
                    C = memo.get(st.digest)
                    if C is None:
                        C = eng.correlate(fhat, st)
                        memo[st.digest] = C
                    out[pix] += eng.gather_flat(C, pi[pix], pj[pix], offs[:, 0], offs[:, 1]) * w
                else:
                    acc = eng.scatter_flat(
                        g_flat[pix] * w, pi[pix], pj[pix], offs[:, 0], offs[:, 1]
                    )
                    term = eng.convolve_hat(eng.raw_fft(acc), st)
                    acc_hat = term if acc_hat is None else acc_hat + term
        if not adjoint:
            return out.reshape(n, n)
        return eng.inverse(acc_hat)[:n, :n]


class Selector:
    """Per-pixel rectangle assignment over a RectFamily."""

    def __init__(self, family: RectFamily, code: np.ndarray, off: np.ndarray):
        self.family = family
        self.code = code
        self.off = off

    @property
    def n(self) -> int:
        return self.family.n

    def sector_indices(self) -> np.ndarray:
        fam = self.family
        num = fam.num_h * fam.num_e
        d_pos = self.code // num
        lut = np.array(
            [fam.dirs.sector_of[i] for i in fam.dir_indices], dtype=np.int32
        )
        return lut[d_pos]

    def slope_indices(self) -> np.ndarray:
        fam = self.family
        num = fam.num_h * fam.num_e
        d_pos = self.code // num
        lut = np.array(fam.dir_indices, dtype=np.int32)
        return lut[d_pos]

    def rect_at(self, i: int, j: int) -> Rect:
        fam = self.family
        grp = fam.group(int(self.code[i, j]))
        oi, oj = (int(v) for v in grp.offsets[int(self.off[i, j])])
        s = 1.0 / fam.n
        center = ((i + 0.5 + oi) * s, (j + 0.5 + oj) * s)
        return Rect(center=center, h=grp.h, ecc=grp.ecc, theta=grp.theta)


# ---------------------------------------------------------------------------
# module-level operations


def maximal_directional(f: GridField, dirs: DirectionSet, scales: ScaleGrid,
                        sector_filter: int | None = None,
                        anchors_only: bool = False) -> GridField:
    fam = RectFamily(f.n, dirs, scales, sector_filter=sector_filter,
                     anchors_only=anchors_only)
    return GridField(fam.maximal(f.values))


def maximal_eccentricity(f: GridField, ecc: float, dirs: DirectionSet,
                         heights, offsets_per_axis: int = 3) -> GridField:
    heights = tuple(sorted({float(h) for h in heights}, reverse=True))
    if ecc * min(heights) < f.spacing * (1.0 - 1e-12):
        raise ValueError(
            f"ecc*min(height) = {ecc * min(heights)} is below the grid spacing {f.spacing}"
        )
    scales = ScaleGrid(heights, (float(ecc),), offsets_per_axis)
    fam = RectFamily(f.n, dirs, scales)
    return GridField(fam.maximal(f.values))


def grand_maximal(f: GridField, ecc_list, dirs: DirectionSet, heights,
                  offsets_per_axis: int = 3) -> GridField:
    eccs = [float(e) for e in ecc_list]
    if not eccs:
        raise ValueError("ecc list must be nonempty")
    for e in eccs:
        if not (0.0 < e < 0.5):
            raise ValueError(f"grand maximal eccentricities must lie in (0, 1/2), got {e}")
    out = np.full((f.n, f.n), -np.inf)
    for e in eccs:
        m = maximal_eccentricity(f, e, dirs, heights, offsets_per_axis)
        np.maximum(out, m.values / abs(math.log(e)), out=out)
    return GridField(out)


def linearize(f: GridField, dirs: DirectionSet, scales: ScaleGrid,
              sector_filter: int | None = None, anchors_only: bool = False) -> Selector:
    """Deterministic argmax selector: the returned rect attains the maximal value.

    Callers feed f >= 0; like the maximal operators this reads |f|, so stray
    negative roundoff in iterated fields is harmless.
    """
    fam = RectFamily(f.n, dirs, scales, sector_filter=sector_filter,
                     anchors_only=anchors_only)
    _, sel = fam.maximal(f.values, return_selector=True)
    return sel


def apply_T(phi: Selector, f: GridField) -> GridField:
    return GridField(phi.family.apply_selector(phi, f.values))


def apply_T_adjoint(phi: Selector, g: GridField) -> GridField:
    return GridField(phi.family.apply_selector_adjoint(phi, g.values))


def apply_Ttilde(phi: Selector, f: GridField) -> GridField:
    return GridField(phi.family._apply_modified(phi, f.values, "doubled", adjoint=False))


def apply_Ttilde_adjoint(phi: Selector, g: GridField) -> GridField:
    return GridField(phi.family._apply_modified(phi, g.values, "doubled", adjoint=True))


def apply_T0(phi: Selector, f: GridField) -> GridField:
    return GridField(phi.family._apply_modified(phi, f.values, "resloped", adjoint=False))


def apply_T0_adjoint(phi: Selector, g: GridField) -> GridField:
    return GridField(phi.family._apply_modified(phi, g.values, "resloped", adjoint=True))


def _centered_average(f: GridField, h: float, ecc: float, theta: float) -> np.ndarray:
    n = f.n
    st = build_stencil(n, theta, h, ecc)
    pad = n + max(st.mi, st.mj) + 3
    eng = ConvEngine(n, pad)
    C = eng.correlate(eng.field_fft(f.values), st)
    return eng.window(C, 0, 0) * (f.spacing**2 / (ecc * h * h))


def apply_Tm(m: RectParam, f: GridField) -> GridField:
    """Weighted centered average over the m-rectangle (self-adjoint)."""
    return GridField(_centered_average(f, m.h, m.ecc, m.theta) / m.weight)


def apply_Sm(m: RectParam, f: GridField) -> GridField:
    """Same as apply_Tm with the rectangle dimensions doubled."""
    return GridField(_centered_average(f, 2.0 * m.h, m.ecc, m.theta) / m.weight)


def _vertical_window_average(values: np.ndarray, radius: float, spacing: float) -> np.ndarray:
    """Mean over the centered vertical interval of half-length ``radius``.

    The interval is integrated against the zero-extended field; the
    normalizer stays 2 * radius regardless of clipping.
    """
    n = values.shape[0]
    d = int(math.floor(radius / spacing + 1e-9))
    d = min(d, n)  # rows past the raster are zero anyway
    cs = np.zeros((n, n + 1))
    np.cumsum(values, axis=1, out=cs[:, 1:])
    j = np.arange(n)
    hi = np.minimum(j + d + 1, n)
    lo = np.maximum(j - d, 0)
    return (cs[:, hi] - cs[:, lo]) * (spacing / (2.0 * radius))


def apply_Hnj(nparam: RectParam, j: int, f: GridField) -> GridField:
    """Vertical line average at dyadic half-length eta * k * 2**j."""
    two_l = 2.0 * nparam.weight
    if not (1 <= j <= two_l + 1e-12):
        raise ValueError(f"j must satisfy 1 <= j <= 2*l = {two_l}, got {j}")
    radius = nparam.ecc * nparam.h * 2.0**j
    return GridField(_vertical_window_average(f.values, radius, f.spacing))


def apply_Wn(nparam: RectParam, f: GridField) -> GridField:
    """Uniform average of the dyadic vertical averages H_{n,1..J}.

    J = floor(2 * l); normalizing by the term count keeps this an average
    (constants map to constants), which is what every bound here uses.
    """
    J = max(1, int(math.floor(2.0 * nparam.weight + 1e-12)))
    acc = np.zeros((f.n, f.n))
    for j in range(1, J + 1):
        radius = nparam.ecc * nparam.h * 2.0**j
        acc += _vertical_window_average(f.values, radius, f.spacing)
    return GridField(acc / J)


def maximal_y(f: GridField, radii) -> GridField:
    """One-dimensional centered maximal averages along the y direction."""
    radii = [float(r) for r in radii]
    if not radii:
        raise ValueError("radius list must be nonempty")
    g = np.abs(f.values)
    out = np.full((f.n, f.n), -np.inf)
    for r in radii:
        if r <= 0:
            raise ValueError("radii must be positive")
        np.maximum(out, _vertical_window_average(g, r, f.spacing), out=out)
    np.maximum(out, 0.0, out=out)
    return GridField(out)
