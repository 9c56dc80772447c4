"""Shared stencil / FFT machinery behind the discrete averaging operators.

A rectangle whose center sits on the pixel lattice contains a pixel center
iff the relative index offset lies in a fixed boolean stencil, so every
fixed-shape averaging operator is a cross-correlation with that stencil.
Correlations run through zero-padded real FFTs; the adjoint path uses the
plain convolution with the same kernel transform, which is the exact
transpose of the correlation as a real linear map (circular correlation and
circular convolution by the same kernel are transposes of each other, and
the padding removes the wrap-around).
"""

from __future__ import annotations

import hashlib
import math
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from .geometry import CLIP_EPS

_workers = 1


def set_workers(count: int) -> None:
    """Set FFT worker threads (0 = all cores). Results do not depend on it."""
    global _workers
    import os

    _workers = os.cpu_count() if count == 0 else max(1, int(count))


def get_workers() -> int:
    return _workers


@dataclass(frozen=True)
class Stencil:
    """Nonzero relative pixel offsets of one rectangle shape."""

    di: np.ndarray  # int32
    dj: np.ndarray  # int32
    mi: int
    mj: int
    digest: bytes

    @property
    def count(self) -> int:
        return self.di.size


_stencil_cache: dict[tuple, Stencil] = {}


def build_stencil(n: int, theta: float, h: float, ecc: float) -> Stencil:
    """Pixel-center membership stencil of the centered h x ecc*h rectangle."""
    key = (n, round(theta, 14), round(h, 14), round(ecc, 14))
    hit = _stencil_cache.get(key)
    if hit is not None:
        return hit
    s = 1.0 / n
    a, b = 0.5 * h, 0.5 * ecc * h
    cu, su = math.cos(theta), math.sin(theta)
    mi = int(math.ceil((a * abs(cu) + b * abs(su)) / s + 1e-9))
    mj = int(math.ceil((a * abs(su) + b * abs(cu)) / s + 1e-9))
    dx = (np.arange(-mi, mi + 1) * s)[:, None]
    dy = (np.arange(-mj, mj + 1) * s)[None, :]
    mask = (np.abs(dx * cu + dy * su) <= a + CLIP_EPS) & (
        np.abs(-dx * su + dy * cu) <= b + CLIP_EPS
    )
    ii, jj = np.nonzero(mask)
    digest = hashlib.blake2b(
        mask.shape[1].to_bytes(4, "little") + np.packbits(mask).tobytes(), digest_size=16
    ).digest()
    st = Stencil(
        di=(ii - mi).astype(np.int32),
        dj=(jj - mj).astype(np.int32),
        mi=mi,
        mj=mj,
        digest=digest,
    )
    if len(_stencil_cache) > 4096:
        _stencil_cache.clear()
    _stencil_cache[key] = st
    return st


class _KernelFFTCache:
    """LRU cache of kernel transforms keyed by (pad size, stencil digest)."""

    def __init__(self, max_bytes: int = 256 * 1024 * 1024):
        self.max_bytes = max_bytes
        self._data: OrderedDict[tuple, np.ndarray] = OrderedDict()
        self._bytes = 0

    def get(self, P: int, st: Stencil) -> np.ndarray:
        key = (P, st.digest)
        hit = self._data.get(key)
        if hit is not None:
            self._data.move_to_end(key)
            return hit
        k = np.zeros((P, P))
        k[np.remainder(st.di, P), np.remainder(st.dj, P)] = 1.0
        khat = sfft.rfft2(k, workers=_workers)
        self._data[key] = khat
        self._bytes += khat.nbytes
        while self._bytes > self.max_bytes and len(self._data) > 1:
            _, old = self._data.popitem(last=False)
            self._bytes -= old.nbytes
        return khat


_kernel_cache = _KernelFFTCache()


class ConvEngine:
    """Zero-padded FFT correlations/convolutions at one pad size."""

    def __init__(self, n: int, pad: int):
        if pad < n + 1:
            raise ValueError("pad too small")
        self.n = n
        self.P = sfft.next_fast_len(pad)

    def field_fft(self, values: np.ndarray) -> np.ndarray:
        arr = np.zeros((self.P, self.P))
        arr[: self.n, : self.n] = values
        return sfft.rfft2(arr, workers=_workers)

    def raw_fft(self, padded: np.ndarray) -> np.ndarray:
        return sfft.rfft2(padded, workers=_workers)

    def correlate(self, field_hat: np.ndarray, st: Stencil) -> np.ndarray:
        """C[x] = sum_d f[x + d] st[d], on the padded torus."""
        khat = _kernel_cache.get(self.P, st)
        return sfft.irfft2(field_hat * np.conj(khat), s=(self.P, self.P), workers=_workers)

    def convolve_hat(self, acc_hat: np.ndarray, st: Stencil) -> np.ndarray:
        """Accumulate the convolution transform (adjoint path) in place."""
        khat = _kernel_cache.get(self.P, st)
        return acc_hat * khat

    def inverse(self, acc_hat: np.ndarray) -> np.ndarray:
        return sfft.irfft2(acc_hat, s=(self.P, self.P), workers=_workers)

    def window(self, C: np.ndarray, oi: int, oj: int) -> np.ndarray:
        """n x n view of C shifted by (oi, oj), wrapping on the padded torus."""
        P, n = self.P, self.n
        rows = np.arange(oi, oi + n) % P
        cols = np.arange(oj, oj + n) % P
        return C.take(rows, axis=0).take(cols, axis=1)

    def gather_flat(self, C: np.ndarray, pi: np.ndarray, pj: np.ndarray,
                    oi: np.ndarray, oj: np.ndarray) -> np.ndarray:
        idx = np.remainder(pi + oi, self.P) * self.P + np.remainder(pj + oj, self.P)
        return C.ravel()[idx]

    def scatter_flat(self, vals: np.ndarray, pi: np.ndarray, pj: np.ndarray,
                     oi: np.ndarray, oj: np.ndarray) -> np.ndarray:
        """Padded array with vals accumulated at (pi + oi, pj + oj) mod P."""
        idx = np.remainder(pi + oi, self.P) * self.P + np.remainder(pj + oj, self.P)
        flat = np.bincount(idx, weights=vals, minlength=self.P * self.P)
        return flat.reshape(self.P, self.P)


def snapped_offsets(n: int, theta: float, h: float, ecc: float, per_axis: int) -> np.ndarray:
    """Integer pixel offsets realizing the uncentered ("x in R") positions.

    Offsets spread across the rectangle axes with a one-pixel safety margin
    and snap to the lattice, so each translated rectangle still contains the
    base pixel center exactly.  Duplicates collapse keeping first occurrence
    (this fixes the deterministic tie-break order).
    """
    if per_axis < 1 or per_axis % 2 == 0:
        raise ValueError("offsets per axis must be an odd positive integer")
    s = 1.0 / n
    a, b = 0.5 * h, 0.5 * ecc * h
    cu, su = math.cos(theta), math.sin(theta)
    if per_axis == 1:
        vals = [0.0]
    else:
        vals = [-1.0 + 2.0 * k / (per_axis - 1) for k in range(per_axis)]
    au, bv = max(a - s, 0.0), max(b - s, 0.0)
    out: list[tuple[int, int]] = []
    seen = set()
    for alpha in vals:
        for beta in vals:
            ox = alpha * au * cu - beta * bv * su
            oy = alpha * au * su + beta * bv * cu
            oi, oj = round(ox / s), round(oy / s)
            px, py = oi * s, oj * s
            if (
                abs(px * cu + py * su) <= a + CLIP_EPS
                and abs(-px * su + py * cu) <= b + CLIP_EPS
                and (oi, oj) not in seen
            ):
                seen.add((oi, oj))
                out.append((oi, oj))
    if not out:
        out = [(0, 0)]
    return np.asarray(out, dtype=np.int32)
