"""Test-function families: smooth bumps, balls, thin strips, kakeya fans.

Every generator returns a nonnegative field normalized to unit L2 norm.
The kakeya fan superposes K thin strips of a given eccentricity through the
center at equally spaced slopes, a discrete mass concentrator aimed at the
sharpness of the log-weighted maximal bounds.
"""

from __future__ import annotations

import math

import numpy as np

FAMILY_IDS = ("bump", "ball", "strip", "kakeya-fan")


def _normalize(vals: np.ndarray, n: int) -> np.ndarray:
    nrm = math.sqrt(float(np.sum(vals**2)) / (n * n))
    if nrm == 0.0:
        vals = np.ones_like(vals)
        nrm = math.sqrt(float(np.sum(vals**2)) / (n * n))
    return vals / nrm


def _centers(n: int):
    c = (np.arange(n) + 0.5) / n
    return np.meshgrid(c, c, indexing="ij")


def bump_field(n: int, rng: np.random.Generator, count: int = 3) -> np.ndarray:
    xx, yy = _centers(n)
    vals = np.zeros((n, n))
    for _ in range(count):
        cx, cy = rng.uniform(0.2, 0.8, size=2)
        sig = rng.uniform(0.03, 0.15)
        amp = rng.uniform(0.5, 1.5)
        vals += amp * np.exp(-((xx - cx) ** 2 + (yy - cy) ** 2) / (2 * sig * sig))
    return _normalize(vals, n)


def ball_field(n: int, rng: np.random.Generator) -> np.ndarray:
    xx, yy = _centers(n)
    cx, cy = rng.uniform(0.25, 0.75, size=2)
    rad = rng.uniform(0.05, 0.2)
    vals = (((xx - cx) ** 2 + (yy - cy) ** 2) <= rad * rad).astype(float)
    return _normalize(vals, n)


def strip_mask(n: int, cx: float, cy: float, length: float, width: float,
               theta: float) -> np.ndarray:
    xx, yy = _centers(n)
    cu, su = math.cos(theta), math.sin(theta)
    dx, dy = xx - cx, yy - cy
    return (
        (np.abs(dx * cu + dy * su) <= 0.5 * length)
        & (np.abs(-dx * su + dy * cu) <= 0.5 * width)
    ).astype(float)


def strip_field(n: int, rng: np.random.Generator, slope_lo: float = 0.0,
                slope_hi: float = 1.0) -> np.ndarray:
    cx, cy = rng.uniform(0.3, 0.7, size=2)
    slope = rng.uniform(slope_lo, slope_hi)
    width = rng.uniform(2.0 / n, 16.0 / n)
    length = rng.uniform(0.3, 0.9)
    vals = strip_mask(n, cx, cy, length, width, math.atan(slope))
    return _normalize(vals, n)


def kakeya_fan_field(n: int, delta: float, slope_lo: float = 0.0,
                     slope_hi: float = 1.0, strip_count: int | None = None,
                     length: float = 1.0) -> np.ndarray:
    """Sum of ~1/delta thin strips through the center, equally spaced in slope."""
    if strip_count is None:
        strip_count = max(2, round((slope_hi - slope_lo) / delta) + 1)
    vals = np.zeros((n, n))
    width = max(delta * length, 1.0 / n)
    for k in range(strip_count):
        slope = slope_lo + (slope_hi - slope_lo) * k / max(strip_count - 1, 1)
        vals += strip_mask(n, 0.5, 0.5, length, width, math.atan(slope))
    return _normalize(vals, n)


def adversarial_field(family_id: str, n: int, rng: np.random.Generator, *,
                      delta: float = 2.0**-5, slope_lo: float = 0.0,
                      slope_hi: float = 1.0) -> np.ndarray:
    if family_id == "bump":
        return bump_field(n, rng)
    if family_id == "ball":
        return ball_field(n, rng)
    if family_id == "strip":
        return strip_field(n, rng, slope_lo, slope_hi)
    if family_id == "kakeya-fan":
        return kakeya_fan_field(n, delta, slope_lo, slope_hi)
    raise ValueError(f"unknown family id {family_id!r}")


def sample_suite(n: int, count: int, rng: np.random.Generator, *,
                 delta: float = 2.0**-5, slope_lo: float = 0.0,
                 slope_hi: float = 1.0) -> list[tuple[str, np.ndarray]]:
    """At least three samples from each family, cycling, ``count`` total."""
    count = max(count, 3 * len(FAMILY_IDS))
    out = []
    for k in range(count):
        fam = FAMILY_IDS[k % len(FAMILY_IDS)]
        out.append(
            (fam, adversarial_field(fam, n, rng, delta=delta,
                                    slope_lo=slope_lo, slope_hi=slope_hi))
        )
    return out
