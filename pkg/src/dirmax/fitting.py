"""Least-squares line fit used by the experiment analysis.

Kept tiny and dependency-free: the plotting component recomputes the same
fit via the same normal-equation formulas and must match to 1e-9.
"""

from __future__ import annotations

import numpy as np


def linear_fit(x, y) -> tuple[float, float, float]:
    """Slope, intercept and R**2 of the least-squares line through (x, y)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2:
        raise ValueError("need at least two points to fit a line")
    xm, ym = float(np.mean(x)), float(np.mean(y))
    sxx = float(np.sum((x - xm) ** 2))
    if sxx == 0.0:
        raise ValueError("degenerate fit: all x equal")
    sxy = float(np.sum((x - xm) * (y - ym)))
    slope = sxy / sxx
    intercept = ym - slope * xm
    resid = y - (slope * x + intercept)
    syy = float(np.sum((y - ym) ** 2))
    r2 = 1.0 if syy == 0.0 else 1.0 - float(np.sum(resid**2)) / syy
    return slope, intercept, r2
