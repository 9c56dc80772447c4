"""Figure rendering for the experiment CSVs.

Consumes only the documented CSV surfaces of the experiment harness; the
input header must match the expected schema byte for byte.  Every render
echoes its least-squares fit as ``kind,slope,intercept,r2`` on standard
output, computed with the plain normal equations so the values reproduce
the experiment suite's own fits to full precision.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

KINDS = ("logn_fit", "lacunary", "avs_hist", "gm_plateau", "sharpness_fit")

EXPECTED_HEADERS = {
    "logn_fit": "N,norm_est,seconds",
    "lacunary": "N,norm_est,seconds",
    "avs_hist": "config_id,norm_omega,sup_sector,norm_anchor,implied_C",
    "gm_plateau": "delta0,family,ratio",
    "sharpness_fit": "delta,norm_est",
}


@dataclass
class FigureSpec:
    csv_path: str
    kind: str
    out_path: str
    annotations: dict = field(default_factory=dict)


def linear_fit(x, y) -> tuple[float, float, float]:
    """Least-squares slope, intercept, R**2 (normal equations)."""
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


def _load_rows(spec: FigureSpec) -> list[dict]:
    expected = EXPECTED_HEADERS[spec.kind]
    with open(spec.csv_path, newline="") as fh:
        header_line = fh.readline().rstrip("\r\n")
        if header_line != expected:
            raise ValueError(
                f"schema mismatch for {spec.kind}: header {header_line!r}, "
                f"expected {expected!r}"
            )
        reader = csv.DictReader(fh, fieldnames=expected.split(","))
        rows = list(reader)
    if not rows:
        raise ValueError(f"empty CSV: {spec.csv_path}")
    return rows


def _fit_line_points(x, slope, intercept):
    xs = np.linspace(min(x), max(x), 50)
    return xs, slope * xs + intercept


def render(spec: FigureSpec) -> tuple[float, float, float]:
    """Render one figure; returns and echoes (slope, intercept, r2)."""
    if spec.kind not in KINDS:
        raise ValueError(f"unknown figure kind {spec.kind!r}")
    rows = _load_rows(spec)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    try:
        if spec.kind in ("logn_fit", "lacunary"):
            n_vals = [float(r["N"]) for r in rows]
            est = [float(r["norm_est"]) for r in rows]
            x = [math.log(v) for v in n_vals]
            slope, intercept, r2 = linear_fit(x, est)
            ax.plot(x, est, "o", label="norm estimate")
            ax.plot(*_fit_line_points(x, slope, intercept), "-",
                    label=f"fit {slope:.3f} log N + {intercept:.3f}")
            ax.set_xlabel("log N")
            ax.set_ylabel("operator norm estimate")
            title = "uniform directions" if spec.kind == "logn_fit" else "lacunary directions"
            ax.set_title(f"{title} (R$^2$ = {r2:.3f})")
            ax.legend()
        elif spec.kind == "avs_hist":
            cs = [float(r["implied_C"]) for r in rows]
            idx = [float(r["config_id"]) for r in rows]
            slope, intercept, r2 = linear_fit(idx, cs)
            ax.hist(cs, bins=min(12, max(3, len(cs) // 2)), color="#4878d0")
            ax.set_xlabel("implied constant")
            ax.set_ylabel("configurations")
            ax.set_title("implied constants across direction configurations")
        elif spec.kind == "gm_plateau":
            fams = sorted({r["family"] for r in rows})
            for fam in fams:
                sub = [r for r in rows if r["family"] == fam]
                x = [math.log(1.0 / float(r["delta0"])) for r in sub]
                y = [float(r["ratio"]) for r in sub]
                ax.plot(x, y, "o-", label=fam)
            fan = [r for r in rows if r["family"] == "kakeya-fan"] or rows
            x = [math.log(1.0 / float(r["delta0"])) for r in fan]
            y = [float(r["ratio"]) for r in fan]
            slope, intercept, r2 = linear_fit(x, y)
            ax.set_xlabel("log 1/delta_0")
            ax.set_ylabel("ratio")
            ax.set_title("grand maximal ratios vs truncation")
            ax.legend()
        else:  # sharpness_fit
            x = [math.log(1.0 / float(r["delta"])) for r in rows]
            y = [float(r["norm_est"]) for r in rows]
            slope, intercept, r2 = linear_fit(x, y)
            ax.plot(x, y, "o", label="norm estimate")
            ax.plot(*_fit_line_points(x, slope, intercept), "-",
                    label=f"fit {slope:.3f} log(1/d) + {intercept:.3f}")
            ax.set_xlabel("log 1/delta")
            ax.set_ylabel("fixed-eccentricity norm estimate")
            ax.set_title(f"thin-rectangle growth (R$^2$ = {r2:.3f})")
            ax.legend()
        fig.tight_layout()
        out = Path(spec.out_path)
        out.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(out, dpi=120)
    finally:
        plt.close(fig)
    spec.annotations.update({"slope": slope, "intercept": intercept, "r2": r2})
    print(f"{spec.kind},{slope!r},{intercept!r},{r2!r}")
    return slope, intercept, r2
