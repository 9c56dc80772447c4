"""Experiment drivers behind the CLI commands.

Each driver returns deterministic result rows (dicts) given its parameters;
the CLI layer owns CSV formatting and timing.  Norm sweeps chain witnesses:
the best field found for one family seeds the next, which for nested
families (uniform N -> 2N, lacunary prefixes) makes the reported estimates
provably nondecreasing.
"""

from __future__ import annotations

import time
import zlib

import numpy as np

from . import families
from .geometry import make_directions
from .grid import GridField
from .normest import default_start_field, estimate_maximal_norm
from .operators import RectFamily, ScaleGrid, grand_maximal


def _sweep_scales(h_max: float = 0.5, num_heights: int = 2, num_eccs: int = 3,
                  ecc_step: int = 2, offsets: int = 3) -> ScaleGrid:
    return ScaleGrid.dyadic(h_max, num_heights, num_eccs, offsets, ecc_step)


def norm_sweep(n: int, direction_sets, seed: int, scales: ScaleGrid, *,
               rounds: int = 2, tol: float = 1e-5, max_iter: int = 80) -> list[dict]:
    """Norm estimates over a list of (label, DirectionSet), witness-chained."""
    rows = []
    witness = None
    for label, dirs in direction_sets:
        t0 = time.perf_counter()
        fam = RectFamily(n, dirs, scales)
        start = witness if witness is not None else default_start_field(n, seed)
        est = estimate_maximal_norm(fam, rounds=rounds, seed=seed, start=start,
                                    tol=tol, max_iter=max_iter)
        witness = est.witness
        rows.append({"label": label, "norm_est": est.value,
                     "seconds": time.perf_counter() - t0})
    return rows


def logn_sweep(n: int, n_values, seed: int, *, scales: ScaleGrid | None = None,
               rounds: int = 2, tol: float = 1e-5, max_iter: int = 80) -> list[dict]:
    scales = scales or _sweep_scales()
    sets = [(N, make_directions("uniform", count=N)) for N in n_values]
    rows = norm_sweep(n, sets, seed, scales, rounds=rounds, tol=tol, max_iter=max_iter)
    return [{"N": r["label"], "norm_est": r["norm_est"], "seconds": r["seconds"]}
            for r in rows]


def lacunary_sweep(n: int, n_values, seed: int, *, ratio: float = 0.5,
                   scales: ScaleGrid | None = None, rounds: int = 2,
                   tol: float = 1e-5, max_iter: int = 80) -> list[dict]:
    scales = scales or _sweep_scales()
    sets = [(N, make_directions("lacunary", ratio=ratio, count=N, anchors="all"))
            for N in n_values]
    rows = norm_sweep(n, sets, seed, scales, rounds=rounds, tol=tol, max_iter=max_iter)
    return [{"N": r["label"], "norm_est": r["norm_est"], "seconds": r["seconds"]}
            for r in rows]


def _random_direction_config(rng: np.random.Generator, lo: int, hi: int):
    size = int(rng.integers(lo, hi + 1))
    slopes = np.sort(rng.uniform(0.02, 1.0, size))[::-1]
    rule = rng.integers(0, 3)
    if rule == 0:
        anchors = "all"
    elif rule == 1:
        anchors = ("every", 2)
    else:
        anchors = ("every", 3)
    return make_directions("explicit", slopes=list(slopes), anchors=anchors)


def avs_sweep(n: int, num_configs: int, seed: int, *, h_max: float = 0.25,
              rounds: int = 1, tol: float = 1e-4, max_iter: int = 40,
              slopes_min: int = 4, slopes_max: int = 10) -> list[dict]:
    """Random (slope set, anchor rule) configurations and their implied constants.

    Each row reports the full-family norm estimate, the largest per-sector
    estimate, the anchors-only estimate, and the implied constant
    (norm_omega - sup_sector) / norm_anchor clamped at zero.
    """
    rng = np.random.default_rng([seed, 0xA75])
    scales = ScaleGrid.dyadic(h_max, 1, 2, 3, ecc_step=2)
    rows = []
    for cid in range(num_configs):
        t0 = time.perf_counter()
        dirs = _random_direction_config(rng, slopes_min, slopes_max)
        fam = RectFamily(n, dirs, scales)
        est = estimate_maximal_norm(fam, rounds=rounds, seed=seed, tol=tol,
                                    max_iter=max_iter)
        sup_sector = 0.0
        for j in range(dirs.sector_count):
            if not dirs.sector_members(j):
                continue
            sub = RectFamily(n, dirs, scales, sector_filter=j)
            sest = estimate_maximal_norm(sub, rounds=rounds, seed=seed,
                                         start=est.witness, tol=tol,
                                         max_iter=max_iter)
            sup_sector = max(sup_sector, sest.value)
        anch = RectFamily(n, dirs, scales, anchors_only=True)
        aest = estimate_maximal_norm(anch, rounds=rounds, seed=seed,
                                     start=est.witness, tol=tol,
                                     max_iter=max_iter)
        implied = max(0.0, (est.value - sup_sector) / aest.value)
        rows.append({
            "config_id": cid,
            "norm_omega": est.value,
            "sup_sector": sup_sector,
            "norm_anchor": aest.value,
            "implied_C": implied,
            "seconds": time.perf_counter() - t0,
        })
    return rows


def gm_sweep(n: int, seed: int, *, delta0_exps=(2, 3, 4, 5, 6), dir_count: int = 8,
             slope_hi: float = 0.1, heights=(0.5, 0.25),
             offsets: int = 3) -> list[dict]:
    """Ratios ||GM_0 f|| / ||f|| per truncation depth and adversarial family.

    Every family member is fixed across the delta_0 sweep (the kakeya fan
    uses the finest eccentricity of the sweep), so consecutive rows compare
    the same function under a growing truncation and the plateau criterion
    reads off uniform boundedness directly.
    """
    slopes = [slope_hi * k / dir_count for k in range(dir_count, 0, -1)]
    dirs = make_directions("explicit", slopes=slopes)
    heights = [h for h in heights if h * 2.0 ** -max(delta0_exps) >= 1.0 / n]
    if not heights:
        raise ValueError(
            f"no height resolves eccentricity 2^-{max(delta0_exps)} at n = {n}"
        )
    rows = []
    base_fields = {}
    for fam_id in ("bump", "ball", "strip"):
        rng = np.random.default_rng([seed, zlib.crc32(fam_id.encode())])
        base_fields[fam_id] = families.adversarial_field(
            fam_id, n, rng, slope_lo=0.0, slope_hi=slope_hi
        )
    base_fields["kakeya-fan"] = families.kakeya_fan_field(
        n, 2.0 ** -max(delta0_exps), 0.0, slope_hi
    )
    for exp in delta0_exps:
        delta0 = 2.0**-exp
        ecc_list = [2.0**-e for e in range(2, exp + 1)]
        for fam_id in families.FAMILY_IDS:
            t0 = time.perf_counter()
            vals = base_fields[fam_id]
            gm = grand_maximal(GridField(vals), ecc_list, dirs, heights, offsets)
            rows.append({
                "delta0": delta0,
                "family": fam_id,
                "ratio": gm.l2_norm(),
                "seconds": time.perf_counter() - t0,
            })
    return rows


def sharpness_sweep(n: int, seed: int, *, delta_exps=(1, 2, 3, 4, 5, 6),
                    rounds: int = 2, tol: float = 1e-5, max_iter: int = 120,
                    offsets: int = 3, width_px: float = 2.0) -> list[dict]:
    """Fixed-eccentricity norm estimates with resolution-uniform tubes.

    Each delta uses the single height making the tube exactly ``width_px``
    pixels wide, so lengths grow like 1/delta and the pixel-counting factor
    stays constant across the sweep; the direction count scales like
    1/delta.  This isolates the log(1/delta) growth from discretization.
    """
    rows = []
    witness = None
    for exp in delta_exps:
        t0 = time.perf_counter()
        delta = 2.0**-exp
        h = width_px / (n * delta)
        if h > 0.5:
            raise ValueError(
                f"delta {delta} needs tube length {h} > 1/2; raise the grid size"
            )
        count = max(4, round(1.0 / delta))
        dirs = make_directions("uniform", count=count)
        fam = RectFamily(n, dirs, ScaleGrid((h,), (delta,), offsets))
        start = witness if witness is not None else default_start_field(n, seed)
        est = estimate_maximal_norm(fam, rounds=rounds, seed=seed, start=start,
                                    tol=tol, max_iter=max_iter)
        witness = est.witness
        rows.append({"delta": delta, "norm_est": est.value,
                     "seconds": time.perf_counter() - t0})
    return rows
