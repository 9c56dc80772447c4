"""Named verifiers for every pointwise inequality, with regression bounds.

Each check samples fields (smooth bumps, ball indicators, thin strips,
kakeya fans -- at least three of each per run) or random rectangle pairs,
computes the maximal observed ratio of the two sides of one inequality (the
empirical minimal constant), and compares it against a configured bound.
Bounds for the inequalities with unquantified absolute constants were fixed
by the first-run protocol: 1.25 x the ratio observed on the shipped default
configuration, stored in ``data/regression_bounds.json``.  Subsequent runs
must stay inside them; drift means a behavior change.

Everything is deterministic given (name, config, seed): samples come from a
generator stream seeded by both.
"""

from __future__ import annotations

import json
import math
import zlib
from dataclasses import dataclass
from importlib import resources

import numpy as np

from . import families
from .geometry import DirectionSet, Rect, make_directions, rect_intersection_area, rect_reslope
from .grid import GridField
from .kernels import split_K, ttstar_matrix
from .normest import estimate_maximal_norm
from .operators import (
    RectFamily,
    RectParam,
    ScaleGrid,
    apply_Sm,
    apply_T0,
    apply_T0_adjoint,
    apply_Tm,
    apply_Ttilde,
    apply_Ttilde_adjoint,
    apply_Wn,
    grand_maximal,
)

CHECK_NAMES = (
    "eq5", "eq6", "eq7", "geom10", "tt11", "tt9",
    "thm2_18", "case1_20", "case2_23", "gg24", "thm1", "gm_bounded",
)


@dataclass(frozen=True)
class CheckConfig:
    n: int = 64
    samples: int = 12
    dir_count: int = 8
    anchor_stride: int = 2
    h_max: float = 0.25
    num_heights: int = 2
    num_eccs: int = 2
    ecc_step: int = 1
    offsets_per_axis: int = 3
    slope_lo: float = 0.0
    slope_hi: float = 1.0
    pair_samples: int = 10000
    bound: float | None = None

    def key(self) -> str:
        return (
            f"n={self.n} samples={self.samples} dirs={self.dir_count}"
            f" stride={self.anchor_stride} h={self.h_max}x{self.num_heights}"
            f" e={self.num_eccs}s{self.ecc_step} off={self.offsets_per_axis}"
            f" slopes=[{self.slope_lo},{self.slope_hi}] pairs={self.pair_samples}"
        )


@dataclass(frozen=True)
class CheckReport:
    name: str
    samples: int
    max_ratio: float
    location: str
    passed: bool
    bound: float
    seed: int

    def csv_row(self) -> str:
        return (
            f"{self.name},{self.samples},{self.max_ratio!r},{self.bound!r},"
            f"{str(self.passed).lower()},{self.seed}"
        )


DEFAULT_CONFIGS: dict[str, CheckConfig] = {
    "eq5": CheckConfig(),
    "eq6": CheckConfig(samples=20),
    "eq7": CheckConfig(),
    "geom10": CheckConfig(dir_count=12, anchor_stride=3),
    "tt11": CheckConfig(n=32, samples=12, dir_count=6),
    "tt9": CheckConfig(n=16, samples=3, dir_count=6, anchor_stride=3, num_eccs=1),
    "thm2_18": CheckConfig(n=128, samples=1000, slope_hi=0.1, h_max=0.5),
    "case1_20": CheckConfig(n=128, samples=300, slope_hi=0.1, h_max=0.5),
    "case2_23": CheckConfig(n=128, samples=300, slope_hi=0.1, h_max=0.5),
    "gg24": CheckConfig(n=128, samples=300, slope_hi=0.1, h_max=0.5),
    "thm1": CheckConfig(n=64, samples=6),
    "gm_bounded": CheckConfig(n=256, slope_hi=0.1),
}


def _builtin_bounds() -> dict[str, float]:
    try:
        text = resources.files("dirmax").joinpath("data/regression_bounds.json").read_text()
        return {k: float(v) for k, v in json.loads(text).items()}
    except (FileNotFoundError, ModuleNotFoundError):
        return {}


_BOUNDS_CACHE: dict[str, float] | None = None


def regression_bound(name: str) -> float:
    global _BOUNDS_CACHE
    if _BOUNDS_CACHE is None:
        _BOUNDS_CACHE = _builtin_bounds()
    if name == "eq6":
        return 1.0  # exact discrete constant
    if name == "gm_bounded":
        return 1.10  # plateau criterion: <= 10% growth per halving
    return _BOUNDS_CACHE.get(name, math.inf)


def _rng(name: str, seed: int) -> np.random.Generator:
    return np.random.default_rng([seed, zlib.crc32(name.encode())])


def _scales(cfg: CheckConfig) -> ScaleGrid:
    return ScaleGrid.dyadic(cfg.h_max, cfg.num_heights, cfg.num_eccs,
                            cfg.offsets_per_axis, cfg.ecc_step)


def _dirs(cfg: CheckConfig) -> DirectionSet:
    return make_directions("uniform", count=cfg.dir_count,
                           anchors=("every", cfg.anchor_stride),
                           lo=cfg.slope_lo, hi=cfg.slope_hi)


def _max_ratio(lhs: np.ndarray, rhs: np.ndarray, margin: int,
               floor_frac: float = 1e-8,
               leak_frac: float = 0.02) -> tuple[float, tuple[int, int]]:
    """Max over interior pixels of lhs/rhs, masking vanishing denominators.

    The ratio of the two sides is taken where the denominator is alive
    (above ``floor_frac`` of its peak).  Pixels with dead denominator are
    exempt up to ``leak_frac`` of the numerator's peak: a composed operator
    support is the Minkowski sum of two rectangles and overhangs the
    comparison rectangle in corner parameter configurations, carrying up to
    ~0.5% of the peak there.  Material mass on a dead denominator means the
    inequality genuinely fails and the ratio reports infinite.
    """
    n = lhs.shape[0]
    m = min(margin, (n - 2) // 2)
    li = lhs[m : n - m, m : n - m]
    ri = rhs[m : n - m, m : n - m]
    top_r = float(np.max(ri)) if ri.size else 0.0
    top_l = float(np.max(np.abs(li))) if li.size else 0.0
    mask = ri > floor_frac * max(top_r, 1e-300)
    if not np.any(mask):
        if top_l <= leak_frac * max(top_l, 1e-300):
            return 0.0, (m, m)
        return math.inf, (m, m)
    ratios = np.where(mask, li / np.where(mask, ri, 1.0), -np.inf)
    bad = (~mask) & (li > leak_frac * max(top_l, 1e-300))
    if np.any(bad):
        i, j = np.unravel_index(int(np.argmax(bad)), bad.shape)
        return math.inf, (int(i) + m, int(j) + m)
    i, j = np.unravel_index(int(np.argmax(ratios)), ratios.shape)
    return float(ratios[i, j]), (int(i) + m, int(j) + m)


def _margin_px(cfg: CheckConfig) -> int:
    return int(math.ceil(cfg.h_max * cfg.n))


# --------------------------------------------------------------------------
# pointwise operator checks (eq5 / eq6 / eq7 / tt11)


def _selector_stream(cfg: CheckConfig, seed: int, name: str):
    """Yields (field, selector) pairs; the selector comes from the previous
    sample so the linearization is not tuned to the field it is tested on."""
    rng = _rng(name, seed)
    fields = families.sample_suite(cfg.n, cfg.samples, rng,
                                   slope_lo=cfg.slope_lo, slope_hi=max(cfg.slope_hi, 1e-3))
    dirs = _dirs(cfg)
    scales = _scales(cfg)
    fam = RectFamily(cfg.n, dirs, scales)
    prev_vals = fields[-1][1]
    for _, vals in fields:
        _, sel = fam.maximal(prev_vals, return_selector=True)
        yield fam, GridField(vals), sel
        prev_vals = vals


def _check_eq6(cfg: CheckConfig, seed: int):
    worst, loc = 0.0, "-"
    count = 0
    for k, (fam, f, sel) in enumerate(_selector_stream(cfg, seed, "eq6")):
        lhs = fam.apply_selector(sel, f.values)
        rhs = fam.maximal(f.values)
        r, ij = _max_ratio(lhs, rhs, _margin_px(cfg))
        count += 1
        if r > worst:
            worst, loc = r, f"sample={k} pixel={ij}"
    return count, worst, loc


def _enlarged_family(cfg: CheckConfig, anchors_only: bool) -> RectFamily:
    scales = _scales(cfg)
    heights = tuple(sorted({2.0 * h for h in scales.heights} | set(scales.heights),
                           reverse=True))
    enlarged = ScaleGrid(heights, scales.eccs, scales.offsets_per_axis)
    return RectFamily(cfg.n, _dirs(cfg), enlarged, anchors_only=anchors_only)


def _check_eq7(cfg: CheckConfig, seed: int):
    fam_big = _enlarged_family(cfg, anchors_only=False)
    worst, loc, count = 0.0, "-", 0
    for k, (fam, f, sel) in enumerate(_selector_stream(cfg, seed, "eq7")):
        lhs = apply_Ttilde(sel, f).values
        rhs = fam_big.maximal(f.values)
        r, ij = _max_ratio(lhs, rhs, 2 * _margin_px(cfg))
        count += 1
        if r > worst:
            worst, loc = r, f"sample={k} pixel={ij}"
    return count, worst, loc


def _check_eq5(cfg: CheckConfig, seed: int):
    fam_anchor = _enlarged_family(cfg, anchors_only=True)
    worst, loc, count = 0.0, "-", 0
    for k, (fam, f, sel) in enumerate(_selector_stream(cfg, seed, "eq5")):
        lhs = apply_T0(sel, f).values
        rhs = fam_anchor.maximal(f.values)
        r, ij = _max_ratio(lhs, rhs, 2 * _margin_px(cfg))
        count += 1
        if r > worst:
            worst, loc = r, f"sample={k} pixel={ij}"
    return count, worst, loc


def _check_tt11(cfg: CheckConfig, seed: int):
    worst, loc, count = 0.0, "-", 0
    for k, (fam, f, sel) in enumerate(_selector_stream(cfg, seed, "tt11")):
        tstar = fam.apply_selector_adjoint(sel, f.values)
        tt = fam.apply_selector(sel, tstar)
        sectors = sel.sector_indices()
        t1 = np.zeros_like(tt)
        for j in np.unique(sectors):
            mask = sectors == j
            part = fam.apply_selector_adjoint(sel, np.where(mask, f.values, 0.0))
            t1 += np.where(mask, fam.apply_selector(sel, part), 0.0)
        cross = (
            apply_Ttilde(sel, GridField(apply_T0_adjoint(sel, f).values)).values
            + apply_T0(sel, GridField(apply_Ttilde_adjoint(sel, f).values)).values
        )
        r, ij = _max_ratio(np.maximum(tt - t1, 0.0), cross, 2 * _margin_px(cfg))
        count += 1
        if r > worst:
            worst, loc = r, f"sample={k} pixel={ij}"
    return count, worst, loc


# --------------------------------------------------------------------------
# geometric lemma (geom10) and block-norm bound (tt9)


def _check_geom10(cfg: CheckConfig, seed: int):
    rng = _rng("geom10", seed)
    dirs = _dirs(cfg)
    scales = _scales(cfg)
    sectors = np.asarray(dirs.sector_of)
    worst, loc = 0.0, "-"
    count = 0
    attempts = 0
    while count < cfg.pair_samples and attempts < 20 * cfg.pair_samples:
        attempts += 1
        ix, iz = rng.integers(0, dirs.size, 2)
        if sectors[ix] == sectors[iz]:
            continue
        hx, hz = rng.choice(scales.heights, 2)
        ex, ez = rng.choice(scales.eccs, 2)
        cz = rng.uniform(0.3, 0.7, 2)
        cx = cz + rng.uniform(-1.0, 1.0, 2) * hx
        rx = Rect(center=tuple(cx), h=float(hx), ecc=float(ex), theta=dirs.angles[ix])
        rz = Rect(center=tuple(cz), h=float(hz), ecc=float(ez), theta=dirs.angles[iz])
        count += 1
        inter = rect_intersection_area(rx, rz)
        if inter <= 0.0:
            continue
        lhs = inter / (rx.area * rz.area)
        best = 0.0
        for ax in dirs.sector_endpoint_indices(int(sectors[ix])):
            rpx = rect_reslope(rx, dirs.angles[ax])
            tz = Rect(center=rz.center, h=2 * rz.h, ecc=rz.ecc, theta=rz.theta)
            best = max(best, rect_intersection_area(rpx, tz) / (rpx.area * tz.area))
        for az in dirs.sector_endpoint_indices(int(sectors[iz])):
            rpz = rect_reslope(rz, dirs.angles[az])
            tx = Rect(center=rx.center, h=2 * rx.h, ecc=rx.ecc, theta=rx.theta)
            best = max(best, rect_intersection_area(tx, rpz) / (tx.area * rpz.area))
        ratio = lhs / best if best > 0 else math.inf
        if ratio > worst:
            worst, loc = ratio, f"pair={count - 1}"
    return count, worst, loc


def _check_tt9(cfg: CheckConfig, seed: int):
    rng = _rng("tt9", seed)
    dirs = _dirs(cfg)
    scales = _scales(cfg)
    fam = RectFamily(cfg.n, dirs, scales)
    fields = families.sample_suite(cfg.n, max(cfg.samples, 3), rng)
    worst, loc = 0.0, "-"
    count = 0
    sector_norm: dict[int, float] = {}
    for j in range(dirs.sector_count):
        if not dirs.sector_members(j):
            continue
        sub = RectFamily(cfg.n, dirs, scales, sector_filter=j)
        est = estimate_maximal_norm(sub, rounds=2, seed=seed, tol=1e-9, max_iter=3000)
        sector_norm[j] = est.value
    sup_sq = max(v * v for v in sector_norm.values())
    for k, (_, vals) in enumerate(fields[: max(cfg.samples, 3)]):
        _, sel = fam.maximal(vals, return_selector=True)
        K = ttstar_matrix(sel, mode="pixelated")
        K1, _ = split_K(sel, K)
        ratio = K1.spectral_norm() / sup_sq
        count += 1
        if ratio > worst:
            worst, loc = ratio, f"sample={k}"
    return count, worst, loc


# --------------------------------------------------------------------------
# composition checks (thm2_18 / case1_20 / case2_23 / gg24)


def _sample_mn(rng: np.random.Generator, cfg: CheckConfig, case: str):
    """Random parameter pairs m = (h, theta, delta), n = (k, beta, eta)."""
    s = 1.0 / cfg.n
    heights = [cfg.h_max * 2.0**-i for i in range(3)]
    eccs = [2.0**-e for e in (2, 3, 4)]
    for _ in range(10000):
        if case == "any":
            h, k = rng.choice(heights, 2, replace=True)
            if h < k:
                h, k = k, h
        else:
            h, k = sorted(rng.choice(heights, 2, replace=False), reverse=True)
        dlt, eta = rng.choice(eccs, 2, replace=True)
        if dlt * h < 2 * s or eta * k < 2 * s:
            continue
        th = math.atan(rng.uniform(cfg.slope_lo, cfg.slope_hi))
        be = math.atan(rng.uniform(cfg.slope_lo, cfg.slope_hi))
        w = max(eta * k, dlt * h, k * math.sin(abs(th - be)))
        if case == "case1" and w > dlt * h:
            continue
        if case == "case2" and w <= dlt * h:
            continue
        return RectParam(float(h), th, float(dlt)), RectParam(float(k), be, float(eta)), w
    raise RuntimeError(f"could not sample parameters for case {case!r}")


def _composition_check(name: str, case: str, cfg: CheckConfig, seed: int):
    from .operators import _centered_average

    rng = _rng(name, seed)
    fields = families.sample_suite(cfg.n, 12, rng, slope_lo=cfg.slope_lo,
                                   slope_hi=cfg.slope_hi)
    margin = int(math.ceil(0.25 * cfg.h_max * cfg.n))
    worst, loc = 0.0, "-"
    for k in range(cfg.samples):
        m, npar, w = _sample_mn(rng, cfg, case)
        f = GridField(fields[k % len(fields)][1])
        lhs = apply_Tm(m, apply_Tm(npar, f)).values
        if case == "width":
            rhs = _centered_average(f, 2.0 * m.h, w / m.h, m.theta) / (
                m.weight * npar.weight
            )
        elif case == "case1":
            rhs = apply_Sm(m, f).values
        elif case == "case2":
            rhs = apply_Sm(m, apply_Wn(npar, f)).values
        else:  # the combined bound, all parameter orderings
            rhs = (
                apply_Sm(m, f).values
                + apply_Sm(npar, f).values
                + apply_Sm(m, apply_Wn(npar, f)).values
                + apply_Wn(m, apply_Sm(npar, f)).values
            )
        r, ij = _max_ratio(lhs, rhs, margin)
        if r > worst:
            worst, loc = r, f"sample={k} pixel={ij}"
    return cfg.samples, worst, loc


# --------------------------------------------------------------------------
# norm-level checks (thm1, gm_bounded)


def _check_thm1(cfg: CheckConfig, seed: int):
    from .experiments import avs_sweep

    rows = avs_sweep(n=cfg.n, num_configs=cfg.samples, seed=seed,
                     h_max=cfg.h_max, rounds=1, tol=1e-6, max_iter=300)
    worst, loc = 0.0, "-"
    for row in rows:
        if row["implied_C"] > worst:
            worst, loc = row["implied_C"], f"config={row['config_id']}"
    return len(rows), worst, loc


def _check_gm_bounded(cfg: CheckConfig, seed: int):
    slopes = [cfg.slope_hi * k / cfg.dir_count for k in range(cfg.dir_count, 0, -1)]
    dirs = make_directions("explicit", slopes=slopes)
    heights = [h for h in (0.5, 0.25) if h * 2.0**-6 >= 1.0 / cfg.n]
    f = GridField(families.kakeya_fan_field(cfg.n, 2.0**-6, cfg.slope_lo, cfg.slope_hi))
    ratios = []
    for exp in range(2, 7):
        ecc_list = [2.0**-e for e in range(2, exp + 1)]
        gm = grand_maximal(f, ecc_list, dirs, heights, cfg.offsets_per_axis)
        ratios.append(gm.l2_norm())
    worst, loc = 0.0, "-"
    for k in range(1, len(ratios)):
        growth = ratios[k] / ratios[k - 1]
        if growth > worst:
            worst, loc = growth, f"delta0=2^-{k + 2}"
    return len(ratios), worst, loc


# --------------------------------------------------------------------------
# catalog

_CHECKS = {
    "eq5": _check_eq5,
    "eq6": _check_eq6,
    "eq7": _check_eq7,
    "geom10": _check_geom10,
    "tt11": _check_tt11,
    "tt9": _check_tt9,
    "thm2_18": lambda cfg, seed: _composition_check("thm2_18", "width", cfg, seed),
    "case1_20": lambda cfg, seed: _composition_check("case1_20", "case1", cfg, seed),
    "case2_23": lambda cfg, seed: _composition_check("case2_23", "case2", cfg, seed),
    "gg24": lambda cfg, seed: _composition_check("gg24", "any", cfg, seed),
    "thm1": _check_thm1,
    "gm_bounded": _check_gm_bounded,
}


def run_check(name: str, config: CheckConfig | None = None, seed: int = 0) -> CheckReport:
    if name not in _CHECKS:
        raise KeyError(f"unknown check name {name!r}; valid: {', '.join(CHECK_NAMES)}")
    cfg = config if config is not None else DEFAULT_CONFIGS[name]
    samples, max_ratio, loc = _CHECKS[name](cfg, seed)
    bound = cfg.bound if cfg.bound is not None else regression_bound(name)
    passed = max_ratio <= bound
    return CheckReport(name=name, samples=samples, max_ratio=max_ratio,
                       location=f"seed={seed} {loc}", passed=passed,
                       bound=bound, seed=seed)


def run_catalog(names=None, seed: int = 0,
                configs: dict[str, CheckConfig] | None = None) -> list[CheckReport]:
    if names is None or names == ("all",) or names == ["all"]:
        names = CHECK_NAMES
    out = []
    for name in names:
        cfg = (configs or {}).get(name)
        out.append(run_check(name, cfg, seed))
    return out
