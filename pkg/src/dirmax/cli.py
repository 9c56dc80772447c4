"""Command-line experiment harness.

Subcommands: logn | lacunary | avs | gm | sharpness | verify | oracle.
Every command writes one CSV with a fixed documented header into the output
directory, plus a ``<command>_timings.csv`` sidecar recording wall-clock
seconds per row.  Result values are deterministic given (config, seed,
threads); the sidecar (and the seconds column of the logn/lacunary tables)
is the only volatile content.

Exit status: 0 on success, 1 when a verify check fails, 2 on bad invocation.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from . import _engine, experiments, oracles
from .config import ExperimentConfig, load_config, save_config

CSV_HEADERS = {
    "logn": "N,norm_est,seconds",
    "lacunary": "N,norm_est,seconds",
    "avs": "config_id,norm_omega,sup_sector,norm_anchor,implied_C",
    "gm": "delta0,family,ratio",
    "sharpness": "delta,norm_est",
    "verify": "check,samples,max_ratio,bound,pass,seed",
    "oracle": "oracle,deviation,tolerance,pass",
}


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, bool):
        return str(v).lower()
    return str(v)


def _write_csv(path: Path, header: str, rows: list[list]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_timings(path: Path, labels: list, seconds: list[float]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write("row,seconds\n")
        for label, sec in zip(labels, seconds):
            fh.write(f"{label},{sec:.6f}\n")


def _sweep_scales(cfg: ExperimentConfig):
    return experiments._sweep_scales(cfg.h_max, cfg.num_heights, cfg.num_eccs,
                                     cfg.ecc_step, cfg.offsets)


def cmd_logn(cfg: ExperimentConfig, out: Path) -> int:
    rows = experiments.logn_sweep(cfg.grid, cfg.logn_values, cfg.seed,
                                  scales=_sweep_scales(cfg), rounds=cfg.logn_rounds,
                                  tol=cfg.logn_tol, max_iter=cfg.logn_max_iter)
    _write_csv(out / "logn.csv", CSV_HEADERS["logn"],
               [[r["N"], r["norm_est"], round(r["seconds"], 6)] for r in rows])
    _write_timings(out / "logn_timings.csv", [r["N"] for r in rows],
                   [r["seconds"] for r in rows])
    return 0


def cmd_lacunary(cfg: ExperimentConfig, out: Path) -> int:
    rows = experiments.lacunary_sweep(cfg.grid, cfg.logn_values, cfg.seed,
                                      ratio=cfg.lacunary_ratio,
                                      scales=_sweep_scales(cfg),
                                      rounds=cfg.logn_rounds, tol=cfg.logn_tol,
                                      max_iter=cfg.logn_max_iter)
    _write_csv(out / "lacunary.csv", CSV_HEADERS["lacunary"],
               [[r["N"], r["norm_est"], round(r["seconds"], 6)] for r in rows])
    _write_timings(out / "lacunary_timings.csv", [r["N"] for r in rows],
                   [r["seconds"] for r in rows])
    return 0


def cmd_avs(cfg: ExperimentConfig, out: Path) -> int:
    rows = experiments.avs_sweep(cfg.grid, cfg.avs_configs, cfg.seed,
                                 h_max=cfg.avs_h_max, rounds=cfg.avs_rounds,
                                 tol=cfg.avs_tol, max_iter=cfg.avs_max_iter,
                                 slopes_min=cfg.avs_slopes_min,
                                 slopes_max=cfg.avs_slopes_max)
    _write_csv(out / "avs.csv", CSV_HEADERS["avs"],
               [[r["config_id"], r["norm_omega"], r["sup_sector"],
                 r["norm_anchor"], r["implied_C"]] for r in rows])
    _write_timings(out / "avs_timings.csv", [r["config_id"] for r in rows],
                   [r["seconds"] for r in rows])
    return 0


def cmd_gm(cfg: ExperimentConfig, out: Path) -> int:
    rows = experiments.gm_sweep(cfg.grid, cfg.seed,
                                delta0_exps=cfg.gm_delta0_exps,
                                dir_count=cfg.gm_dir_count,
                                slope_hi=cfg.gm_slope_hi,
                                heights=cfg.gm_heights, offsets=cfg.offsets)
    _write_csv(out / "gm.csv", CSV_HEADERS["gm"],
               [[r["delta0"], r["family"], r["ratio"]] for r in rows])
    _write_timings(out / "gm_timings.csv",
                   [f"{r['delta0']}/{r['family']}" for r in rows],
                   [r["seconds"] for r in rows])
    return 0


def cmd_sharpness(cfg: ExperimentConfig, out: Path) -> int:
    rows = experiments.sharpness_sweep(cfg.grid, cfg.seed,
                                       delta_exps=cfg.sharpness_delta_exps,
                                       rounds=cfg.sharpness_rounds,
                                       tol=cfg.sharpness_tol,
                                       max_iter=cfg.sharpness_max_iter,
                                       offsets=cfg.offsets,
                                       width_px=cfg.sharpness_width_px)
    _write_csv(out / "sharpness.csv", CSV_HEADERS["sharpness"],
               [[r["delta"], r["norm_est"]] for r in rows])
    _write_timings(out / "sharpness_timings.csv", [r["delta"] for r in rows],
                   [r["seconds"] for r in rows])
    return 0


def cmd_verify(cfg: ExperimentConfig, out: Path) -> int:
    from .verify import CHECK_NAMES, run_check

    names = cfg.verify_checks
    if names == ("all",) or names == ["all"]:
        names = CHECK_NAMES
    reports, seconds = [], []
    for name in names:
        t0 = time.perf_counter()
        reports.append(run_check(name, seed=cfg.seed))
        seconds.append(time.perf_counter() - t0)
    _write_csv(out / "verify.csv", CSV_HEADERS["verify"],
               [[r.name, r.samples, r.max_ratio, r.bound, r.passed, r.seed]
                for r in reports])
    _write_timings(out / "verify_timings.csv", [r.name for r in reports], seconds)
    return 0 if all(r.passed for r in reports) else 1


def cmd_oracle(cfg: ExperimentConfig, out: Path) -> int:
    rows, seconds = [], []
    for name in oracles.ORACLES:
        t0 = time.perf_counter()
        rows.extend(oracles.run_oracles(n=cfg.oracle_grid, seed=cfg.seed,
                                        only=name))
        seconds.append(time.perf_counter() - t0)
    _write_csv(out / "oracle.csv", CSV_HEADERS["oracle"],
               [[r["oracle"], r["deviation"], r["tolerance"], r["pass"]]
                for r in rows])
    _write_timings(out / "oracle_timings.csv", [r["oracle"] for r in rows], seconds)
    return 0 if all(r["pass"] for r in rows) else 1


_COMMANDS = {
    "logn": cmd_logn,
    "lacunary": cmd_lacunary,
    "avs": cmd_avs,
    "gm": cmd_gm,
    "sharpness": cmd_sharpness,
    "verify": cmd_verify,
    "oracle": cmd_oracle,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dirmax",
        description="Directional maximal averages laboratory.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=str, default=None, help="config file path")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", type=str, default=None, help="output directory")
        p.add_argument("--grid", type=int, default=None, help="raster side length")
        p.add_argument("--threads", type=int, default=None, help="0 = all cores")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else ExperimentConfig()
        if args.seed is not None:
            cfg.seed = args.seed
        if args.out is not None:
            cfg.out = args.out
        if args.grid is not None:
            cfg.grid = args.grid
        if args.threads is not None:
            cfg.threads = args.threads
        _engine.set_workers(cfg.threads)
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        save_config(cfg, out / f"{args.command}_config.txt")
        return _COMMANDS[args.command](cfg, out)
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
