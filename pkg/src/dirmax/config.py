"""Experiment configuration: flat key = value sections, every field defaulted.

The text form round-trips losslessly; command-line flags override file
values.  Lists serialize comma-separated.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, fields


@dataclass
class ExperimentConfig:
    # run
    seed: int = 0
    out: str = "out"
    threads: int = 1
    grid: int = 256
    # scales (norm sweeps)
    h_max: float = 0.5
    num_heights: int = 2
    num_eccs: int = 3
    ecc_step: int = 2
    offsets: int = 3
    # logn / lacunary
    logn_values: tuple = (2, 4, 8, 16, 32, 64)
    logn_rounds: int = 2
    logn_tol: float = 1e-5
    logn_max_iter: int = 80
    lacunary_ratio: float = 0.5
    # avs
    avs_configs: int = 20
    avs_h_max: float = 0.25
    avs_rounds: int = 1
    avs_tol: float = 1e-4
    avs_max_iter: int = 40
    avs_slopes_min: int = 4
    avs_slopes_max: int = 10
    # gm
    gm_delta0_exps: tuple = (2, 3, 4, 5, 6)
    gm_dir_count: int = 8
    gm_slope_hi: float = 0.1
    gm_heights: tuple = (0.5, 0.25)
    # sharpness
    sharpness_delta_exps: tuple = (1, 2, 3, 4, 5, 6)
    sharpness_rounds: int = 2
    sharpness_tol: float = 1e-5
    sharpness_max_iter: int = 120
    sharpness_width_px: float = 2.0
    # verify / oracle
    verify_checks: tuple = ("all",)
    oracle_grid: int = 16


_SECTIONS = {
    "run": ("seed", "out", "threads", "grid"),
    "scales": ("h_max", "num_heights", "num_eccs", "ecc_step", "offsets"),
    "logn": ("logn_values", "logn_rounds", "logn_tol", "logn_max_iter"),
    "lacunary": ("lacunary_ratio",),
    "avs": ("avs_configs", "avs_h_max", "avs_rounds", "avs_tol", "avs_max_iter",
            "avs_slopes_min", "avs_slopes_max"),
    "gm": ("gm_delta0_exps", "gm_dir_count", "gm_slope_hi", "gm_heights"),
    "sharpness": ("sharpness_delta_exps", "sharpness_rounds", "sharpness_tol",
                  "sharpness_max_iter", "sharpness_width_px"),
    "verify": ("verify_checks",),
    "oracle": ("oracle_grid",),
}

_FIELD_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def _format_value(v) -> str:
    if isinstance(v, tuple):
        return ",".join(_format_value(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _parse_value(text: str, default):
    text = text.strip()
    if isinstance(default, tuple):
        if not text:
            return ()
        elem = default[0] if default else "0"
        parts = [p.strip() for p in text.split(",") if p.strip()]
        if isinstance(elem, int):
            return tuple(int(p) for p in parts)
        if isinstance(elem, float):
            return tuple(float(p) for p in parts)
        return tuple(parts)
    if isinstance(default, bool):
        return text.lower() in ("1", "true", "yes", "on")
    if isinstance(default, int):
        return int(text)
    if isinstance(default, float):
        return float(text)
    return text


def config_to_text(cfg: ExperimentConfig) -> str:
    buf = io.StringIO()
    for section, names in _SECTIONS.items():
        buf.write(f"[{section}]\n")
        for name in names:
            buf.write(f"{name} = {_format_value(getattr(cfg, name))}\n")
        buf.write("\n")
    return buf.getvalue()


def config_from_text(text: str) -> ExperimentConfig:
    parser = configparser.ConfigParser()
    parser.read_string(text)
    cfg = ExperimentConfig()
    known = {name for names in _SECTIONS.values() for name in names}
    for section in parser.sections():
        if section not in _SECTIONS:
            raise ValueError(f"unknown config section [{section}]")
        for name, raw in parser.items(section):
            if name not in known:
                raise ValueError(f"unknown config key {name!r} in [{section}]")
            default = getattr(ExperimentConfig(), name)
            setattr(cfg, name, _parse_value(raw, default))
    return cfg


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        return config_from_text(fh.read())


def save_config(cfg: ExperimentConfig, path) -> None:
    with open(path, "w") as fh:
        fh.write(config_to_text(cfg))
