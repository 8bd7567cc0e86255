import configparser
import dataclasses
import math
import os
from typing import Dict, List, Optional

import numpy as np

from src.errors import DomainError
from src.harness import SweepConfig
from src.spectral import InitialData, SimConfig

DEFAULT_SECTION = "sim"
INITIAL_PREFIX = "initial_"


def _float_list(text: str) -> List[float]:
    return [float(item) for item in text.replace(";", ",").split(",") if item.strip()]


def _boolean(text: str) -> bool:
    text = text.strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: '{text}'")


def _length(text: str) -> float:
    # plain numbers or multiples of pi: 6.283, 2pi, 2*pi, pi
    text = text.strip().lower()
    if text.endswith("pi"):
        factor = text[:-2].rstrip("*").strip()
        return (float(factor) if factor else 1.0) * math.pi
    return float(text)


# key -> parser for every dataclass field that is not a plain string
SIM_KEYS = {
    "nu": float,
    "T": float,
    "dt": lambda s: s.strip() if s.strip() == "auto" else float(s),
    "N": int,
    "box_length": _length,
    "dealias": str.strip,
    "record_every": float,
    "snapshot_times": _float_list,
    "cfl": float,
    "progress": _boolean,
}
INITIAL_KEYS = {
    "kind": str.strip,
    "amplitude": float,
    "wavenumber": int,
    "seed": int,
    "max_mode": int,
    "profile": str.strip,
    "ring_radius": float,
    "ring_width": float,
    "r_min": float,
    "r_max": float,
    "neutralized": _boolean,
    "core_radius": float,
    "cap": lambda s: s.strip() if s.strip() == "grid" else float(s),
    "center": lambda s: tuple(_float_list(s)),
}
SWEEP_KEYS = {
    "nu_list": _float_list,
    "theta": str.strip,
    "theta_scale": float,
    "M": lambda s: s.strip() if s.strip() == "auto" else float(s),
    "p0": float,
    "R_constant": float,
    "calibrations": _float_list,
    "control_run": _boolean,
    "output_dir": str.strip,
    "workers": int,
    "bootstrap_samples": int,
    "perturbation_amplitude": float,
    "seed": int,
    "nu_max": float,
    "nu_min": float,
    "nu_count": int,
}


def _section(parser: configparser.ConfigParser, name: str, keys: Dict, prefix="") -> Dict:
    if not parser.has_section(name):
        return {}
    values = {}
    for raw_key, text in parser.items(name):
        if not raw_key.startswith(prefix):
            continue
        key = raw_key[len(prefix):]
        if key not in keys:
            if not prefix and not raw_key.startswith(INITIAL_PREFIX):
                raise DomainError(f"Unknown key '{raw_key}' in [{name}]")
            continue
        try:
            values[key] = keys[key](text)
        except ValueError as error:
            raise DomainError(f"Bad value for '{raw_key}' in [{name}]: {error}") from error
    return values


def read_config(path: str) -> configparser.ConfigParser:
    """
    INI-style config; a flat key = value file without a section header is read as
    if it sat under [sim].
    """
    if not os.path.exists(path):
        raise DomainError(f"Config file not found: {path}")
    with open(path) as file:
        text = file.read()
    # keep key case: T and N are distinct from t and n
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.MissingSectionHeaderError:
        parser.read_string(f"[{DEFAULT_SECTION}]\n" + text)
    return parser


def load_sim_config(parser: configparser.ConfigParser) -> SimConfig:
    initial = _section(parser, "initial", INITIAL_KEYS)
    # flat files carry initial data as initial_<key> under [sim]
    initial.update(_section(parser, DEFAULT_SECTION, INITIAL_KEYS, prefix=INITIAL_PREFIX))
    sim = _section(parser, DEFAULT_SECTION, SIM_KEYS)
    return SimConfig(initial_data=InitialData(**initial), **sim)


def load_sweep_config(parser: configparser.ConfigParser, output_dir: Optional[str] = None) -> SweepConfig:
    sweep = _section(parser, "sweep", SWEEP_KEYS)
    # a log-spaced range is an alternative to an explicit nu_list
    nu_max, nu_min, nu_count = sweep.pop("nu_max", None), sweep.pop("nu_min", None), sweep.pop("nu_count", 8)
    if "nu_list" not in sweep and nu_max is not None:
        if nu_min is None:
            raise DomainError("nu_max needs nu_min")
        sweep["nu_list"] = [float(nu) for nu in np.geomspace(nu_max, nu_min, nu_count)]
    if output_dir is not None:
        sweep["output_dir"] = output_dir
    return SweepConfig(base=load_sim_config(parser), **sweep)


def sim_config_from_file(path: str) -> SimConfig:
    return load_sim_config(read_config(path))


def sweep_config_from_file(path: str, output_dir: Optional[str] = None) -> SweepConfig:
    return load_sweep_config(read_config(path), output_dir)


class Workspace:
    """An output directory for runs and sweeps."""

    def __init__(self, path: str):
        self.root = path

    def build_path(self, *path):
        # [ "A", "B" ] -> root/A/B
        return os.path.join(self.root, *path)

    def create_dir(self, *path):
        path = self.build_path(*path)
        os.makedirs(path, exist_ok=True)
        return path


def sim_config_dict(cfg: SimConfig) -> Dict:
    return dataclasses.asdict(cfg)
