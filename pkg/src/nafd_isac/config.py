"""JSON run configuration: defaults, strict validation, object builders.

A configuration is a plain nested dict. Every key has a default, unknown
keys are rejected by name, and builders turn the validated dict into the
dataclasses the rest of the package consumes. Power-like quantities are
written in dBm in config files and converted here.
"""

from __future__ import annotations

import copy
import json

import numpy as np

from .channel import FadingParams
from .comm import BeamPolicy
from .dqn import DqnConfig
from .geometry import (SPEED_OF_LIGHT, NetworkLayout, make_circle_deployment,
                       make_random_deployment)
from .moo import Nsga2Config
from .scenario import ObjectiveWeights, Scenario
from .sensing import RadarParams

__all__ = ["ConfigError", "DEFAULT_CONFIG", "dbm_to_watt", "watt_to_dbm",
           "load_config", "validate_config", "apply_override",
           "build_layout", "build_scenario", "build_nsga2_config",
           "build_dqn_config"]

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    pass


def dbm_to_watt(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watt_to_dbm(watt: float) -> float:
    if watt <= 0:
        raise ValueError(f"power must be positive to express in dBm, got {watt}")
    return 10.0 * np.log10(watt) + 30.0


DEFAULT_CONFIG = {
    "schema_version": SCHEMA_VERSION,
    "seed": 0,
    "trials": 200,
    "deployment": {
        "kind": "circle",          # circle | random
        "rrus": 16,
        "circle_radius": 200.0,
        "region_radius": 300.0,
        "dl_users": 3,
        "ul_users": 3,
        "antennas": 16,
        "carrier_hz": 3.5e9,
    },
    "fading": {
        "alpha_dl": 3.7,
        "alpha_ul": 3.7,
        "alpha_uu": 4.0,
        "alpha_cross": 3.0,
        "noise_dl_dbm": -83.0,
        "noise_ul_dbm": -83.0,
        "est_error_dl_dbm": -105.0,
        "est_error_cross_dbm": -105.0,
    },
    "radar": {
        "delta_f_hz": 1.0e6,
        "gain_tx": 1.0,
        "gain_rx": 1.0,
        "rcs": 1.0,
        "noise_dbm": -105.0,
    },
    "policy": {
        "combiner": "zf",          # zf | mrc
        "numerator_mode": "coherent",
        "aim_offset": [0.0, 0.0],
    },
    "weights": {
        "rate_dl": 1.0,
        "rate_ul": 1.0,
        "position": 1.0,
        "orientation": 1.0,
    },
    "power": {
        "p_max_w": 1.0,
        "p_ul_w": 0.2,
    },
    "nsga2": {
        "population": 100,
        "generations": 200,
        "crossover_prob": 0.9,
        "crossover_eta": 15.0,
        "mutation_prob": None,
        "mutation_eta": 20.0,
        "seed": None,              # null: reuse the global seed
    },
    "dqn": {
        "episodes": 40,
        "steps_per_episode": 50,
        "levels": 10,
        "hidden": [128, 128],
        "learning_rate": 1.0e-3,
        "discount": 0.9,
        "buffer_capacity": 10000,
        "batch_size": 64,
        "target_sync": 200,
        "exploit_start": 0.1,
        "exploit_end": 0.95,
        "anneal_steps": 1500,
        "seed": None,
    },
    "experiment": {
        "grid_cells": 61,
        "grid_extent": 300.0,
        "sweep_variable": "pilot",  # pilot | data
        "sweep_values": None,       # null: evenly spaced defaults
        "antenna_counts": [4, 16],
        "sensing_symbols": [10, 25, 50, 75, 100, 150, 190],
        "block_symbols": 200,
    },
}


def _merge(user, defaults, path):
    if not isinstance(user, dict):
        raise ConfigError(f"expected a table at '{path or 'top level'}', "
                          f"got {type(user).__name__}")
    merged = {}
    for key, default in defaults.items():
        here = f"{path}.{key}" if path else key
        if key not in user:
            merged[key] = copy.deepcopy(default)
        elif isinstance(default, dict):
            merged[key] = _merge(user[key], default, here)
        else:
            merged[key] = user[key]
    for key in user:
        if key not in defaults:
            here = f"{path}.{key}" if path else key
            raise ConfigError(f"unknown config key '{here}'")
    return merged


def validate_config(raw: dict) -> dict:
    """Fill defaults and reject unknown keys, returning a complete config."""
    cfg = _merge(raw, DEFAULT_CONFIG, "")
    if cfg["schema_version"] != SCHEMA_VERSION:
        raise ConfigError(
            f"unsupported schema_version {cfg['schema_version']!r}, "
            f"this build reads version {SCHEMA_VERSION}"
        )
    if cfg["deployment"]["kind"] not in ("circle", "random"):
        raise ConfigError(
            f"deployment.kind must be 'circle' or 'random', "
            f"got {cfg['deployment']['kind']!r}"
        )
    return cfg


def load_config(path=None) -> dict:
    if path is None:
        return validate_config({})
    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}")
    return validate_config(raw)


def apply_override(raw: dict, dotted: str, text: str) -> None:
    """Set `a.b.c` in a raw config dict from its command-line text form.

    Values parse as JSON when possible, otherwise stay strings, so
    `--set dqn.episodes=5` and `--set policy.combiner=mrc` both work.
    Unknown keys are caught later by validation.
    """
    keys = dotted.split(".")
    if not all(keys):
        raise ConfigError(f"malformed override key {dotted!r}")
    try:
        value = json.loads(text)
    except json.JSONDecodeError:
        value = text
    node = raw
    for key in keys[:-1]:
        node = node.setdefault(key, {})
        if not isinstance(node, dict):
            raise ConfigError(f"cannot set '{dotted}': '{key}' is not a table")
    node[keys[-1]] = value


# -- builders ----------------------------------------------------------------


def build_layout(cfg: dict) -> NetworkLayout:
    d = cfg["deployment"]
    wavelength = SPEED_OF_LIGHT / d["carrier_hz"]
    common = dict(m_total=d["rrus"], k_ul=d["ul_users"], k_dl=d["dl_users"],
                  region_radius=d["region_radius"], seed=cfg["seed"],
                  n_antennas=d["antennas"], wavelength=wavelength)
    if d["kind"] == "circle":
        return make_circle_deployment(circle_radius=d["circle_radius"], **common)
    return make_random_deployment(**common)


def build_fading(cfg: dict) -> FadingParams:
    f = cfg["fading"]
    return FadingParams(
        alpha_dl=f["alpha_dl"], alpha_ul=f["alpha_ul"], alpha_uu=f["alpha_uu"],
        alpha_cross=f["alpha_cross"],
        noise_dl=dbm_to_watt(f["noise_dl_dbm"]),
        noise_ul=dbm_to_watt(f["noise_ul_dbm"]),
        est_error_dl=dbm_to_watt(f["est_error_dl_dbm"]),
        est_error_cross=dbm_to_watt(f["est_error_cross_dbm"]),
    )


def build_radar(cfg: dict, wavelength: float) -> RadarParams:
    r = cfg["radar"]
    return RadarParams(wavelength=wavelength, delta_f=r["delta_f_hz"],
                       gain_tx=r["gain_tx"], gain_rx=r["gain_rx"],
                       rcs=r["rcs"], noise_power=dbm_to_watt(r["noise_dbm"]))


def build_scenario(cfg: dict, layout: NetworkLayout | None = None) -> Scenario:
    if layout is None:
        layout = build_layout(cfg)
    p = cfg["policy"]
    w = cfg["weights"]
    return Scenario(
        layout=layout,
        fading=build_fading(cfg),
        radar=build_radar(cfg, layout.wavelength),
        policy=BeamPolicy(combiner=p["combiner"],
                          numerator_mode=p["numerator_mode"],
                          aim_offset=tuple(p["aim_offset"])),
        weights=ObjectiveWeights(rate_dl=w["rate_dl"], rate_ul=w["rate_ul"],
                                 position=w["position"],
                                 orientation=w["orientation"]),
        p_max=cfg["power"]["p_max_w"],
        p_ul=np.full(layout.k_ul, cfg["power"]["p_ul_w"]),
        trials=cfg["trials"],
        seed=cfg["seed"],
    )


def build_nsga2_config(cfg: dict) -> Nsga2Config:
    n = cfg["nsga2"]
    seed = cfg["seed"] if n["seed"] is None else n["seed"]
    return Nsga2Config(population=n["population"], generations=n["generations"],
                       crossover_prob=n["crossover_prob"],
                       crossover_eta=n["crossover_eta"],
                       mutation_prob=n["mutation_prob"],
                       mutation_eta=n["mutation_eta"], seed=seed)


def build_dqn_config(cfg: dict) -> DqnConfig:
    d = cfg["dqn"]
    seed = cfg["seed"] if d["seed"] is None else d["seed"]
    return DqnConfig(episodes=d["episodes"],
                     steps_per_episode=d["steps_per_episode"],
                     levels=d["levels"], hidden=tuple(d["hidden"]),
                     learning_rate=d["learning_rate"], discount=d["discount"],
                     buffer_capacity=d["buffer_capacity"],
                     batch_size=d["batch_size"], target_sync=d["target_sync"],
                     exploit_start=d["exploit_start"],
                     exploit_end=d["exploit_end"],
                     anneal_steps=d["anneal_steps"], seed=seed)
