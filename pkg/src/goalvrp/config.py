"""Run configuration: defaults, JSON config files and flag overrides."""
from __future__ import annotations

import copy
import json
from pathlib import Path

from .goalprog import WeightSolverConfig
from .moea import DecompositionConfig, EvolutionConfig
from .pilot import PRESETS, PilotBudget
from .solution import DELAY_REFS

DEFAULTS = {
    "delay_ref": "window_start",
    "timing": True,
    "pilot": {
        "preset": "desk",
        "population": 100,
        "subset_evaluations": None,  # None -> taken from the preset
        "final_evaluations": None,
        "final_repetitions": None,
        "neighborhood": 20,
        "init": "mixed",
    },
    "ga": {
        "population": 500,
        "budget": 50_000,
        "crossover_rate": 0.9,
        "mutation_rate": None,
        "elite_fraction": 0.05,
        "tournament_size": 2,
        "init": "mixed",
        "repetitions": 8,
    },
    "goal": {"epsilon": 1e-6, "normalize": False},
    "weights": {"restarts": 8, "grid_resolution": 12, "min_weight": 1e-6, "max_sweeps": 60},
}


class ConfigError(ValueError):
    pass


def deep_merge(base: dict, override: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        where = f"{path}{key}"
        if key not in base:
            raise ConfigError(f"unknown config key {where!r}")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"config key {where!r} must be a table")
            out[key] = deep_merge(base[key], value, where + ".")
        else:
            out[key] = value
    return out


def load_config(path=None, overrides: dict | None = None) -> dict:
    cfg = copy.deepcopy(DEFAULTS)
    if path is not None:
        try:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
        if not isinstance(doc, dict):
            raise ConfigError(f"{path}: config must be a JSON object")
        cfg = deep_merge(cfg, doc)
    if overrides:
        cfg = deep_merge(cfg, overrides)
    if cfg["delay_ref"] not in DELAY_REFS:
        raise ConfigError(f"delay_ref must be one of {DELAY_REFS}")
    if cfg["pilot"]["preset"] not in PRESETS:
        raise ConfigError(f"pilot.preset must be one of {sorted(PRESETS)}")
    return cfg


def pilot_budget(cfg: dict) -> PilotBudget:
    p = cfg["pilot"]
    base = PRESETS[p["preset"]]
    return PilotBudget(
        p["subset_evaluations"] or base.subset_evaluations,
        p["final_evaluations"] or base.final_evaluations,
        p["final_repetitions"] or base.final_repetitions,
    )


def pilot_evolution(cfg: dict, seed: int = 0) -> EvolutionConfig:
    ga = cfg["ga"]
    return EvolutionConfig(population=cfg["pilot"]["population"], budget=max(cfg["pilot"]["population"], 1),
                           crossover_rate=ga["crossover_rate"], mutation_rate=ga["mutation_rate"], seed=seed,
                           init=cfg["pilot"]["init"])


def pilot_decomposition(cfg: dict) -> DecompositionConfig:
    return DecompositionConfig(neighborhood=cfg["pilot"]["neighborhood"])


def ga_evolution(cfg: dict, seed: int = 0) -> EvolutionConfig:
    ga = cfg["ga"]
    return EvolutionConfig(population=ga["population"], budget=ga["budget"], crossover_rate=ga["crossover_rate"],
                           mutation_rate=ga["mutation_rate"], seed=seed, elite_fraction=ga["elite_fraction"],
                           tournament_size=ga["tournament_size"], init=ga["init"])


def weight_solver(cfg: dict, seed: int = 0) -> WeightSolverConfig:
    w = cfg["weights"]
    return WeightSolverConfig(restarts=w["restarts"], grid_resolution=w["grid_resolution"],
                              min_weight=w["min_weight"], max_sweeps=w["max_sweeps"], seed=seed)
