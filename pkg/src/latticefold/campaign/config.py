"""Flat key=value run configuration.

One documented key per tunable; unknown keys are hard errors so typos
fail loudly.  CLI flags override file values, file values override the
built-in defaults.
"""

from __future__ import annotations

import os
from pathlib import Path

from ..errors import ConfigError
from ..fitness import FitnessConfig
from ..ga import GaConfig
from ..neutronics import FidelityTier, NoiseModel, TwoGroupXS, XsLibrary
from ..policy import DpoConfig

OUT_DIR_ENV = "LATTICEFOLD_OUT_DIR"

_XS_FIELDS = ("d1", "d2", "sa1", "sa2", "nu_sf1", "nu_sf2", "ss12")
_XS_DEFAULTS = {
    "fuel": (1.4, 0.4, 0.010, 0.090, 0.007, 0.160, 0.018),
    "gd": (1.4, 0.4, 0.010, 0.750, 0.005, 0.050, 0.018),
    "guide_tube": (1.8, 0.3, 0.0004, 0.010, 0.0, 0.0, 0.045),
}

KNOWN_KEYS: dict[str, tuple[type, object]] = {
    "seed": (int, 0),
    "fidelity": (str, "high"),
    "evaluator": (str, "builtin"),
    "fitness.w_q": (float, 0.6),
    "fitness.w_dh": (float, 0.4),
    "fitness.k_lo": (float, 1.02),
    "fitness.k_hi": (float, 1.08),
    "fitness.penalty_weight": (float, 100.0),
    "fitness.k_target": (float, 1.05),
    "noise.sigma_k": (float, 0.003),
    "noise.sigma_rel": (float, 0.02),
    "ga.population": (int, 50),
    "ga.p_crossover": (float, 0.5),
    "ga.p_mutation": (float, 0.2),
    "ga.tournament_k": (int, 3),
    "ga.eval_budget": (int, 1000),
    "ga.elitism": (int, 1),
    "dpo.beta": (float, 0.01),
    "dpo.learning_rate": (float, 25.0),
    "dpo.steps": (int, 500),
    "dpo.candidates_per_step": (int, 2),
    "dpo.temperature": (float, 1.0),
    "dpo.pretrain_low_n": (int, 2000),
    "dpo.pretrain_high_n": (int, 400),
    "dpo.pretrain_high_weight": (float, 10.0),
    "dpo.corpus_low": (str, ""),
    "dpo.corpus_high": (str, ""),
    "sym.inventory": (int, 16),
    "sym.n_candidates": (int, 200),
    "dataset.n": (int, 0),
    "dataset.inventory": (int, 16),
    "calibrate.samples_per_level": (int, 100),
}
for _kind, _vals in _XS_DEFAULTS.items():
    for _f, _v in zip(_XS_FIELDS, _vals):
        KNOWN_KEYS[f"xs.{_kind}.{_f}"] = (float, _v)

# Records written when a tier-dependent dataset size is left at 0.
DATASET_DEFAULT_N = {FidelityTier.LOW: 5000, FidelityTier.HIGH: 1000}


def default_config() -> dict:
    return {key: default for key, (_, default) in KNOWN_KEYS.items()}


def parse_config_file(path: str | Path) -> dict:
    """Read overrides from a flat key = value file."""
    out: dict[str, object] = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in KNOWN_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        caster = KNOWN_KEYS[key][0]
        try:
            out[key] = caster(value)
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {value!r}") from exc
    return out


def resolve_config(file_path: str | Path | None = None, overrides: dict | None = None) -> dict:
    cfg = default_config()
    if file_path is not None:
        cfg.update(parse_config_file(file_path))
    for key, value in (overrides or {}).items():
        if key not in KNOWN_KEYS:
            raise ConfigError(f"unknown config key {key!r}")
        if value is not None:
            cfg[key] = KNOWN_KEYS[key][0](value)
    if cfg["seed"] < 0:
        raise ConfigError("seed must be non-negative")
    return cfg


def snapshot_text(cfg: dict) -> str:
    return "".join(f"{key} = {cfg[key]!r}\n" for key in sorted(cfg))


def default_out_dir() -> Path:
    return Path(os.environ.get(OUT_DIR_ENV, "runs"))


def make_fitness(cfg: dict) -> FitnessConfig:
    return FitnessConfig(
        w_q=cfg["fitness.w_q"],
        w_dh=cfg["fitness.w_dh"],
        k_lo=cfg["fitness.k_lo"],
        k_hi=cfg["fitness.k_hi"],
        penalty_weight=cfg["fitness.penalty_weight"],
        k_target=cfg["fitness.k_target"],
    )


def make_library(cfg: dict) -> XsLibrary:
    def entry(kind: str) -> TwoGroupXS:
        return TwoGroupXS(*(cfg[f"xs.{kind}.{f}"] for f in _XS_FIELDS))

    return XsLibrary(fuel=entry("fuel"), gd=entry("gd"), guide_tube=entry("guide_tube"))


def make_noise(cfg: dict) -> NoiseModel:
    return NoiseModel(sigma_k=cfg["noise.sigma_k"], sigma_rel=cfg["noise.sigma_rel"])


def make_tier(cfg: dict) -> FidelityTier:
    return FidelityTier.from_name(cfg["fidelity"])


def make_ga(cfg: dict) -> GaConfig:
    return GaConfig(
        population=cfg["ga.population"],
        p_crossover=cfg["ga.p_crossover"],
        p_mutation=cfg["ga.p_mutation"],
        tournament_k=cfg["ga.tournament_k"],
        eval_budget=cfg["ga.eval_budget"],
        elitism=cfg["ga.elitism"],
        fidelity=make_tier(cfg),
        seed=cfg["seed"],
    )


def make_dpo(cfg: dict) -> DpoConfig:
    return DpoConfig(
        beta=cfg["dpo.beta"],
        learning_rate=cfg["dpo.learning_rate"],
        steps=cfg["dpo.steps"],
        candidates_per_step=cfg["dpo.candidates_per_step"],
        temperature=cfg["dpo.temperature"],
        fidelity=make_tier(cfg),
        seed=cfg["seed"],
    )
