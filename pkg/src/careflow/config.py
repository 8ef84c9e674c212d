"""Simulation configuration: typed dataclass, JSON round trip, hashing.

Config files are JSON. Any object of the form {"$include": "relative/path"}
is replaced by the parsed content of that file (resolved against the
including file's directory) before parsing, so rule files, staff-time tables
and scenarios can live in separate files. The scenario, rules and staff_table
sections also accept shipped preset names ("baseline"/"S1"/"S2"/"S3" for
scenarios, "default" for rules and staff tables).

config_hash is the sha256 of the canonical JSON serialization (sorted keys,
compact separators) of the fully resolved configuration; every API response
and persisted run carries it so results can be traced to exact inputs.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .census import (
    ATTRIBUTE_NAMES,
    ArrivalModel,
    BootstrapProfiles,
    CensusScenario,
    ResidentProfile,
    scenario_from_dict,
    scenario_to_dict,
)
from .errors import ConfigError
from .service_need import (
    ClassificationRules,
    StaffTimeTable,
    rules_from_dict,
    rules_to_dict,
    table_from_dict,
    table_to_dict,
)
from .survival import (
    DispositionId,
    FittedLosModel,
    LognormalDispositionParams,
    model_from_params,
)

__all__ = [
    "SimulationConfig",
    "load_config",
    "parse_config",
    "config_to_dict",
    "config_hash",
    "resolve_includes",
    "load_preset_scenario",
    "default_rules",
    "default_staff_table",
    "data_path",
]

_SCENARIO_PRESETS = {
    "baseline": "scenario_baseline.json",
    "S1": "scenario_s1.json",
    "S2": "scenario_s2.json",
    "S3": "scenario_s3.json",
}

_MAX_INCLUDE_DEPTH = 32


@dataclass
class SimulationConfig:
    """Everything a simulation run depends on."""

    horizon_days: int
    replications: int
    master_seed: int
    arrival: ArrivalModel
    los_model: FittedLosModel
    scenario: CensusScenario | BootstrapProfiles
    rules: ClassificationRules
    staff_table: StaffTimeTable
    warmup_days: int = 90

    def __post_init__(self) -> None:
        if self.horizon_days < 1:
            raise ConfigError("horizon_days must be at least 1")
        if self.replications < 1:
            raise ConfigError("replications must be at least 1")
        if self.master_seed < 0:
            raise ConfigError("master_seed must be non-negative")
        if not 0 <= self.warmup_days < self.horizon_days:
            raise ConfigError("warmup_days must satisfy 0 <= warmup < horizon")
        self.staff_table.check_covers(self.rules)


# ---------------------------------------------------------------------------
# shipped data files
# ---------------------------------------------------------------------------


def data_path(name: str) -> Path:
    """Filesystem path of a shipped data file."""
    path = resources.files("careflow").joinpath("data").joinpath(name)
    return Path(str(path))


def _load_data_json(name: str) -> dict:
    return json.loads(data_path(name).read_text(encoding="utf-8"))


def load_preset_scenario(name: str) -> CensusScenario:
    if name not in _SCENARIO_PRESETS:
        raise ConfigError(
            f"unknown scenario preset {name!r}; expected one of {sorted(_SCENARIO_PRESETS)}"
        )
    payload = resolve_includes(_load_data_json(_SCENARIO_PRESETS[name]), data_path("."))
    return scenario_from_dict(payload)


def default_rules() -> ClassificationRules:
    return rules_from_dict(_load_data_json("rules_default.json"))


def default_staff_table() -> StaffTimeTable:
    return table_from_dict(_load_data_json("staff_time_default.json"))


# ---------------------------------------------------------------------------
# include resolution and parsing
# ---------------------------------------------------------------------------


def resolve_includes(node, base_dir: Path, depth: int = 0):
    """Recursively replace {"$include": path} objects with file contents."""
    if depth > _MAX_INCLUDE_DEPTH:
        raise ConfigError("$include nesting exceeds depth limit (cycle?)")
    if isinstance(node, dict):
        if set(node) == {"$include"}:
            target = Path(base_dir) / str(node["$include"])
            try:
                loaded = json.loads(target.read_text(encoding="utf-8"))
            except FileNotFoundError:
                raise ConfigError(f"$include target not found: {target}") from None
            except json.JSONDecodeError as exc:
                raise ConfigError(f"$include target {target} is not valid JSON: {exc}") from None
            return resolve_includes(loaded, target.parent, depth + 1)
        return {key: resolve_includes(value, base_dir, depth) for key, value in node.items()}
    if isinstance(node, list):
        return [resolve_includes(value, base_dir, depth) for value in node]
    return node


def _parse_arrival(payload: dict) -> ArrivalModel:
    try:
        family = payload["family"]
        if family == "negbinom":
            return ArrivalModel(family="negbinom", r=float(payload["r"]), p=float(payload["p"]))
        if family == "poisson":
            return ArrivalModel(family="poisson", lam=float(payload["lam"]))
        raise ConfigError(f"arrival.family: unknown family {family!r}")
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"arrival: {exc}") from exc


def _parse_los_model(payload: dict) -> FittedLosModel:
    try:
        params = {}
        for entry in payload["dispositions"]:
            mu = DispositionId(index=int(entry["index"]), label=str(entry["label"]))
            params[mu] = LognormalDispositionParams(
                eta=float(entry["eta"]), sigma=float(entry["sigma"])
            )
        return model_from_params(params)
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"los_model: {exc}") from exc


def _parse_scenario(payload) -> CensusScenario | BootstrapProfiles:
    if isinstance(payload, str):
        return load_preset_scenario(payload)
    if not isinstance(payload, dict):
        raise ConfigError("scenario must be a preset name or an object")
    if "bootstrap_profiles" in payload:
        try:
            profiles = [
                ResidentProfile(**dict(zip(ATTRIBUTE_NAMES, row)))
                for row in payload["bootstrap_profiles"]
            ]
            return BootstrapProfiles(
                name=str(payload.get("name", "bootstrap")), profiles=profiles
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"scenario.bootstrap_profiles: {exc}") from exc
    try:
        return scenario_from_dict(payload)
    except ValueError as exc:
        raise ConfigError(f"scenario: {exc}") from exc


def parse_config(payload: dict, base_dir: Path | None = None) -> SimulationConfig:
    """Build a SimulationConfig from an (optionally unresolved) dictionary."""
    if not isinstance(payload, dict):
        raise ConfigError("config must be a JSON object")
    payload = resolve_includes(payload, Path(base_dir) if base_dir else Path.cwd())

    def require(key: str):
        if key not in payload:
            raise ConfigError(f"{key}: required field is missing")
        return payload[key]

    try:
        horizon = int(require("horizon_days"))
        replications = int(require("replications"))
        seed = int(require("master_seed"))
        warmup = int(payload.get("warmup_days", 90))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"config scalars: {exc}") from exc

    rules_payload = require("rules")
    if isinstance(rules_payload, str):
        if rules_payload != "default":
            raise ConfigError(f"rules: unknown preset {rules_payload!r}")
        rules = default_rules()
    else:
        rules = rules_from_dict(rules_payload)

    table_payload = require("staff_table")
    if isinstance(table_payload, str):
        if table_payload != "default":
            raise ConfigError(f"staff_table: unknown preset {table_payload!r}")
        staff_table = default_staff_table()
    else:
        staff_table = table_from_dict(table_payload)

    return SimulationConfig(
        horizon_days=horizon,
        replications=replications,
        master_seed=seed,
        warmup_days=warmup,
        arrival=_parse_arrival(require("arrival")),
        los_model=_parse_los_model(require("los_model")),
        scenario=_parse_scenario(require("scenario")),
        rules=rules,
        staff_table=staff_table,
    )


def load_config(path: str | Path) -> SimulationConfig:
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from None
    return parse_config(payload, base_dir=path.parent)


def config_to_dict(config: SimulationConfig) -> dict:
    """Fully resolved, include-free dictionary form."""
    if isinstance(config.scenario, BootstrapProfiles):
        scenario_payload: dict = {
            "name": config.scenario.name,
            "bootstrap_profiles": [
                list(profile.attributes()) for profile in config.scenario.profiles
            ],
        }
    else:
        scenario_payload = scenario_to_dict(config.scenario)
    arrival = config.arrival
    if arrival.family == "negbinom":
        arrival_payload = {"family": "negbinom", "r": arrival.r, "p": arrival.p}
    else:
        arrival_payload = {"family": "poisson", "lam": arrival.lam}
    return {
        "schema_version": 1,
        "horizon_days": config.horizon_days,
        "replications": config.replications,
        "master_seed": config.master_seed,
        "warmup_days": config.warmup_days,
        "arrival": arrival_payload,
        "los_model": {
            "dispositions": [
                {
                    "index": mu.index,
                    "label": mu.label,
                    "eta": config.los_model.params[mu].eta,
                    "sigma": config.los_model.params[mu].sigma,
                }
                for mu in config.los_model.dispositions
            ]
        },
        "scenario": scenario_payload,
        "rules": rules_to_dict(config.rules),
        "staff_table": table_to_dict(config.staff_table),
    }


def canonical_json(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), allow_nan=False)


def config_hash(config: SimulationConfig) -> str:
    """sha256 over the canonical JSON of the resolved configuration."""
    return hashlib.sha256(
        canonical_json(config_to_dict(config)).encode("utf-8")
    ).hexdigest()
