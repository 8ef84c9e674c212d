"""Config parsing, include resolution, presets and hash stability."""

from __future__ import annotations

import dataclasses
import json

import pytest

from careflow.config import (
    config_hash,
    config_to_dict,
    data_path,
    load_config,
    load_preset_scenario,
    parse_config,
    resolve_includes,
)
from careflow.errors import ConfigError


def _example_payload() -> dict:
    return json.loads(data_path("config_example.json").read_text(encoding="utf-8"))


def test_example_config_loads_and_hashes_stably(example_config):
    again = load_config(data_path("config_example.json"))
    assert config_hash(example_config) == config_hash(again)
    assert example_config.horizon_days == 365
    assert example_config.arrival.family == "negbinom"
    assert len(example_config.los_model.dispositions) == 2


def test_hash_ignores_json_key_order():
    payload = _example_payload()
    reordered = dict(reversed(list(payload.items())))
    a = parse_config(payload, base_dir=data_path("."))
    b = parse_config(reordered, base_dir=data_path("."))
    assert config_hash(a) == config_hash(b)


def test_round_trip_through_resolved_dict(example_config):
    resolved = config_to_dict(example_config)
    back = parse_config(resolved)
    assert config_hash(back) == config_hash(example_config)


def test_includes_resolve_recursively(tmp_path):
    (tmp_path / "inner.json").write_text(json.dumps({"x": 1}), encoding="utf-8")
    (tmp_path / "outer.json").write_text(
        json.dumps({"nested": {"$include": "inner.json"}, "y": [2, {"$include": "inner.json"}]}),
        encoding="utf-8",
    )
    resolved = resolve_includes({"$include": "outer.json"}, tmp_path)
    assert resolved == {"nested": {"x": 1}, "y": [2, {"x": 1}]}


def test_include_cycle_is_reported(tmp_path):
    (tmp_path / "a.json").write_text(json.dumps({"$include": "b.json"}), encoding="utf-8")
    (tmp_path / "b.json").write_text(json.dumps({"$include": "a.json"}), encoding="utf-8")
    with pytest.raises(ConfigError) as err:
        resolve_includes({"$include": "a.json"}, tmp_path)
    assert "depth" in str(err.value)


def test_include_missing_target_is_reported(tmp_path):
    with pytest.raises(ConfigError) as err:
        resolve_includes({"$include": "nothing.json"}, tmp_path)
    assert "nothing.json" in str(err.value)


def test_missing_required_field_names_the_field():
    payload = _example_payload()
    del payload["replications"]
    with pytest.raises(ConfigError) as err:
        parse_config(payload, base_dir=data_path("."))
    assert "replications" in str(err.value)


def test_scalar_validation():
    payload = _example_payload()
    payload["warmup_days"] = 400  # beyond the horizon
    with pytest.raises(ConfigError):
        parse_config(payload, base_dir=data_path("."))
    payload = _example_payload()
    payload["horizon_days"] = 0
    with pytest.raises(ConfigError):
        parse_config(payload, base_dir=data_path("."))


def test_scenario_presets_accepted_by_name():
    payload = _example_payload()
    payload["scenario"] = "S2"
    config = parse_config(payload, base_dir=data_path("."))
    assert config.scenario.name == "S2"
    payload["scenario"] = "no-such-preset"
    with pytest.raises(ConfigError):
        parse_config(payload, base_dir=data_path("."))


def test_preset_scenarios_differ_from_baseline():
    base = load_preset_scenario("baseline")
    for name in ("S1", "S2", "S3"):
        other = load_preset_scenario(name)
        assert other.name == name
        assert any(
            not (other.distributions[k] == base.distributions[k]).all()
            for k in other.distributions
        )


def test_unknown_rules_preset_rejected():
    payload = _example_payload()
    payload["rules"] = "not-a-preset"
    with pytest.raises(ConfigError):
        parse_config(payload, base_dir=data_path("."))


def test_bootstrap_scenario_parses():
    payload = _example_payload()
    payload["scenario"] = {
        "name": "pool",
        "bootstrap_profiles": [
            [4, 0, 1, 3, 0, 0, 0, 0, 0],
            [14, 1, 0, 0, 2, 1, 1, 1, 1],
        ],
    }
    config = parse_config(payload, base_dir=data_path("."))
    assert config.scenario.name == "pool"
    assert len(config.scenario.profiles) == 2


def test_staff_table_must_cover_rule_groups(example_config):
    from careflow.service_need import StaffTimeTable

    entries = dict(example_config.staff_table.entries)
    del entries[("RN", 12)]
    with pytest.raises(ConfigError):
        dataclasses.replace(example_config, staff_table=StaffTimeTable(entries=entries))


def test_config_hash_changes_with_content(example_config):
    changed = dataclasses.replace(example_config, master_seed=1)
    assert config_hash(changed) != config_hash(example_config)
