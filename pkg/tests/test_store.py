"""On-disk run layout: digests, tamper detection, and the run index."""

from __future__ import annotations

import json

import numpy as np
import pytest

from careflow.engine import run
from careflow.errors import DataError
from careflow.staffing import (
    StaffingStrategy,
    compare,
    cost_model_from_dict,
)
from careflow.store import RunStore, read_output_dir, write_output_dir
from careflow.config import config_hash, data_path, load_preset_scenario


@pytest.fixture(scope="module")
def tiny_output(small_config):
    import dataclasses

    config = dataclasses.replace(
        small_config, horizon_days=45, warmup_days=10, replications=2
    )
    return run(config)


def _assert_outputs_equal(a, b):
    assert a.config_hash == b.config_hash
    assert len(a.replications) == len(b.replications)
    for ra, rb in zip(a.replications, b.replications):
        np.testing.assert_array_equal(ra.census, rb.census)
        np.testing.assert_array_equal(ra.arrivals, rb.arrivals)
        for ctype in ra.demand:
            np.testing.assert_array_equal(ra.demand[ctype], rb.demand[ctype])
        for label in ra.discharges:
            np.testing.assert_array_equal(ra.discharges[label], rb.discharges[label])
        assert len(ra.residents) == len(rb.residents)
        for ia, ib in zip(ra.residents, rb.residents):
            assert ia.resident_id == ib.resident_id
            assert ia.admit_day == ib.admit_day
            assert ia.group_id == ib.group_id
            assert ia.los_days == ib.los_days
            assert ia.disposition == ib.disposition
            assert ia.censored == ib.censored


def test_output_dir_round_trip(tmp_path, tiny_output):
    target = tmp_path / "run"
    write_output_dir(tiny_output, target)
    assert sorted(p.name for p in target.iterdir()) == [
        "config.json", "daily.csv", "manifest.json", "residents.csv",
    ]
    back = read_output_dir(target)
    _assert_outputs_equal(tiny_output, back)


def test_manifest_records_content_digests(tmp_path, tiny_output):
    target = tmp_path / "run"
    write_output_dir(tiny_output, target)
    manifest = json.loads((target / "manifest.json").read_text())
    assert manifest["config_hash"] == tiny_output.config_hash
    assert set(manifest["files"]) == {"daily.csv", "residents.csv", "config.json"}
    for digest in manifest["files"].values():
        assert len(digest) == 64 and set(digest) <= set("0123456789abcdef")


def test_tampered_daily_csv_is_rejected(tmp_path, tiny_output):
    target = tmp_path / "run"
    write_output_dir(tiny_output, target)
    daily = target / "daily.csv"
    text = daily.read_text()
    daily.write_text(text.replace(text.splitlines()[1], "0,0,999,0,0,0,0,0,0", 1))
    with pytest.raises(DataError, match="digest"):
        read_output_dir(target)


def test_missing_manifest_is_rejected(tmp_path, tiny_output):
    target = tmp_path / "run"
    write_output_dir(tiny_output, target)
    (target / "manifest.json").unlink()
    with pytest.raises(DataError):
        read_output_dir(target)


def test_missing_data_file_is_rejected(tmp_path, tiny_output):
    target = tmp_path / "run"
    write_output_dir(tiny_output, target)
    (target / "residents.csv").unlink()
    with pytest.raises(DataError):
        read_output_dir(target)


def test_config_hash_mismatch_is_rejected(tmp_path, tiny_output):
    # rewrite config.json consistently with its digest but a different content
    target = tmp_path / "run"
    write_output_dir(tiny_output, target)
    config_file = target / "config.json"
    payload = json.loads(config_file.read_text())
    payload["master_seed"] = payload["master_seed"] + 1
    config_file.write_text(json.dumps(payload, indent=2, sort_keys=True))
    manifest_file = target / "manifest.json"
    manifest = json.loads(manifest_file.read_text())
    import hashlib

    manifest["files"]["config.json"] = hashlib.sha256(
        config_file.read_bytes()
    ).hexdigest()
    manifest_file.write_text(json.dumps(manifest, indent=2, sort_keys=True))
    with pytest.raises(DataError, match="config"):
        read_output_dir(target)


def test_store_lifecycle(tmp_path, tiny_output):
    store = RunStore(root=tmp_path / "data")
    record = store.create_run(tiny_output.config)
    assert record.status == "pending"
    assert record.config_hash == tiny_output.config_hash
    assert store.get_record(record.run_id).status == "pending"

    store.update_status(record.run_id, "running")
    store.persist_run(record, tiny_output)
    final = store.get_record(record.run_id)
    assert final.status == "done"
    assert final.error is None

    listed = store.list_runs()
    assert [r.run_id for r in listed] == [record.run_id]

    back = store.load_output(record.run_id)
    _assert_outputs_equal(tiny_output, back)


def test_load_before_done_is_rejected(tmp_path, tiny_output):
    store = RunStore(root=tmp_path / "data")
    record = store.create_run(tiny_output.config)
    with pytest.raises(DataError, match="not done"):
        store.load_output(record.run_id)


def test_unknown_run_id_is_rejected(tmp_path):
    store = RunStore(root=tmp_path / "data")
    assert store.get_record("deadbeef0000") is None
    with pytest.raises(DataError):
        store.load_output("deadbeef0000")
    with pytest.raises(DataError):
        store.update_status("deadbeef0000", "running")


def test_invalid_status_is_rejected(tmp_path, tiny_output):
    store = RunStore(root=tmp_path / "data")
    record = store.create_run(tiny_output.config)
    with pytest.raises(ValueError):
        store.update_status(record.run_id, "galloping")


def test_failed_run_records_error(tmp_path, tiny_output):
    store = RunStore(root=tmp_path / "data")
    record = store.create_run(tiny_output.config)
    store.update_status(record.run_id, "failed", error="boom")
    assert store.get_record(record.run_id).error == "boom"


def test_no_temp_dirs_left_behind(tmp_path, tiny_output):
    store = RunStore(root=tmp_path / "data")
    record = store.create_run(tiny_output.config)
    store.persist_run(record, tiny_output)
    leftovers = [p for p in (tmp_path / "data").rglob(".tmp-*")]
    assert leftovers == []


def test_persist_twice_is_rejected(tmp_path, tiny_output):
    store = RunStore(root=tmp_path / "data")
    record = store.create_run(tiny_output.config)
    store.persist_run(record, tiny_output)
    with pytest.raises(DataError):
        store.persist_run(record, tiny_output)


def test_save_report_writes_json_and_csv(tmp_path, tiny_output):
    store = RunStore(root=tmp_path / "data")
    record = store.create_run(tiny_output.config)
    store.persist_run(record, tiny_output)
    cost = cost_model_from_dict(
        json.loads(data_path("cost_default.json").read_text())
    )
    report = compare(
        tiny_output,
        [StaffingStrategy(caregiver_type="CNA", residents_per_staff=12)],
        cost,
    )
    store.save_report(record.run_id, report)
    run_dir = store.run_dir(record.run_id)
    assert (run_dir / "report.json").exists()
    assert (run_dir / "report.csv").exists()
    payload = json.loads((run_dir / "report.json").read_text())
    assert payload["config_hash"] == tiny_output.config_hash
    assert payload["rows"][0]["label"] == "1/12 CNA"


def test_scenario_save_and_list(tmp_path):
    import dataclasses

    from careflow.errors import ConfigError

    store = RunStore(root=tmp_path / "data")
    scenario = dataclasses.replace(
        load_preset_scenario("baseline"), name="winter-surge"
    )
    store.save_scenario(scenario)
    saved = store.list_scenarios()
    assert [s.name for s in saved] == ["winter-surge"]
    for attr, probs in scenario.distributions.items():
        np.testing.assert_allclose(saved[0].distributions[attr], probs)
    for bad in ("../escape", ".hidden", "a/b"):
        with pytest.raises(ConfigError):
            store.save_scenario(dataclasses.replace(scenario, name=bad))


def test_env_var_selects_root(tmp_path, monkeypatch):
    monkeypatch.setenv("CAREFLOW_DATA_DIR", str(tmp_path / "via-env"))
    store = RunStore()
    assert store.root == tmp_path / "via-env"


def test_index_survives_reopen(tmp_path, tiny_output):
    root = tmp_path / "data"
    store = RunStore(root=root)
    record = store.create_run(tiny_output.config)
    store.persist_run(record, tiny_output)

    reopened = RunStore(root=root)
    assert reopened.get_record(record.run_id).status == "done"
    assert config_hash(reopened.load_output(record.run_id).config) == \
        tiny_output.config_hash
