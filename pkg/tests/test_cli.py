"""Command-line interface: exit codes, output files, and agreement with the
library calls each subcommand wraps."""

from __future__ import annotations

import json

import numpy as np
import pytest

from careflow.census import load_residents
from careflow.cli import main
from careflow.config import config_hash, data_path, load_config
from careflow.store import read_output_dir
from careflow.survival import fit as fit_los


@pytest.fixture(scope="module")
def small_config_file(tmp_path_factory):
    payload = json.loads(data_path("config_example.json").read_text())
    payload.update(
        {"horizon_days": 45, "warmup_days": 10, "replications": 2, "master_seed": 99}
    )
    # the example references its sibling scenario file; a copied config in a
    # tmp dir must name the preset instead
    payload["scenario"] = "baseline"
    path = tmp_path_factory.mktemp("cfg") / "config.json"
    path.write_text(json.dumps(payload))
    return path


@pytest.fixture(scope="module")
def run_dir(small_config_file, tmp_path_factory):
    out = tmp_path_factory.mktemp("runs") / "baseline"
    code = main(["simulate", str(small_config_file), "--out", str(out)])
    assert code == 0
    return out


def test_fit_los_prints_params_and_writes_json(tmp_path, capsys):
    json_out = tmp_path / "fit.json"
    code = main(
        [
            "fit-los",
            str(data_path("residents_synthetic.csv")),
            "--json",
            str(json_out),
        ]
    )
    assert code == 0
    printed = capsys.readouterr().out
    table = load_residents(data_path("residents_synthetic.csv"))
    direct = fit_los(table.dataset())
    payload = json.loads(json_out.read_text())
    by_label = {d["label"]: d for d in payload["dispositions"]}
    for disposition in direct.dispositions:
        assert by_label[disposition.label]["eta"] == pytest.approx(
            direct.params[disposition].eta
        )
        assert disposition.label in printed
    assert payload["converged"] is True


def test_fit_los_missing_file_is_data_error(tmp_path, capsys):
    code = main(["fit-los", str(tmp_path / "nope.csv")])
    assert code == 3
    assert "data error" in capsys.readouterr().err


def test_fit_los_malformed_rows_exit_3(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("resident_id,admit_day\n1,2\n")
    assert main(["fit-los", str(bad)]) == 3


def test_fit_arrivals_on_counts_file(tmp_path, capsys):
    counts_file = tmp_path / "counts.txt"
    rng = np.random.default_rng(3)
    lines = ["# daily admissions"] + [
        str(int(v)) for v in rng.negative_binomial(5, 0.6, size=150)
    ]
    counts_file.write_text("\n".join(lines) + "\n")
    json_out = tmp_path / "arrivals.json"
    code = main(["fit-arrivals", str(counts_file), "--json", str(json_out)])
    assert code == 0
    out = capsys.readouterr().out
    assert "negative binomial" in out
    payload = json.loads(json_out.read_text())
    assert payload["family"] == "negbinom"
    assert payload["r"] > 0 and 0 < payload["p"] < 1


def test_simulate_writes_run_dir(run_dir, small_config_file):
    output = read_output_dir(run_dir)
    config = load_config(small_config_file)
    assert output.config_hash == config_hash(config)
    assert len(output.replications) == 2
    assert (run_dir / "manifest.json").exists()


def test_simulate_bad_config_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"horizon_days": 10}))
    assert main(["simulate", str(bad)]) == 2
    assert "config error" in capsys.readouterr().err


def test_simulate_into_store(small_config_file, tmp_path, capsys):
    code = main(
        ["simulate", str(small_config_file), "--data-dir", str(tmp_path / "store")]
    )
    assert code == 0
    out = capsys.readouterr().out
    index = json.loads((tmp_path / "store" / "index.json").read_text())
    assert len(index["runs"]) == 1
    assert index["runs"][0]["status"] == "done"
    assert index["runs"][0]["run_id"] in out


def test_evaluate_prints_table_and_writes_report(run_dir, capsys):
    code = main(
        ["evaluate", str(run_dir), "--strategies", "CNA:12,LPN:25,RN:40"]
    )
    assert code == 0
    out = capsys.readouterr().out
    for label in ("1/12 CNA", "1/25 LPN", "1/40 RN"):
        assert label in out
    report = json.loads((run_dir / "report.json").read_text())
    assert [row["label"] for row in report["rows"]] == [
        "1/12 CNA", "1/25 LPN", "1/40 RN",
    ]
    assert (run_dir / "report.csv").exists()


def test_evaluate_rejects_bad_strategy_string(run_dir, capsys):
    assert main(["evaluate", str(run_dir), "--strategies", "CNA=12"]) == 2


def test_sweep_suggests_cheapest(run_dir, tmp_path, capsys):
    json_out = tmp_path / "sweep.json"
    code = main(
        [
            "sweep", str(run_dir),
            "--type", "CNA", "--k-min", "8", "--k-max", "16",
            "--json", str(json_out),
        ]
    )
    assert code == 0
    payload = json.loads(json_out.read_text())
    totals = {
        row["residents_per_staff"]: row["total_cost_mean"]
        for row in payload["evaluations"]
    }
    assert payload["suggested"]["total_cost_mean"] == pytest.approx(
        min(totals.values())
    )
    assert str(payload["suggested"]["residents_per_staff"]) in capsys.readouterr().out


def test_whatif_compares_scenarios(small_config_file, capsys):
    code = main(
        [
            "whatif", str(small_config_file),
            "--scenarios", "baseline,S3",
            "--strategies", "CNA:20",
        ]
    )
    assert code == 0
    out = capsys.readouterr().out
    assert "baseline" in out and "S3" in out


def test_whatif_unknown_scenario_exits_2(small_config_file, capsys):
    assert (
        main(["whatif", str(small_config_file), "--scenarios", "baseline,S9"]) == 2
    )


def test_validate_reports_ks_and_overlay(small_config_file, tmp_path, capsys):
    json_out = tmp_path / "validate.json"
    code = main(
        [
            "validate",
            str(data_path("residents_synthetic.csv")),
            str(small_config_file),
            "--samples", "4000",
            "--json", str(json_out),
        ]
    )
    assert code == 0
    payload = json.loads(json_out.read_text())
    assert 0.0 <= payload["ks"]["p_value"] <= 1.0
    assert 0.0 <= payload["km_overlay"]["max_gap"] <= 1.0
    out = capsys.readouterr().out
    assert "KS" in out or "ks" in out


def test_version_flag():
    with pytest.raises(SystemExit) as excinfo:
        main(["--version"])
    assert excinfo.value.code == 0
