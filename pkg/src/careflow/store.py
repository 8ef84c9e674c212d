"""Directory-per-run persistence with a JSON index.

Layout under the store root (CAREFLOW_DATA_DIR or ./careflow-data):

    index.json                    run records (id, status, hash, timestamps)
    runs/<run_id>/config.json     fully resolved configuration
    runs/<run_id>/daily.csv       per-replication per-day series
    runs/<run_id>/residents.csv   trajectory log
    runs/<run_id>/manifest.json   sha256 of config and every output file
    runs/<run_id>/report.json     evaluation rows (written by evaluate/sweep)
    scenarios/<name>.json         saved what-if scenarios

Runs are persisted by writing into a temporary sibling directory and
os.replace-ing it into place, so a run directory either exists completely or
not at all. The manifest carries sha256 digests; loading verifies them and
refuses tampered artifacts. Index updates are serialized with an in-process
lock and written atomically; the store assumes a single writing process.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
import platform
import threading
import uuid
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .config import (
    SimulationConfig,
    config_hash,
    config_to_dict,
    parse_config,
)
from .census import CensusScenario, scenario_from_dict, scenario_to_dict
from .engine import ReplicationResult, ResidentRecord, SimulationOutput
from .errors import ConfigError, DataError
from .service_need import CAREGIVER_TYPES
from .staffing import EvaluationReport, report_to_csv

__all__ = ["RunRecord", "RunStore", "write_output_dir", "read_output_dir"]

ENV_DATA_DIR = "CAREFLOW_DATA_DIR"
_STATUSES = ("pending", "running", "done", "failed")


@dataclass
class RunRecord:
    run_id: str
    status: str
    config_hash: str
    created_at: str
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "status": self.status,
            "config_hash": self.config_hash,
            "created_at": self.created_at,
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "RunRecord":
        return cls(
            run_id=payload["run_id"],
            status=payload["status"],
            config_hash=payload["config_hash"],
            created_at=payload["created_at"],
            error=payload.get("error"),
        )


def _sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with path.open("rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _daily_header(output: SimulationOutput) -> list[str]:
    labels = [mu.label for mu in output.config.los_model.dispositions]
    return (
        ["replication", "day", "census", "arrivals"]
        + [f"demand_{ctype}" for ctype in CAREGIVER_TYPES]
        + [f"discharges_{label}" for label in labels]
    )


def write_output_dir(output: SimulationOutput, directory: str | Path) -> None:
    """Serialize a simulation output into daily.csv / residents.csv /
    config.json / manifest.json inside an existing directory."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    labels = [mu.label for mu in output.config.los_model.dispositions]

    daily_path = directory / "daily.csv"
    with daily_path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(_daily_header(output))
        for rep in output.replications:
            for day in range(len(rep.census)):
                writer.writerow(
                    [rep.replication, day, int(rep.census[day]), int(rep.arrivals[day])]
                    + [repr(float(rep.demand[c][day])) for c in CAREGIVER_TYPES]
                    + [int(rep.discharges[label][day]) for label in labels]
                )

    residents_path = directory / "residents.csv"
    with residents_path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(
            ["replication", "resident_id", "admit_day", "group_id",
             "los_days", "disposition", "censored"]
        )
        for rep in output.replications:
            for res in rep.residents:
                writer.writerow(
                    [res.replication, res.resident_id, res.admit_day, res.group_id,
                     repr(float(res.los_days)), res.disposition,
                     1 if res.censored else 0]
                )

    config_path = directory / "config.json"
    config_path.write_text(
        json.dumps(config_to_dict(output.config), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )

    manifest = {
        "config_hash": output.config_hash,
        "created_at": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "files": {
            "daily.csv": _sha256_file(daily_path),
            "residents.csv": _sha256_file(residents_path),
            "config.json": _sha256_file(config_path),
        },
        "versions": {
            "careflow": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
    }
    (directory / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def read_output_dir(directory: str | Path) -> SimulationOutput:
    """Load and verify a persisted run directory.

    Raises DataError when a file digest disagrees with the manifest or the
    stored config does not reproduce the recorded config hash.
    """
    directory = Path(directory)
    manifest_path = directory / "manifest.json"
    if not manifest_path.exists():
        raise DataError(f"{directory}: manifest.json is missing")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))

    for name, expected in manifest.get("files", {}).items():
        path = directory / name
        if not path.exists():
            raise DataError(f"{directory}: missing artifact {name}")
        actual = _sha256_file(path)
        if actual != expected:
            raise DataError(
                f"{directory}: {name} digest mismatch "
                f"(expected {expected[:12]}.., found {actual[:12]}..)"
            )

    config_payload = json.loads((directory / "config.json").read_text(encoding="utf-8"))
    config = parse_config(config_payload, base_dir=directory)
    stored_hash = manifest["config_hash"]
    if config_hash(config) != stored_hash:
        raise DataError(f"{directory}: config.json does not match the recorded hash")

    labels = [mu.label for mu in config.los_model.dispositions]
    horizon = config.horizon_days

    by_rep: dict[int, dict] = {}
    with (directory / "daily.csv").open("r", encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        for row in reader:
            r = int(row["replication"])
            slot = by_rep.setdefault(
                r,
                {
                    "census": np.zeros(horizon, dtype=int),
                    "arrivals": np.zeros(horizon, dtype=int),
                    "demand": {c: np.zeros(horizon) for c in CAREGIVER_TYPES},
                    "discharges": {lab: np.zeros(horizon, dtype=int) for lab in labels},
                },
            )
            day = int(row["day"])
            slot["census"][day] = int(row["census"])
            slot["arrivals"][day] = int(row["arrivals"])
            for ctype in CAREGIVER_TYPES:
                slot["demand"][ctype][day] = float(row[f"demand_{ctype}"])
            for label in labels:
                slot["discharges"][label][day] = int(row[f"discharges_{label}"])

    residents_by_rep: dict[int, list[ResidentRecord]] = {r: [] for r in by_rep}
    with (directory / "residents.csv").open("r", encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        for row in reader:
            record = ResidentRecord(
                replication=int(row["replication"]),
                resident_id=int(row["resident_id"]),
                admit_day=int(row["admit_day"]),
                group_id=int(row["group_id"]),
                los_days=float(row["los_days"]),
                disposition=row["disposition"],
                censored=row["censored"] == "1",
            )
            residents_by_rep.setdefault(record.replication, []).append(record)

    replications = [
        ReplicationResult(
            replication=r,
            census=slot["census"],
            arrivals=slot["arrivals"],
            demand=slot["demand"],
            discharges=slot["discharges"],
            residents=residents_by_rep.get(r, []),
        )
        for r, slot in sorted(by_rep.items())
    ]
    return SimulationOutput(
        config=config, config_hash=stored_hash, replications=replications
    )


class RunStore:
    """Run records, run artifacts and saved scenarios under one root."""

    def __init__(self, root: str | Path | None = None):
        if root is None:
            root = os.environ.get(ENV_DATA_DIR, "careflow-data")
        self.root = Path(root)
        self.runs_dir = self.root / "runs"
        self.scenarios_dir = self.root / "scenarios"
        self.index_path = self.root / "index.json"
        self._lock = threading.Lock()
        self.runs_dir.mkdir(parents=True, exist_ok=True)
        self.scenarios_dir.mkdir(parents=True, exist_ok=True)

    # -- index ------------------------------------------------------------

    def _read_index(self) -> dict[str, RunRecord]:
        if not self.index_path.exists():
            return {}
        payload = json.loads(self.index_path.read_text(encoding="utf-8"))
        return {
            entry["run_id"]: RunRecord.from_dict(entry)
            for entry in payload.get("runs", [])
        }

    def _write_index(self, records: dict[str, RunRecord]) -> None:
        payload = {
            "runs": [
                record.to_dict()
                for record in sorted(records.values(), key=lambda r: r.created_at)
            ]
        }
        tmp = self.index_path.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
        os.replace(tmp, self.index_path)

    def list_runs(self) -> list[RunRecord]:
        with self._lock:
            return list(self._read_index().values())

    def get_record(self, run_id: str) -> RunRecord | None:
        with self._lock:
            return self._read_index().get(run_id)

    def create_run(self, config: SimulationConfig) -> RunRecord:
        record = RunRecord(
            run_id=uuid.uuid4().hex[:12],
            status="pending",
            config_hash=config_hash(config),
            created_at=datetime.now(timezone.utc).isoformat(timespec="seconds"),
        )
        with self._lock:
            records = self._read_index()
            records[record.run_id] = record
            self._write_index(records)
        return record

    def update_status(self, run_id: str, status: str, error: str | None = None) -> None:
        if status not in _STATUSES:
            raise ValueError(f"unknown status {status!r}")
        with self._lock:
            records = self._read_index()
            if run_id not in records:
                raise DataError(f"unknown run {run_id!r}")
            records[run_id].status = status
            records[run_id].error = error
            self._write_index(records)

    # -- run artifacts ----------------------------------------------------

    def run_dir(self, run_id: str) -> Path:
        return self.runs_dir / run_id

    def persist_run(self, record: RunRecord, output: SimulationOutput) -> Path:
        """Write all artifacts atomically and mark the run done."""
        final = self.run_dir(record.run_id)
        if final.exists():
            raise DataError(f"run directory already exists: {final}")
        tmp = self.runs_dir / f".tmp-{record.run_id}-{os.getpid()}"
        write_output_dir(output, tmp)
        os.replace(tmp, final)
        self.update_status(record.run_id, "done")
        return final

    def load_output(self, run_id: str) -> SimulationOutput:
        record = self.get_record(run_id)
        if record is None:
            raise DataError(f"unknown run {run_id!r}")
        if record.status != "done":
            raise DataError(f"run {run_id} is not done (status: {record.status})")
        return read_output_dir(self.run_dir(run_id))

    def save_report(self, run_id: str, report: EvaluationReport) -> tuple[Path, Path]:
        directory = self.run_dir(run_id)
        if not directory.exists():
            raise DataError(f"unknown run directory for {run_id!r}")
        json_path = directory / "report.json"
        json_path.write_text(
            json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
        csv_path = directory / "report.csv"
        report_to_csv(report, csv_path)
        return json_path, csv_path

    # -- scenarios ---------------------------------------------------------

    def save_scenario(self, scenario: CensusScenario) -> Path:
        safe = scenario.name
        if not safe or any(ch in safe for ch in "/\\") or safe.startswith("."):
            raise ConfigError(f"scenario name {safe!r} is not a valid file stem")
        path = self.scenarios_dir / f"{safe}.json"
        tmp = path.with_suffix(".json.tmp")
        tmp.write_text(
            json.dumps(scenario_to_dict(scenario), indent=2) + "\n", encoding="utf-8"
        )
        os.replace(tmp, path)
        return path

    def list_scenarios(self) -> list[CensusScenario]:
        scenarios = []
        for path in sorted(self.scenarios_dir.glob("*.json")):
            payload = json.loads(path.read_text(encoding="utf-8"))
            scenarios.append(scenario_from_dict(payload))
        return scenarios
