"""Staffing strategies and the labor-cost ledger.

A strategy "1 staff per k residents" schedules ceil(census / k) staff of one
caregiver type each day; scheduled supply is that count times the paid
minutes per staff day. Days where demand exceeds supply are covered by
temporary staff paid per understaffed minute; surplus minutes are paid but
idle. For every day the ledger satisfies U * V = 0 and D - S = U - V, where
U is understaffing, V overstaffing, D demand and S supply.

    planned cost       = sum_d staff_d * staff_day_minutes * regular_wage
    understaffing cost = sum_d U_d * temp_wage
    total cost         = planned + understaffing

Evaluation is per replication over post-warmup days; the report carries the
across-replication mean and a t-based confidence interval. suggest_ratio
scans an integer ratio range on the same simulation output (common random
numbers), so candidate strategies differ only in the supply rule; ties are
broken toward the larger ratio (fewer staff).

Ratios apply to the realized daily census by default; fixed_census applies
them to a constant planning census instead.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.stats import t as t_dist

from .engine import SimulationOutput
from .errors import ConfigError, DataError
from .service_need import CAREGIVER_TYPES

__all__ = [
    "StaffingStrategy",
    "CostParams",
    "CostModel",
    "StrategyEvaluation",
    "EvaluationReport",
    "daily_supply",
    "evaluate",
    "suggest_ratio",
    "compare",
    "cost_model_from_dict",
    "cost_model_to_dict",
    "report_to_csv",
]


@dataclass(frozen=True)
class StaffingStrategy:
    """One caregiver of caregiver_type per residents_per_staff residents."""

    caregiver_type: str
    residents_per_staff: int
    label: str = ""

    def __post_init__(self) -> None:
        if self.caregiver_type not in CAREGIVER_TYPES:
            raise ConfigError(f"unknown caregiver type {self.caregiver_type!r}")
        if self.residents_per_staff < 1:
            raise ConfigError("residents_per_staff must be at least 1")
        if not self.label:
            object.__setattr__(
                self, "label", f"1/{self.residents_per_staff} {self.caregiver_type}"
            )


@dataclass(frozen=True)
class CostParams:
    """Wages per minute and paid minutes per staff day for one caregiver type."""

    regular_wage_per_min: float
    temp_wage_per_min: float
    staff_day_minutes: float = 480.0

    def __post_init__(self) -> None:
        for value in (self.regular_wage_per_min, self.temp_wage_per_min,
                      self.staff_day_minutes):
            if not (value > 0 and math.isfinite(value)):
                raise ConfigError("cost parameters must be positive and finite")


@dataclass
class CostModel:
    """Per-caregiver-type cost parameters."""

    types: dict[str, CostParams]

    def params(self, caregiver_type: str) -> CostParams:
        try:
            return self.types[caregiver_type]
        except KeyError:
            raise ConfigError(
                f"cost model has no parameters for {caregiver_type!r}"
            ) from None


def cost_model_from_dict(payload: dict) -> CostModel:
    if payload.get("schema_version") != 1:
        raise ConfigError("cost model: unsupported or missing schema_version")
    try:
        return CostModel(
            types={
                ctype: CostParams(
                    regular_wage_per_min=float(entry["regular_wage_per_min"]),
                    temp_wage_per_min=float(entry["temp_wage_per_min"]),
                    staff_day_minutes=float(entry.get("staff_day_minutes", 480.0)),
                )
                for ctype, entry in payload["types"].items()
            }
        )
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"cost model: {exc}") from exc


def cost_model_to_dict(model: CostModel) -> dict:
    return {
        "schema_version": 1,
        "types": {
            ctype: {
                "regular_wage_per_min": params.regular_wage_per_min,
                "temp_wage_per_min": params.temp_wage_per_min,
                "staff_day_minutes": params.staff_day_minutes,
            }
            for ctype, params in sorted(model.types.items())
        },
    }


def daily_supply(
    census: int, strategy: StaffingStrategy, cost: CostModel
) -> tuple[int, float]:
    """(scheduled staff count, supplied minutes) for one day's census."""
    if census < 0:
        raise ValueError("census must be non-negative")
    staff = math.ceil(census / strategy.residents_per_staff)
    return staff, staff * cost.params(strategy.caregiver_type).staff_day_minutes


@dataclass
class StrategyEvaluation:
    """Cost summary of one strategy over one simulation output."""

    strategy: StaffingStrategy
    total_cost_mean: float
    total_cost_ci_lower: float
    total_cost_ci_upper: float
    planned_cost_mean: float
    understaffing_cost_mean: float
    avg_daily_overstaffing_min: float
    avg_daily_understaffing_min: float
    replication_total_costs: np.ndarray = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "label": self.strategy.label,
            "caregiver_type": self.strategy.caregiver_type,
            "residents_per_staff": self.strategy.residents_per_staff,
            "total_cost_mean": self.total_cost_mean,
            "total_cost_ci_lower": self.total_cost_ci_lower,
            "total_cost_ci_upper": self.total_cost_ci_upper,
            "planned_cost_mean": self.planned_cost_mean,
            "understaffing_cost_mean": self.understaffing_cost_mean,
            "avg_daily_overstaffing_min": self.avg_daily_overstaffing_min,
            "avg_daily_understaffing_min": self.avg_daily_understaffing_min,
        }


@dataclass
class EvaluationReport:
    """Rows for several strategies evaluated on the same output."""

    rows: list[StrategyEvaluation]
    config_hash: str

    def to_dict(self) -> dict:
        return {
            "config_hash": self.config_hash,
            "rows": [row.to_dict() for row in self.rows],
        }


def _ledger(
    demand: np.ndarray, supply: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    under = np.maximum(demand - supply, 0.0)
    over = np.maximum(supply - demand, 0.0)
    return under, over


def evaluate(
    output: SimulationOutput,
    strategy: StaffingStrategy,
    cost: CostModel,
    fixed_census: int | None = None,
    alpha: float = 0.05,
) -> StrategyEvaluation:
    """Cost ledger for one strategy over post-warmup days of every replication."""
    if not output.replications:
        raise DataError("simulation output has no replications")
    first = output.replications[0]
    if strategy.caregiver_type not in first.demand:
        raise DataError(
            f"simulation output has no demand series for {strategy.caregiver_type!r}"
        )
    params = cost.params(strategy.caregiver_type)
    warmup = output.config.warmup_days

    totals, planned_list, under_cost_list = [], [], []
    over_minutes, under_minutes = [], []
    for rep in output.replications:
        demand = rep.demand[strategy.caregiver_type][warmup:]
        if fixed_census is None:
            staff = np.ceil(rep.census[warmup:] / strategy.residents_per_staff)
        else:
            if fixed_census < 0:
                raise ConfigError("fixed_census must be non-negative")
            staff = np.full(
                demand.shape,
                math.ceil(fixed_census / strategy.residents_per_staff),
                dtype=float,
            )
        supply = staff * params.staff_day_minutes
        under, over = _ledger(demand, supply)
        planned = float(supply.sum()) * params.regular_wage_per_min
        under_cost = float(under.sum()) * params.temp_wage_per_min
        totals.append(planned + under_cost)
        planned_list.append(planned)
        under_cost_list.append(under_cost)
        over_minutes.append(over)
        under_minutes.append(under)

    totals_arr = np.asarray(totals)
    reps = len(totals_arr)
    mean = float(totals_arr.mean())
    if reps > 1:
        half = float(t_dist.ppf(1.0 - alpha / 2.0, reps - 1)) * float(
            totals_arr.std(ddof=1)
        ) / math.sqrt(reps)
    else:
        half = 0.0
    return StrategyEvaluation(
        strategy=strategy,
        total_cost_mean=mean,
        total_cost_ci_lower=mean - half,
        total_cost_ci_upper=mean + half,
        planned_cost_mean=float(np.mean(planned_list)),
        understaffing_cost_mean=float(np.mean(under_cost_list)),
        avg_daily_overstaffing_min=float(np.concatenate(over_minutes).mean()),
        avg_daily_understaffing_min=float(np.concatenate(under_minutes).mean()),
        replication_total_costs=totals_arr,
    )


def suggest_ratio(
    output: SimulationOutput,
    caregiver_type: str,
    cost: CostModel,
    k_min: int = 1,
    k_max: int = 60,
    fixed_census: int | None = None,
) -> tuple[StrategyEvaluation, list[StrategyEvaluation]]:
    """Scan ratios k_min..k_max on the same output; minimize mean total cost.

    Returns (best evaluation, all evaluations in ratio order). Exact cost
    ties resolve to the larger ratio, i.e. the leaner schedule.
    """
    if not 1 <= k_min <= k_max:
        raise ConfigError("need 1 <= k_min <= k_max")
    evaluations = [
        evaluate(
            output,
            StaffingStrategy(caregiver_type=caregiver_type, residents_per_staff=k),
            cost,
            fixed_census=fixed_census,
        )
        for k in range(k_min, k_max + 1)
    ]
    best = evaluations[0]
    for candidate in evaluations[1:]:
        if candidate.total_cost_mean <= best.total_cost_mean:
            best = candidate
    return best, evaluations


def compare(
    output: SimulationOutput,
    strategies: list[StaffingStrategy],
    cost: CostModel,
    fixed_census: int | None = None,
) -> EvaluationReport:
    """Evaluate several strategies on the same output (paired comparison)."""
    if not strategies:
        raise ConfigError("at least one strategy is required")
    rows = [
        evaluate(output, strategy, cost, fixed_census=fixed_census)
        for strategy in strategies
    ]
    return EvaluationReport(rows=rows, config_hash=output.config_hash)


_REPORT_COLUMNS = (
    "label", "caregiver_type", "residents_per_staff",
    "total_cost_mean", "total_cost_ci_lower", "total_cost_ci_upper",
    "planned_cost_mean", "understaffing_cost_mean",
    "avg_daily_overstaffing_min", "avg_daily_understaffing_min",
)


def report_to_csv(report: EvaluationReport, path: str | Path) -> None:
    """Write the evaluation rows plus the config hash as a trailing comment."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as handle:
        handle.write(f"# config_hash={report.config_hash}\r\n")
        writer = csv.writer(handle)
        writer.writerow(_REPORT_COLUMNS)
        for row in report.rows:
            payload = row.to_dict()
            writer.writerow(
                [
                    payload["label"], payload["caregiver_type"],
                    payload["residents_per_staff"],
                ]
                + [repr(float(payload[c])) for c in _REPORT_COLUMNS[3:]]
            )
