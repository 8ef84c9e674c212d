"""Day-granularity facility simulation.

Each replication is an independent work unit driven entirely by streams
derived from (master_seed, replication, entity): entity 0 is the arrival
process, entities 1, 2, ... are residents in admission order. A resident's
stream supplies, in order, the nine profile draws, the stay-length inversion
uniform, the disposition uniform, and then two exponential phases per
caregiver type per in-facility day. Because every resident owns a stream,
results are byte-identical whether replications run serially or in a thread
pool, and what-if scenarios reuse the same arrival, stay-length and staff-time
randomness (common random numbers) as long as the attribute count per profile
is unchanged.

Occupancy convention: an arrival on day d with stay length L occupies
ceil(L) days starting at d, consuming staff time on each occupied day, and is
discharged on day d + ceil(L), which contributes no staff time. Day counts
satisfy the ledger identity census_d = census_{d-1} + arrivals_d -
discharges_d exactly. Residents still present at the horizon are
right-censored in the trajectory log. There is no bed-capacity constraint:
census is unbounded by design, which keeps the model linear in arrivals.

Replication planning follows the sequential relative-precision rule: grow i
from the pilot size until t_{i-1,1-alpha/2} * sqrt(s2/i) / |mean| drops to
gamma / (1 + gamma), using the pilot mean and variance throughout.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np
from scipy.stats import t as t_dist

from .census import BootstrapProfiles, CensusScenario, sample_arrivals
from .config import SimulationConfig, config_hash
from .errors import DataError
from .rng import spawn_stream
from .sampling import sample_by_total_hazard
from .service_need import CAREGIVER_TYPES, classify

__all__ = [
    "ARRIVAL_ENTITY",
    "ResidentRecord",
    "DailyRecord",
    "ReplicationResult",
    "SimulationOutput",
    "run_replication",
    "simulate_with_arrivals",
    "run",
    "required_replications",
    "SeriesSummary",
    "SummaryFrame",
    "summarize",
]

# Entity id of the arrival-count stream inside each replication.
ARRIVAL_ENTITY = 0


@dataclass(frozen=True)
class ResidentRecord:
    """Trajectory log entry for one simulated resident."""

    replication: int
    resident_id: int
    admit_day: int
    group_id: int
    los_days: float
    disposition: str
    censored: bool


@dataclass(frozen=True)
class DailyRecord:
    """One simulated facility day."""

    day: int
    census: int
    arrivals: int
    demand_minutes: dict[str, float]
    discharges: dict[str, int]


@dataclass
class ReplicationResult:
    """Arrays over the horizon for one replication, plus the trajectory log."""

    replication: int
    census: np.ndarray
    arrivals: np.ndarray
    demand: dict[str, np.ndarray]
    discharges: dict[str, np.ndarray]
    residents: list[ResidentRecord]

    def daily_records(self) -> Iterator[DailyRecord]:
        for day in range(len(self.census)):
            yield DailyRecord(
                day=day,
                census=int(self.census[day]),
                arrivals=int(self.arrivals[day]),
                demand_minutes={k: float(v[day]) for k, v in self.demand.items()},
                discharges={k: int(v[day]) for k, v in self.discharges.items()},
            )


@dataclass
class SimulationOutput:
    config: SimulationConfig
    config_hash: str
    replications: list[ReplicationResult] = field(default_factory=list)


def simulate_with_arrivals(
    config: SimulationConfig,
    replication: int,
    arrivals: np.ndarray,
    demand_trace: list | None = None,
) -> ReplicationResult:
    """Run one replication against a fixed arrival schedule.

    demand_trace, when given, collects (resident_id, admit_day, minutes array
    of shape (occupied days, caregiver types)) for exact re-aggregation checks.
    """
    horizon = config.horizon_days
    arrivals = np.asarray(arrivals, dtype=int)
    if arrivals.shape != (horizon,) or np.any(arrivals < 0):
        raise ValueError("arrivals must be a non-negative array of length horizon_days")

    census = np.zeros(horizon, dtype=int)
    demand = {ctype: np.zeros(horizon, dtype=float) for ctype in CAREGIVER_TYPES}
    discharges = {
        mu.label: np.zeros(horizon, dtype=int) for mu in config.los_model.dispositions
    }
    residents: list[ResidentRecord] = []
    scale_by_group = {
        group.id: config.staff_table.scale_matrix(group.id)
        for group in config.rules.groups
    }

    entity = 0
    for day in range(horizon):
        for _ in range(int(arrivals[day])):
            entity += 1
            rng = spawn_stream(config.master_seed, replication, entity).generator()

            profile = config.scenario.sample_profile(rng, admit_day=day)
            group = classify(profile, config.rules)
            stay = sample_by_total_hazard(config.los_model, rng)

            occupied = math.ceil(stay.t_days)
            exit_day = day + occupied
            in_horizon = min(occupied, horizon - day)
            census[day:day + in_horizon] += 1

            if exit_day <= horizon - 1:
                discharges[stay.disposition.label][exit_day] += 1
                observed, label, censored = stay.t_days, stay.disposition.label, False
            else:
                observed, label, censored = float(horizon - day), "", True

            draws = rng.standard_exponential((in_horizon, len(CAREGIVER_TYPES), 2))
            minutes = (draws * scale_by_group[group.id][None, :, :]).sum(axis=2)
            for j, ctype in enumerate(CAREGIVER_TYPES):
                demand[ctype][day:day + in_horizon] += minutes[:, j]
            if demand_trace is not None:
                demand_trace.append((entity, day, minutes))

            residents.append(
                ResidentRecord(
                    replication=replication,
                    resident_id=entity,
                    admit_day=day,
                    group_id=group.id,
                    los_days=observed,
                    disposition=label,
                    censored=censored,
                )
            )

    return ReplicationResult(
        replication=replication,
        census=census,
        arrivals=arrivals,
        demand=demand,
        discharges=discharges,
        residents=residents,
    )


def run_replication(
    config: SimulationConfig, replication: int, demand_trace: list | None = None
) -> ReplicationResult:
    """One full replication: sampled arrivals plus the day loop."""
    if not isinstance(config.scenario, (CensusScenario, BootstrapProfiles)):
        raise DataError("config.scenario must be a scenario or bootstrap source")
    arrival_rng = spawn_stream(
        config.master_seed, replication, ARRIVAL_ENTITY
    ).generator()
    arrivals = sample_arrivals(config.arrival, config.horizon_days, arrival_rng)
    return simulate_with_arrivals(config, replication, arrivals, demand_trace)


def run(
    config: SimulationConfig,
    parallel: bool = False,
    max_workers: int | None = None,
) -> SimulationOutput:
    """All replications, merged deterministically by replication index.

    Replications share no state, so the thread-pool path yields the same
    output as the serial path; both orderings are exercised in tests.
    """
    indexes = list(range(config.replications))
    if parallel and config.replications > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            results = list(pool.map(lambda r: run_replication(config, r), indexes))
    else:
        results = [run_replication(config, r) for r in indexes]
    return SimulationOutput(
        config=config,
        config_hash=config_hash(config),
        replications=results,
    )


def required_replications(
    pilot_values, gamma: float = 0.05, alpha: float = 0.05
) -> int:
    """Sequential relative-precision rule on a pilot sample.

    Returns the smallest i >= len(pilot) with
    t_{i-1, 1-alpha/2} * sqrt(s2 / i) / |mean| <= gamma / (1 + gamma),
    where mean and s2 are the pilot statistics. Zero pilot variance returns
    the pilot size; zero pilot mean is an error (relative precision is
    undefined).
    """
    values = np.asarray(pilot_values, dtype=float)
    if values.ndim != 1 or len(values) < 2:
        raise DataError("pilot needs at least 2 values")
    if not (0 < gamma < 1) or not (0 < alpha < 1):
        raise ValueError("gamma and alpha must lie in (0, 1)")
    mean = float(values.mean())
    if mean == 0.0:
        raise DataError("pilot mean is zero; relative precision is undefined")
    s2 = float(values.var(ddof=1))
    if s2 == 0.0:
        return len(values)
    target = gamma / (1.0 + gamma)
    i = len(values)
    while True:
        half_width = float(t_dist.ppf(1.0 - alpha / 2.0, i - 1)) * math.sqrt(s2 / i)
        if half_width / abs(mean) <= target:
            return i
        i += 1
        if i > 10**7:
            raise ArithmeticError("replication target exceeds 1e7; check pilot values")


@dataclass
class SeriesSummary:
    """Across-replication summary of one per-day series."""

    mean: np.ndarray
    ci_lower: np.ndarray
    ci_upper: np.ndarray
    pct_lower: np.ndarray
    pct_upper: np.ndarray


@dataclass
class SummaryFrame:
    """Post-warmup per-day summaries for census and each demand series."""

    days: np.ndarray
    census: SeriesSummary
    demand: dict[str, SeriesSummary]
    alpha: float


def _summarize_series(values: np.ndarray, alpha: float) -> SeriesSummary:
    # values: (replications, days)
    reps = values.shape[0]
    mean = values.mean(axis=0)
    if reps > 1:
        half = float(t_dist.ppf(1.0 - alpha / 2.0, reps - 1)) * values.std(
            axis=0, ddof=1
        ) / math.sqrt(reps)
    else:
        half = np.zeros_like(mean)
    pct = np.percentile(values, [100.0 * alpha / 2.0, 100.0 * (1.0 - alpha / 2.0)], axis=0)
    return SeriesSummary(
        mean=mean,
        ci_lower=mean - half,
        ci_upper=mean + half,
        pct_lower=pct[0],
        pct_upper=pct[1],
    )


def summarize(output: SimulationOutput, alpha: float = 0.05) -> SummaryFrame:
    """Per-day mean, t-based CI and empirical percentile band, post-warmup."""
    if not output.replications:
        raise DataError("simulation output has no replications")
    warmup = output.config.warmup_days
    days = np.arange(warmup, output.config.horizon_days)
    census = np.stack([rep.census[warmup:] for rep in output.replications]).astype(float)
    frame = SummaryFrame(
        days=days,
        census=_summarize_series(census, alpha),
        demand={},
        alpha=alpha,
    )
    for ctype in CAREGIVER_TYPES:
        series = np.stack([rep.demand[ctype][warmup:] for rep in output.replications])
        frame.demand[ctype] = _summarize_series(series, alpha)
    return frame
