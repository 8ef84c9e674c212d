"""Admissions and resident-mix modeling.

Three concerns live here:

- Daily arrival counts: negative binomial (fit by profiling out p at
  p = r / (r + mean) and searching the 1-d likelihood in r) or Poisson,
  with a pooled-bin chi-square goodness-of-fit test. Negative binomial
  variates are drawn as a gamma-Poisson mixture.
- Resident profiles: nine care-need attributes per resident. x1 is the ADL
  dependence score (0..16), x4 rehabilitation intensity (0..5), x5 extensive
  medical services (0..3); the rest are binary flags. Profiles are sampled
  either from a scenario's independent per-attribute distributions or by
  bootstrap from an ingested resident table (which preserves the joint
  structure between attributes).
- What-if scenarios: declarative transforms of the baseline mix. ADL shifts
  re-weight the ADL marginal as a two-component band mixture and then solve
  the band weight so the target mean shift holds exactly (the mean takes
  precedence over the nominal band share when the two conflict); therapy
  reduction scales the positive-rehabilitation mass.

The resident CSV schema is the package's ingestion format:
resident_id,admit_day,x1..x9,los_days,disposition,censored with disposition
empty exactly when censored = 1. Lines starting with '#' are schema comments.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import gammaln
from scipy.stats import chi2 as chi2_dist
from scipy.stats import nbinom as nbinom_dist
from scipy.stats import poisson as poisson_dist

from .errors import DataError
from .rng import categorical_index
from .survival import (
    DEFAULT_DISPOSITIONS,
    DispositionId,
    LosDataset,
    LosObservation,
)

__all__ = [
    "ATTRIBUTE_CARDINALITY",
    "ATTRIBUTE_NAMES",
    "ArrivalModel",
    "GofResult",
    "ResidentProfile",
    "CensusScenario",
    "BootstrapProfiles",
    "ResidentTable",
    "fit_arrivals",
    "arrival_log_likelihood",
    "chi_square_gof",
    "sample_arrivals",
    "adl_band_mix",
    "therapy_fraction_scale",
    "apply_transforms",
    "scenario_from_dict",
    "scenario_to_dict",
    "load_residents",
    "save_residents",
]

# Attribute lattice: x1 ADL score 0..16, x4 rehabilitation 0..5, x5 extensive
# medical 0..3, all others binary.
ATTRIBUTE_NAMES: tuple[str, ...] = (
    "x1", "x2", "x3", "x4", "x5", "x6", "x7", "x8", "x9",
)
ATTRIBUTE_CARDINALITY: dict[str, int] = {
    "x1": 17,
    "x2": 2,
    "x3": 2,
    "x4": 6,
    "x5": 4,
    "x6": 2,
    "x7": 2,
    "x8": 2,
    "x9": 2,
}

RESIDENT_CSV_COMMENT = "# residents-csv v1"
RESIDENT_CSV_HEADER = (
    "resident_id", "admit_day",
    "x1", "x2", "x3", "x4", "x5", "x6", "x7", "x8", "x9",
    "los_days", "disposition", "censored",
)


# ---------------------------------------------------------------------------
# arrival process
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ArrivalModel:
    """Daily admission count distribution.

    family is "negbinom" (fields r, p; mean r(1-p)/p) or "poisson"
    (field lam). Exactly the active family's fields are set.
    """

    family: str
    r: float | None = None
    p: float | None = None
    lam: float | None = None

    def __post_init__(self) -> None:
        if self.family == "negbinom":
            if self.r is None or self.p is None or self.lam is not None:
                raise ValueError("negbinom requires r and p and no lam")
            if not (self.r > 0 and math.isfinite(self.r)):
                raise ValueError("r must be positive and finite")
            if not (0 < self.p < 1):
                raise ValueError("p must lie in (0, 1)")
        elif self.family == "poisson":
            if self.lam is None or self.r is not None or self.p is not None:
                raise ValueError("poisson requires lam and no r/p")
            if self.lam < 0 or not math.isfinite(self.lam):
                raise ValueError("lam must be non-negative and finite")
        else:
            raise ValueError(f"unknown arrival family {self.family!r}")

    def mean(self) -> float:
        if self.family == "negbinom":
            return self.r * (1.0 - self.p) / self.p
        return float(self.lam)


@dataclass(frozen=True)
class GofResult:
    """Pooled-bin Pearson chi-square result."""

    statistic: float
    p_value: float
    dof: int
    bins: int


def _check_counts(daily_counts) -> np.ndarray:
    counts = np.asarray(daily_counts)
    if counts.ndim != 1 or len(counts) == 0:
        raise DataError("daily counts must be a non-empty 1-d sequence")
    if not np.issubdtype(counts.dtype, np.integer):
        rounded = np.rint(counts)
        if not np.allclose(counts, rounded):
            raise DataError("daily counts must be integers")
        counts = rounded.astype(int)
    if np.any(counts < 0):
        raise DataError("daily counts must be non-negative")
    return counts.astype(int)


def _negbinom_loglik(counts: np.ndarray, r: float, p: float) -> float:
    return float(
        np.sum(gammaln(counts + r)) - len(counts) * gammaln(r)
        - np.sum(gammaln(counts + 1.0))
        + len(counts) * r * math.log(p)
        + counts.sum() * math.log1p(-p)
    )


def arrival_log_likelihood(model: ArrivalModel, daily_counts) -> float:
    """Log-likelihood of observed daily counts under the model."""
    counts = _check_counts(daily_counts)
    if model.family == "negbinom":
        return _negbinom_loglik(counts, model.r, model.p)
    if model.lam == 0.0:
        return 0.0 if not counts.any() else -math.inf
    return float(np.sum(poisson_dist.logpmf(counts, model.lam)))


def fit_arrivals(daily_counts, family: str = "negbinom") -> ArrivalModel:
    """Maximum-likelihood arrival model of the requested family.

    The negative binomial is fit by a 1-d search over ln r with p profiled
    out at its conditional MLE p = r / (r + mean). Data with zero variance
    cannot identify r and raise DataError suggesting the Poisson family.
    """
    counts = _check_counts(daily_counts)
    mean = float(counts.mean())
    if family == "poisson":
        return ArrivalModel(family="poisson", lam=mean)
    if family != "negbinom":
        raise DataError(f"unknown arrival family {family!r}")
    if mean == 0.0:
        raise DataError(
            "all daily counts are zero; the negative binomial is not "
            "identifiable, use family='poisson'"
        )
    if float(counts.var()) == 0.0:
        raise DataError(
            "daily counts have zero variance; the negative binomial is not "
            "identifiable, use family='poisson'"
        )

    def negative_profile(log_r: float) -> float:
        r = math.exp(log_r)
        p = r / (r + mean)
        return -_negbinom_loglik(counts, r, p)

    result = minimize_scalar(
        negative_profile,
        bounds=(math.log(1e-6), math.log(1e6)),
        method="bounded",
        options={"xatol": 1e-10},
    )
    r_hat = math.exp(float(result.x))
    return ArrivalModel(family="negbinom", r=r_hat, p=r_hat / (r_hat + mean))


def _pearson(observed: np.ndarray, expected: np.ndarray) -> float:
    return float(np.sum(np.square(observed - expected) / expected))


def chi_square_gof(daily_counts, model: ArrivalModel) -> GofResult:
    """Pearson chi-square test of the fitted count distribution.

    Support bins are pooled left to right until each pooled bin has expected
    count of at least 5 (the open tail is folded into the last bin). Degrees
    of freedom are pooled bins minus 1 minus the number of fitted parameters.
    """
    counts = _check_counts(daily_counts)
    n = len(counts)
    top = int(counts.max())
    values = np.arange(top + 1)
    if model.family == "negbinom":
        pmf = nbinom_dist.pmf(values, model.r, model.p)
        tail = float(nbinom_dist.sf(top, model.r, model.p))
        n_params = 2
    else:
        if model.lam == 0.0:
            raise DataError("chi-square test is undefined for a point mass at zero")
        pmf = poisson_dist.pmf(values, model.lam)
        tail = float(poisson_dist.sf(top, model.lam))
        n_params = 1

    observed_by_value = np.bincount(counts, minlength=top + 1).astype(float)
    expected_by_value = np.append(pmf * n, tail * n)
    observed_by_value = np.append(observed_by_value, 0.0)

    pooled_obs: list[float] = []
    pooled_exp: list[float] = []
    acc_obs = acc_exp = 0.0
    for o, e in zip(observed_by_value, expected_by_value):
        acc_obs += o
        acc_exp += e
        if acc_exp >= 5.0:
            pooled_obs.append(acc_obs)
            pooled_exp.append(acc_exp)
            acc_obs = acc_exp = 0.0
    if acc_exp > 0.0 and pooled_obs:
        pooled_obs[-1] += acc_obs
        pooled_exp[-1] += acc_exp

    bins = len(pooled_obs)
    if bins < 2:
        raise DataError(
            f"only {bins} pooled bin(s) with expected count >= 5; "
            "too few observations for a chi-square test"
        )
    dof = bins - 1 - n_params
    if dof < 1:
        raise DataError(
            f"{bins} pooled bins leave {dof} degrees of freedom after "
            f"estimating {n_params} parameter(s)"
        )
    statistic = _pearson(np.asarray(pooled_obs), np.asarray(pooled_exp))
    return GofResult(
        statistic=statistic,
        p_value=float(chi2_dist.sf(statistic, dof)),
        dof=dof,
        bins=bins,
    )


def sample_arrivals(
    model: ArrivalModel, day_count: int, rng: np.random.Generator
) -> np.ndarray:
    """Daily admission counts for day_count days.

    The negative binomial is drawn as its gamma-Poisson mixture:
    rate ~ Gamma(r, (1-p)/p) then count ~ Poisson(rate).
    """
    if day_count < 0:
        raise ValueError("day_count must be non-negative")
    if day_count == 0:
        return np.zeros(0, dtype=int)
    if model.family == "negbinom":
        rates = rng.gamma(shape=model.r, scale=(1.0 - model.p) / model.p, size=day_count)
        return rng.poisson(rates).astype(int)
    return rng.poisson(model.lam, size=day_count).astype(int)


# ---------------------------------------------------------------------------
# resident profiles and scenarios
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ResidentProfile:
    """Care-need attributes of one resident plus the admission day."""

    x1: int
    x2: int
    x3: int
    x4: int
    x5: int
    x6: int
    x7: int
    x8: int
    x9: int
    admit_day: int = 0

    def __post_init__(self) -> None:
        for name in ATTRIBUTE_NAMES:
            value = getattr(self, name)
            limit = ATTRIBUTE_CARDINALITY[name]
            if not isinstance(value, (int, np.integer)) or not 0 <= value < limit:
                raise ValueError(f"{name} must be an integer in [0, {limit - 1}]")
        if self.admit_day < 0:
            raise ValueError("admit_day must be non-negative")

    def attributes(self) -> tuple[int, ...]:
        return tuple(int(getattr(self, name)) for name in ATTRIBUTE_NAMES)


@dataclass
class CensusScenario:
    """Named resident mix: one categorical distribution per attribute."""

    name: str
    distributions: dict[str, np.ndarray]

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("scenario name must be non-empty")
        if set(self.distributions) != set(ATTRIBUTE_NAMES):
            missing = set(ATTRIBUTE_NAMES) ^ set(self.distributions)
            raise ValueError(f"scenario must cover exactly x1..x9, mismatch: {sorted(missing)}")
        normalized = {}
        for name in ATTRIBUTE_NAMES:
            probs = np.asarray(self.distributions[name], dtype=float)
            if probs.shape != (ATTRIBUTE_CARDINALITY[name],):
                raise ValueError(
                    f"{name} distribution must have length {ATTRIBUTE_CARDINALITY[name]}"
                )
            if np.any(probs < 0) or np.any(~np.isfinite(probs)):
                raise ValueError(f"{name} probabilities must be finite and non-negative")
            if abs(float(probs.sum()) - 1.0) > 1e-9:
                raise ValueError(f"{name} probabilities must sum to 1 within 1e-9")
            normalized[name] = probs
        self.distributions = normalized

    def mean(self, attribute: str) -> float:
        probs = self.distributions[attribute]
        return float(np.arange(len(probs)) @ probs)

    def sample_profile(self, rng: np.random.Generator, admit_day: int = 0) -> ResidentProfile:
        """One profile; consumes exactly one uniform per attribute, x1..x9."""
        values = {
            name: categorical_index(rng, self.distributions[name])
            for name in ATTRIBUTE_NAMES
        }
        return ResidentProfile(admit_day=admit_day, **values)


@dataclass
class BootstrapProfiles:
    """Profile source that resamples ingested residents with replacement.

    Preserves the joint structure between attributes, unlike a scenario's
    independent marginals.
    """

    name: str
    profiles: list[ResidentProfile]

    def __post_init__(self) -> None:
        if not self.profiles:
            raise ValueError("bootstrap source needs at least one profile")

    def sample_profile(self, rng: np.random.Generator, admit_day: int = 0) -> ResidentProfile:
        row = self.profiles[int(rng.integers(len(self.profiles)))]
        values = dict(zip(ATTRIBUTE_NAMES, row.attributes()))
        return ResidentProfile(admit_day=admit_day, **values)


def adl_band_mix(
    scenario: CensusScenario,
    band: tuple[int, int],
    band_weight: float,
    mean_scale: float,
    name: str | None = None,
) -> CensusScenario:
    """Shift the ADL mix toward a band while hitting a mean target exactly.

    The new ADL distribution is a two-component mixture of the scenario's
    distribution restricted to the band and to its complement. The mixture
    weight is solved so the new mean equals mean_scale times the old mean;
    band_weight is the nominal share and only documents intent when the two
    constraints conflict (the mean target wins). A target outside the span of
    the two component means is unreachable and raises ValueError.
    """
    lo, hi = band
    if not (0 <= lo <= hi < ATTRIBUTE_CARDINALITY["x1"]):
        raise ValueError("band must be inside the ADL range")
    if not (0.0 <= band_weight <= 1.0):
        raise ValueError("band_weight must lie in [0, 1]")
    if mean_scale <= 0:
        raise ValueError("mean_scale must be positive")

    probs = scenario.distributions["x1"]
    values = np.arange(len(probs))
    in_band = (values >= lo) & (values <= hi)
    mass_in = float(probs[in_band].sum())
    mass_out = float(probs[~in_band].sum())
    if mass_in <= 0 or mass_out <= 0:
        raise ValueError("both the band and its complement need baseline mass")
    comp_in = np.where(in_band, probs, 0.0) / mass_in
    comp_out = np.where(in_band, 0.0, probs) / mass_out
    mean_in = float(values @ comp_in)
    mean_out = float(values @ comp_out)
    target = mean_scale * float(values @ probs)
    if math.isclose(mean_in, mean_out):
        raise ValueError("band and complement means coincide; target unreachable")
    weight = (mean_out - target) / (mean_out - mean_in)
    if not -1e-9 <= weight <= 1.0 + 1e-9:
        raise ValueError(
            f"mean target {target:.3f} is outside the reachable range "
            f"[{min(mean_in, mean_out):.3f}, {max(mean_in, mean_out):.3f}]"
        )
    weight = min(max(weight, 0.0), 1.0)

    new_x1 = weight * comp_in + (1.0 - weight) * comp_out
    distributions = dict(scenario.distributions)
    distributions["x1"] = new_x1 / new_x1.sum()
    return CensusScenario(name=name or scenario.name, distributions=distributions)


def therapy_fraction_scale(
    scenario: CensusScenario, factor: float, name: str | None = None
) -> CensusScenario:
    """Scale the share of residents receiving any rehabilitation (x4 >= 1)."""
    if factor < 0:
        raise ValueError("factor must be non-negative")
    probs = scenario.distributions["x4"].copy()
    positive = float(probs[1:].sum())
    if factor * positive > 1.0 + 1e-12:
        raise ValueError("factor pushes the rehabilitation share above 1")
    probs[1:] *= factor
    probs[0] = 1.0 - float(probs[1:].sum())
    distributions = dict(scenario.distributions)
    distributions["x4"] = probs
    return CensusScenario(name=name or scenario.name, distributions=distributions)


def apply_transforms(scenario: CensusScenario, transforms: list[dict]) -> CensusScenario:
    """Apply declarative transform dictionaries in order."""
    out = scenario
    for spec in transforms:
        kind = spec.get("type")
        if kind == "adl_band_mix":
            out = adl_band_mix(
                out,
                band=tuple(spec["band"]),
                band_weight=float(spec["band_weight"]),
                mean_scale=float(spec["mean_scale"]),
                name=out.name,
            )
        elif kind == "therapy_fraction_scale":
            out = therapy_fraction_scale(out, factor=float(spec["factor"]), name=out.name)
        else:
            raise ValueError(f"unknown scenario transform {kind!r}")
    return out


def scenario_from_dict(payload: dict) -> CensusScenario:
    """Parse a scenario dictionary (already include-resolved).

    Accepts either explicit "distributions" or a "base" scenario dictionary,
    optionally followed by "transforms".
    """
    if not isinstance(payload, dict):
        raise ValueError("scenario must be an object")
    name = payload.get("name")
    if not name:
        raise ValueError("scenario requires a name")
    if "distributions" in payload:
        distributions = {
            key: np.asarray(value, dtype=float)
            for key, value in payload["distributions"].items()
        }
        scenario = CensusScenario(name=name, distributions=distributions)
    elif "base" in payload:
        base = scenario_from_dict(payload["base"])
        scenario = CensusScenario(name=name, distributions=base.distributions)
    else:
        raise ValueError("scenario requires distributions or a base scenario")
    return apply_transforms(scenario, payload.get("transforms", []))


def scenario_to_dict(scenario: CensusScenario) -> dict:
    return {
        "schema_version": 1,
        "name": scenario.name,
        "distributions": {
            key: [float(v) for v in value]
            for key, value in scenario.distributions.items()
        },
    }


# ---------------------------------------------------------------------------
# resident CSV ingestion
# ---------------------------------------------------------------------------


@dataclass
class ResidentTable:
    """Parsed resident CSV: ids, profiles, and stay observations, row-aligned."""

    resident_ids: list[str]
    profiles: list[ResidentProfile]
    observations: list[LosObservation]
    dispositions: list[DispositionId] = field(
        default_factory=lambda: list(DEFAULT_DISPOSITIONS)
    )

    def dataset(self) -> LosDataset:
        return LosDataset(
            observations=list(self.observations),
            dispositions=list(self.dispositions),
        )


def _parse_int(text: str, row: int, column: str, lo: int, hi: int) -> int:
    try:
        value = int(text)
    except ValueError:
        raise DataError(f"row {row}: {column} must be an integer, got {text!r}") from None
    if not lo <= value <= hi:
        raise DataError(f"row {row}: {column} must lie in [{lo}, {hi}], got {value}")
    return value


def load_residents(path: str | Path) -> ResidentTable:
    """Read and validate a resident CSV; errors carry 1-based row numbers."""
    path = Path(path)
    by_label = {d.label: d for d in DEFAULT_DISPOSITIONS}
    try:
        with path.open("r", encoding="utf-8", newline="") as handle:
            lines = [line for line in handle if not line.startswith("#")]
    except OSError as exc:
        raise DataError(f"{path}: cannot read resident file ({exc})") from None
    reader = csv.reader(io.StringIO("".join(lines)))
    rows = list(reader)
    if not rows:
        raise DataError(f"{path}: empty resident file")
    header = tuple(rows[0])
    if header != RESIDENT_CSV_HEADER:
        raise DataError(
            f"{path}: header mismatch; expected {','.join(RESIDENT_CSV_HEADER)}"
        )

    ids: list[str] = []
    profiles: list[ResidentProfile] = []
    observations: list[LosObservation] = []
    for row_number, row in enumerate(rows[1:], start=2):
        if len(row) != len(RESIDENT_CSV_HEADER):
            raise DataError(
                f"row {row_number}: expected {len(RESIDENT_CSV_HEADER)} fields, got {len(row)}"
            )
        record = dict(zip(RESIDENT_CSV_HEADER, row))
        if not record["resident_id"]:
            raise DataError(f"row {row_number}: resident_id must be non-empty")
        admit = _parse_int(record["admit_day"], row_number, "admit_day", 0, 10**9)
        values = {
            name: _parse_int(
                record[name], row_number, name, 0, ATTRIBUTE_CARDINALITY[name] - 1
            )
            for name in ATTRIBUTE_NAMES
        }
        try:
            los = float(record["los_days"])
        except ValueError:
            raise DataError(
                f"row {row_number}: los_days must be a number, got {record['los_days']!r}"
            ) from None
        if not (los > 0 and math.isfinite(los)):
            raise DataError(f"row {row_number}: los_days must be positive and finite")
        censored_flag = _parse_int(record["censored"], row_number, "censored", 0, 1)
        label = record["disposition"]
        if censored_flag == 1:
            if label != "":
                raise DataError(
                    f"row {row_number}: censored rows must have an empty disposition"
                )
            disposition = None
        else:
            if label not in by_label:
                raise DataError(
                    f"row {row_number}: disposition must be one of "
                    f"{sorted(by_label)} for observed discharges, got {label!r}"
                )
            disposition = by_label[label]

        ids.append(record["resident_id"])
        profiles.append(ResidentProfile(admit_day=admit, **values))
        observations.append(
            LosObservation(t_days=los, disposition=disposition, censored=censored_flag == 1)
        )
    return ResidentTable(resident_ids=ids, profiles=profiles, observations=observations)


def save_residents(path: str | Path, table: ResidentTable) -> None:
    """Write a resident table in the ingestion schema (RFC 4180, UTF-8)."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as handle:
        handle.write(RESIDENT_CSV_COMMENT + "\r\n")
        writer = csv.writer(handle)
        writer.writerow(RESIDENT_CSV_HEADER)
        for rid, profile, obs in zip(
            table.resident_ids, table.profiles, table.observations
        ):
            writer.writerow(
                [rid, profile.admit_day, *profile.attributes(),
                 repr(float(obs.t_days)),
                 "" if obs.disposition is None else obs.disposition.label,
                 1 if obs.censored else 0]
            )
