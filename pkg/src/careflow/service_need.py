"""Service-need classification and daily staff-time sampling.

Residents are assigned to service-need groups by an ordered rule list over
the nine profile attributes. A rule is a conjunction of per-attribute
conditions (exact value or inclusive [lo, hi] interval); the first matching
rule wins. The validator enumerates the full discrete attribute lattice
(2^6 * 17 * 6 * 4 = 26112 profiles) to prove the rule list total and to flag
profiles matched by rules that disagree on the group.

Daily staff time for a (caregiver type, group) pair is hypoexponential: the
sum of an Exponential(direct mean) and an Exponential(indirect mean) draw,
reducing to an Erlang-2 when the two means coincide. Mean  m1 + m2,
variance m1^2 + m2^2.

The shipped default table (data/staff_time_default.json) contains plausible
placeholder means for a 12-group ruleset; the real time-study values are
proprietary and the placeholders are never used as test oracles.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .census import ATTRIBUTE_CARDINALITY, ATTRIBUTE_NAMES, ResidentProfile
from .errors import ConfigError, DataError

__all__ = [
    "CAREGIVER_TYPES",
    "ServiceNeedGroup",
    "RuleCondition",
    "ClassificationRule",
    "ClassificationRules",
    "RuleValidation",
    "StaffTimeMeans",
    "StaffTimeTable",
    "classify",
    "validate_rules",
    "rules_from_dict",
    "rules_to_dict",
    "table_from_dict",
    "table_to_dict",
    "sample_daily_staff_time",
    "lint_staff_table",
]

CAREGIVER_TYPES: tuple[str, ...] = ("CNA", "LPN", "RN")

# Daily per-resident mean minutes can never exceed one day.
_MAX_DAILY_MINUTES = 1440.0


@dataclass(frozen=True)
class ServiceNeedGroup:
    id: int
    label: str

    def __post_init__(self) -> None:
        if self.id < 1:
            raise ValueError("group ids are 1-based")
        if not self.label:
            raise ValueError("group label must be non-empty")


@dataclass(frozen=True)
class RuleCondition:
    """Inclusive interval test on one attribute (a point is lo == hi)."""

    attribute: str
    lo: int
    hi: int

    def __post_init__(self) -> None:
        if self.attribute not in ATTRIBUTE_CARDINALITY:
            raise ValueError(f"unknown attribute {self.attribute!r}")
        limit = ATTRIBUTE_CARDINALITY[self.attribute] - 1
        if not (0 <= self.lo <= self.hi <= limit):
            raise ValueError(
                f"{self.attribute} condition [{self.lo}, {self.hi}] outside [0, {limit}]"
            )

    def matches(self, value: int) -> bool:
        return self.lo <= value <= self.hi


@dataclass(frozen=True)
class ClassificationRule:
    conditions: tuple[RuleCondition, ...]
    group_id: int

    def matches(self, profile: ResidentProfile) -> bool:
        return all(c.matches(getattr(profile, c.attribute)) for c in self.conditions)


@dataclass
class ClassificationRules:
    """Ordered, first-match-wins rule list plus the group catalogue."""

    groups: list[ServiceNeedGroup]
    rules: list[ClassificationRule]
    # Optional lint metadata: chains of group ids in ascending acuity.
    acuity_chains: list[list[int]] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.groups or not self.rules:
            raise ValueError("rules require at least one group and one rule")
        ids = [g.id for g in self.groups]
        labels = [g.label for g in self.groups]
        if len(set(ids)) != len(ids) or len(set(labels)) != len(labels):
            raise ValueError("group ids and labels must be unique")
        known = set(ids)
        for i, rule in enumerate(self.rules):
            if rule.group_id not in known:
                raise ValueError(f"rule {i} targets unknown group {rule.group_id}")
        for chain in self.acuity_chains:
            if any(gid not in known for gid in chain):
                raise ValueError("acuity chain references unknown group")

    def group_by_id(self, group_id: int) -> ServiceNeedGroup:
        for group in self.groups:
            if group.id == group_id:
                return group
        raise KeyError(group_id)


@dataclass(frozen=True)
class RuleValidation:
    """Exhaustive lattice check: coverage and cross-group overlap."""

    total_profiles: int
    uncovered: int
    conflicts: int
    uncovered_witness: tuple[int, ...] | None
    conflict_witness: tuple[int, ...] | None

    @property
    def ok(self) -> bool:
        return self.uncovered == 0 and self.conflicts == 0


def classify(profile: ResidentProfile, rules: ClassificationRules) -> ServiceNeedGroup:
    """Group of the first matching rule; DataError if nothing matches."""
    for rule in rules.rules:
        if rule.matches(profile):
            return rules.group_by_id(rule.group_id)
    raise DataError(f"no classification rule matches profile {profile.attributes()}")


def _lattice() -> np.ndarray:
    """All attribute combinations, shape (26112, 9), column order x1..x9."""
    axes = [np.arange(ATTRIBUTE_CARDINALITY[name]) for name in ATTRIBUTE_NAMES]
    return np.array(list(itertools.product(*axes)), dtype=np.int16)


def validate_rules(rules: ClassificationRules) -> RuleValidation:
    """Enumerate the full attribute lattice.

    Reports profiles no rule covers and profiles matched by two or more rules
    that map to different groups (under first-match-wins the assignment is
    still unique, but such overlaps are almost always authoring mistakes).
    """
    lattice = _lattice()
    column = {name: i for i, name in enumerate(ATTRIBUTE_NAMES)}
    n = len(lattice)

    match_matrix = np.empty((len(rules.rules), n), dtype=bool)
    for r, rule in enumerate(rules.rules):
        mask = np.ones(n, dtype=bool)
        for cond in rule.conditions:
            col = lattice[:, column[cond.attribute]]
            mask &= (col >= cond.lo) & (col <= cond.hi)
        match_matrix[r] = mask

    covered = match_matrix.any(axis=0)
    group_ids = np.array([rule.group_id for rule in rules.rules])
    lo = np.where(match_matrix, group_ids[:, None], np.iinfo(np.int64).max).min(axis=0)
    hi = np.where(match_matrix, group_ids[:, None], np.iinfo(np.int64).min).max(axis=0)
    conflicting = covered & (lo != hi)

    uncovered_idx = np.flatnonzero(~covered)
    conflict_idx = np.flatnonzero(conflicting)
    return RuleValidation(
        total_profiles=n,
        uncovered=len(uncovered_idx),
        conflicts=len(conflict_idx),
        uncovered_witness=(
            tuple(int(v) for v in lattice[uncovered_idx[0]]) if len(uncovered_idx) else None
        ),
        conflict_witness=(
            tuple(int(v) for v in lattice[conflict_idx[0]]) if len(conflict_idx) else None
        ),
    )


def rules_from_dict(payload: dict) -> ClassificationRules:
    """Parse the rule file format.

    {"schema_version": 1,
     "groups": [{"id": 1, "label": "..."}],
     "rules": [{"when": {"x5": [2, 3], "x1": 7}, "group": 1}],
     "acuity_chains": [[5, 4, 3]]}
    """
    if payload.get("schema_version") != 1:
        raise ConfigError("rules: unsupported or missing schema_version (expected 1)")
    try:
        groups = [ServiceNeedGroup(int(g["id"]), str(g["label"])) for g in payload["groups"]]
        parsed_rules = []
        for entry in payload["rules"]:
            conditions = []
            for attribute, bound in entry["when"].items():
                if isinstance(bound, list):
                    lo, hi = (int(bound[0]), int(bound[1]))
                else:
                    lo = hi = int(bound)
                conditions.append(RuleCondition(attribute=attribute, lo=lo, hi=hi))
            parsed_rules.append(
                ClassificationRule(conditions=tuple(conditions), group_id=int(entry["group"]))
            )
        chains = [[int(g) for g in chain] for chain in payload.get("acuity_chains", [])]
        return ClassificationRules(groups=groups, rules=parsed_rules, acuity_chains=chains)
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"rules: {exc}") from exc


def rules_to_dict(rules: ClassificationRules) -> dict:
    return {
        "schema_version": 1,
        "groups": [{"id": g.id, "label": g.label} for g in rules.groups],
        "rules": [
            {
                "when": {
                    c.attribute: (c.lo if c.lo == c.hi else [c.lo, c.hi])
                    for c in rule.conditions
                },
                "group": rule.group_id,
            }
            for rule in rules.rules
        ],
        "acuity_chains": [list(chain) for chain in rules.acuity_chains],
    }


# ---------------------------------------------------------------------------
# staff time
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StaffTimeMeans:
    """Mean daily direct and indirect care minutes for one (type, group)."""

    direct_min: float
    indirect_min: float

    def __post_init__(self) -> None:
        for value in (self.direct_min, self.indirect_min):
            if not (value > 0 and math.isfinite(value)):
                raise ValueError("mean minutes must be positive and finite")
        if self.direct_min + self.indirect_min > _MAX_DAILY_MINUTES:
            raise ValueError("daily mean minutes cannot exceed 1440")

    @property
    def total(self) -> float:
        return self.direct_min + self.indirect_min

    @property
    def variance(self) -> float:
        return self.direct_min**2 + self.indirect_min**2


@dataclass
class StaffTimeTable:
    """Map (caregiver type, group id) -> hypoexponential phase means."""

    entries: dict[tuple[str, int], StaffTimeMeans]

    def __post_init__(self) -> None:
        for (ctype, group_id), means in self.entries.items():
            if ctype not in CAREGIVER_TYPES:
                raise ValueError(f"unknown caregiver type {ctype!r}")
            if group_id < 1:
                raise ValueError("group ids are 1-based")
            if not isinstance(means, StaffTimeMeans):
                raise ValueError("entries must map to StaffTimeMeans")

    def means(self, caregiver_type: str, group_id: int) -> StaffTimeMeans:
        try:
            return self.entries[(caregiver_type, group_id)]
        except KeyError:
            raise ConfigError(
                f"staff-time table has no entry for {caregiver_type}:{group_id}"
            ) from None

    def check_covers(self, rules: ClassificationRules) -> None:
        """Every (caregiver type, group) pair must be present."""
        missing = [
            f"{ctype}:{group.id}"
            for ctype in CAREGIVER_TYPES
            for group in rules.groups
            if (ctype, group.id) not in self.entries
        ]
        if missing:
            raise ConfigError(f"staff-time table is missing entries: {', '.join(missing)}")

    def scale_matrix(self, group_id: int) -> np.ndarray:
        """Phase means as a (len(CAREGIVER_TYPES), 2) array for bulk sampling."""
        rows = []
        for ctype in CAREGIVER_TYPES:
            means = self.means(ctype, group_id)
            rows.append((means.direct_min, means.indirect_min))
        return np.array(rows, dtype=float)


def table_from_dict(payload: dict) -> StaffTimeTable:
    """Parse {"schema_version": 1, "entries": {"CNA:1": {"direct_min": ..}}}."""
    if payload.get("schema_version") != 1:
        raise ConfigError("staff-time table: unsupported or missing schema_version")
    entries: dict[tuple[str, int], StaffTimeMeans] = {}
    try:
        for key, value in payload["entries"].items():
            ctype, _, group_text = key.partition(":")
            entries[(ctype, int(group_text))] = StaffTimeMeans(
                direct_min=float(value["direct_min"]),
                indirect_min=float(value["indirect_min"]),
            )
        return StaffTimeTable(entries=entries)
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"staff-time table: {exc}") from exc


def table_to_dict(table: StaffTimeTable) -> dict:
    return {
        "schema_version": 1,
        "entries": {
            f"{ctype}:{group_id}": {
                "direct_min": means.direct_min,
                "indirect_min": means.indirect_min,
            }
            for (ctype, group_id), means in sorted(table.entries.items())
        },
    }


def sample_daily_staff_time(
    group: ServiceNeedGroup | int,
    caregiver_type: str,
    table: StaffTimeTable,
    rng: np.random.Generator,
) -> float:
    """One hypoexponential draw: Exp(direct mean) + Exp(indirect mean)."""
    group_id = group.id if isinstance(group, ServiceNeedGroup) else int(group)
    means = table.means(caregiver_type, group_id)
    draws = rng.standard_exponential(2)
    return float(draws[0] * means.direct_min + draws[1] * means.indirect_min)


def _sample_components(
    group_id: int,
    caregiver_type: str,
    table: StaffTimeTable,
    rng: np.random.Generator,
    size: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Bulk (direct, indirect) component draws; used by moment checks."""
    means = table.means(caregiver_type, group_id)
    draws = rng.standard_exponential((size, 2))
    return draws[:, 0] * means.direct_min, draws[:, 1] * means.indirect_min


def lint_staff_table(
    rules: ClassificationRules,
    table: StaffTimeTable,
    caregiver_type: str = "CNA",
) -> list[str]:
    """Monotone-acuity sanity warnings (never errors).

    Along each declared acuity chain (ascending), mean caregiver minutes
    should not decrease.
    """
    warnings: list[str] = []
    for chain in rules.acuity_chains:
        totals = [table.means(caregiver_type, gid).total for gid in chain]
        for (g_lo, t_lo), (g_hi, t_hi) in zip(
            zip(chain, totals), zip(chain[1:], totals[1:])
        ):
            if t_hi < t_lo:
                warnings.append(
                    f"{caregiver_type}: group {g_hi} ({t_hi:.1f} min) is below "
                    f"lower-acuity group {g_lo} ({t_lo:.1f} min)"
                )
    return warnings
