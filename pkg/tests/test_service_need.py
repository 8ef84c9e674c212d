"""Classification against a brute-force matcher, lattice validation,
staff-time table coverage and the two-phase service-time moments."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from careflow.census import ATTRIBUTE_CARDINALITY, ATTRIBUTE_NAMES, ResidentProfile
from careflow.config import default_rules, default_staff_table
from careflow.errors import ConfigError, DataError
from careflow.rng import RngStream
from careflow.service_need import (
    CAREGIVER_TYPES,
    ClassificationRule,
    ClassificationRules,
    RuleCondition,
    ServiceNeedGroup,
    StaffTimeMeans,
    StaffTimeTable,
    _sample_components,
    classify,
    lint_staff_table,
    rules_from_dict,
    rules_to_dict,
    sample_daily_staff_time,
    table_from_dict,
    table_to_dict,
    validate_rules,
)

profile_strategy = st.builds(
    ResidentProfile,
    **{
        name: st.integers(0, ATTRIBUTE_CARDINALITY[name] - 1)
        for name in ATTRIBUTE_NAMES
    },
)


def _matches_brute_force(rule: ClassificationRule, profile: ResidentProfile) -> bool:
    return all(
        cond.lo <= getattr(profile, cond.attribute) <= cond.hi
        for cond in rule.conditions
    )


@settings(max_examples=300, deadline=None)
@given(profile_strategy)
def test_classify_is_first_match_on_default_rules(profile):
    rules = default_rules()
    expected = None
    for rule in rules.rules:
        if _matches_brute_force(rule, profile):
            expected = rule.group_id
            break
    assert expected is not None  # default set covers the lattice
    assert classify(profile, rules).id == expected


def test_classify_raises_when_nothing_matches():
    tiny = ClassificationRules(
        groups=[ServiceNeedGroup(1, "only")],
        rules=[
            ClassificationRule(
                conditions=(RuleCondition("x5", 1, 3),), group_id=1
            )
        ],
        acuity_chains=[],
    )
    profile = ResidentProfile(x1=0, x2=0, x3=0, x4=0, x5=0, x6=0, x7=0, x8=0, x9=0)
    with pytest.raises(DataError):
        classify(profile, tiny)


def test_default_rules_cover_lattice_without_conflicts():
    report = validate_rules(default_rules())
    assert report.total_profiles == int(
        np.prod([ATTRIBUTE_CARDINALITY[name] for name in ATTRIBUTE_NAMES])
    )
    assert report.uncovered == 0
    assert report.conflicts == 0
    assert report.ok


def test_validate_rules_detects_uncovered_profiles():
    rules = default_rules()
    # drop the final fall-through rule: part of the lattice loses coverage
    truncated = ClassificationRules(
        groups=rules.groups, rules=rules.rules[:-1], acuity_chains=rules.acuity_chains
    )
    report = validate_rules(truncated)
    assert report.uncovered > 0
    assert not report.ok
    assert report.uncovered_witness is not None
    witness = ResidentProfile(**dict(zip(ATTRIBUTE_NAMES, report.uncovered_witness)))
    with pytest.raises(DataError):
        classify(witness, truncated)


def test_validate_rules_detects_cross_group_overlap():
    rules = default_rules()
    overlapping = ClassificationRules(
        groups=rules.groups,
        rules=list(rules.rules)
        + [ClassificationRule(conditions=(RuleCondition("x5", 2, 3),), group_id=9)],
        acuity_chains=rules.acuity_chains,
    )
    report = validate_rules(overlapping)
    assert report.conflicts > 0
    assert report.conflict_witness is not None
    witness = ResidentProfile(**dict(zip(ATTRIBUTE_NAMES, report.conflict_witness)))
    # first-match-wins still assigns the original group
    assert classify(witness, overlapping).id == 1


def test_rule_condition_validates_bounds():
    with pytest.raises(ValueError):
        RuleCondition("x1", 5, 2)
    with pytest.raises(ValueError):
        RuleCondition("x99", 0, 1)


def test_rules_dict_round_trip():
    rules = default_rules()
    payload = rules_to_dict(rules)
    back = rules_from_dict(payload)
    assert [g.id for g in back.groups] == [g.id for g in rules.groups]
    assert len(back.rules) == len(rules.rules)
    assert back.acuity_chains == rules.acuity_chains
    rng = RngStream(seed=4, stream_id=4).generator()
    for _ in range(200):
        profile = ResidentProfile(
            **{
                name: int(rng.integers(ATTRIBUTE_CARDINALITY[name]))
                for name in ATTRIBUTE_NAMES
            }
        )
        assert classify(profile, back).id == classify(profile, rules).id


# ---------------------------------------------------------------------------
# staff-time table
# ---------------------------------------------------------------------------


def test_default_table_covers_default_rules():
    table = default_staff_table()
    table.check_covers(default_rules())  # must not raise
    matrix = table.scale_matrix(3)
    assert matrix.shape == (len(CAREGIVER_TYPES), 2)
    assert matrix[0, 0] == table.means("CNA", 3).direct_min
    assert matrix[2, 1] == table.means("RN", 3).indirect_min


def test_check_covers_reports_missing_pairs():
    table = default_staff_table()
    entries = dict(table.entries)
    del entries[("LPN", 7)]
    with pytest.raises(ConfigError) as err:
        StaffTimeTable(entries=entries).check_covers(default_rules())
    assert "LPN:7" in str(err.value)


def test_staff_time_means_validation():
    with pytest.raises(ValueError):
        StaffTimeMeans(direct_min=0.0, indirect_min=5.0)
    with pytest.raises(ValueError):
        StaffTimeMeans(direct_min=1300.0, indirect_min=200.0)  # over a day


def test_table_dict_round_trip():
    table = default_staff_table()
    back = table_from_dict(table_to_dict(table))
    assert back.entries == table.entries


def test_hypoexponential_moments():
    table = default_staff_table()
    rng = RngStream(seed=6, stream_id=6).generator()
    for (ctype, gid) in [("CNA", 1), ("LPN", 9), ("RN", 12)]:
        means = table.means(ctype, gid)
        direct, indirect = _sample_components(gid, ctype, table, rng, 200000)
        total = direct + indirect
        expected_mean = means.direct_min + means.indirect_min
        expected_var = means.direct_min**2 + means.indirect_min**2
        assert total.mean() == pytest.approx(expected_mean, rel=0.02)
        assert total.var() == pytest.approx(expected_var, rel=0.04)


def test_equal_phases_give_erlang_two():
    entries = {("CNA", 1): StaffTimeMeans(direct_min=20.0, indirect_min=20.0)}
    table = StaffTimeTable(entries=entries)
    rng = RngStream(seed=8, stream_id=8).generator()
    draws = np.array(
        [sample_daily_staff_time(1, "CNA", table, rng) for _ in range(4000)]
    )
    # sum of two iid Exp(mean 20) is Gamma(shape 2, scale 20)
    result = stats.kstest(draws, "gamma", args=(2.0, 0.0, 20.0))
    assert result.pvalue > 0.01


def test_lint_flags_non_monotone_chain():
    rules = default_rules()
    table = default_staff_table()
    assert lint_staff_table(rules, table, "CNA") == []
    entries = dict(table.entries)
    entries[("CNA", 3)] = StaffTimeMeans(direct_min=1.0, indirect_min=1.0)
    warnings = lint_staff_table(rules, StaffTimeTable(entries=entries), "CNA")
    assert warnings and any("3" in w for w in warnings)


def test_shipped_group_means_lie_in_plausible_band():
    # every per-group CNA mean stays within the plausible daily range
    table = default_staff_table()
    rules = default_rules()
    for group in rules.groups:
        total = table.means("CNA", group.id).total
        assert 5.0 <= total <= 240.0
