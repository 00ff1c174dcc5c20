"""Attack scenario harness: every scripted intrusion must be stopped."""

from __future__ import annotations

import pytest

from smarthub.attacks import (
    NEGATIVE_CONTROLS,
    STAGE_EXPLOITATION,
    ScenarioOutcome,
    StageTracker,
    format_report,
    load_stage_data,
    run_all,
    run_negative_control,
    run_scenario,
    scenario_kinds,
)
from smarthub.errors import ValidationError

KINDS = scenario_kinds()


def test_stage_fixture_shape():
    data = load_stage_data()
    assert data["stages"] == [
        "target_detection", "preparation", "malware_acquisition", "deployment",
        "attack", "detection", "prevail", "exploitation",
    ]
    assert sorted(data["scenarios"]) == sorted(KINDS)
    for entry in data["scenarios"].values():
        assert entry["surface"]
        assert entry["expected_prevention"]


def test_stage_tracker_is_forward_only():
    tracker = StageTracker(["a", "b", "c"])
    tracker.advance("a")
    tracker.advance("b")
    assert tracker.has("a") and tracker.has("b")
    assert not tracker.has("c")
    with pytest.raises(ValidationError):
        tracker.advance("a")  # going backward breaks the narrative
    with pytest.raises(ValidationError):
        tracker.advance("nope")


@pytest.mark.parametrize("kind", KINDS)
def test_each_scenario_is_defeated(kind):
    outcome = run_scenario(kind, seed=0)
    assert outcome.defeated is True, outcome.detail
    assert STAGE_EXPLOITATION not in outcome.stages_reached
    assert outcome.prevention_fired is True
    assert outcome.prevention_kind == outcome.expected_prevention
    assert outcome.stages_total == 8


@pytest.mark.parametrize("kind", KINDS)
def test_negative_control_reaches_exploitation(kind):
    outcome = run_negative_control(kind, seed=0)
    assert outcome.defeated is False
    assert STAGE_EXPLOITATION in outcome.stages_reached


def test_negative_controls_flip_exactly_one_toggle():
    for kind, overrides in NEGATIVE_CONTROLS.items():
        assert len(overrides) == 1, kind
        name, value = next(iter(overrides.items()))
        assert value is False, (kind, name)


def test_ddos_scenario_deterministic_per_seed():
    a = run_scenario("ddos_heating", seed=7)
    b = run_scenario("ddos_heating", seed=7)
    assert a.stages_reached == b.stages_reached
    assert a.defeated == b.defeated
    assert a.detail == b.detail


def test_run_all_covers_every_kind_once():
    outcomes = run_all(seed=0)
    assert [o.kind for o in outcomes] == KINDS
    assert all(o.defeated for o in outcomes)


def test_format_report_table_and_lines():
    outcomes = run_all(seed=0)
    table = format_report(outcomes, style="table")
    lines_out = table.splitlines()
    # header, separator, one row per scenario
    assert len(lines_out) == 2 + len(KINDS)
    assert lines_out[0].startswith("scenario")
    for kind in KINDS:
        assert kind in table
    lines = format_report(outcomes, style="lines")
    assert all(k in lines for k in KINDS)
    with pytest.raises(ValidationError):
        format_report(outcomes, style="fancy")


def test_outcome_reports_surface_from_fixture():
    outcome = run_scenario("physical_door", seed=0)
    assert isinstance(outcome, ScenarioOutcome)
    assert "door" in outcome.surface
