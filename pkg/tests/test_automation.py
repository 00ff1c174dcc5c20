"""Rule engine: evaluation semantics, dry-run parity, rule documents."""

from __future__ import annotations

from datetime import datetime, time, timedelta, timezone

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smarthub.automation import (
    AboveRollingAverage,
    AutomationEngine,
    AutomationRule,
    BelowAverageAtTime,
    BooleanIs,
    ButtonPressTrigger,
    CallService,
    ConditionOutcome,
    Notify,
    NumericCompare,
    ServiceRegistry,
    StateChangeTrigger,
    evaluate_rule,
    rolling_mean,
    rule_from_text,
    rule_to_text,
    trigger_matches,
)
from smarthub.clock import ManualClock
from smarthub.errors import NotFoundError, TypeMismatchError, ValidationError
from smarthub.eventlog import EventLog, EventType, MemoryLogStore
from smarthub.registry import (
    BooleanState,
    EntityKind,
    EntityRegistry,
    NumericState,
)
from tests.conftest import START


def build(with_log=False):
    """Registry + engine wired to a stub service that records calls."""
    clock = ManualClock(START)
    registry = EntityRegistry(clock=clock)
    services = ServiceRegistry()
    calls = []
    services.register("stub.record", lambda eid, params, actor, depth: calls.append((eid, dict(params), actor, depth)))
    log = EventLog(MemoryLogStore()) if with_log else None
    engine = AutomationEngine(registry, services, event_log=log, clock=clock)
    return clock, registry, engine, calls, log


def co_with_history(clock, registry, values_by_offset):
    """Commit one CO sample per (timedelta-back-from-START, value) pair."""
    ent = registry.register_entity("kitchen-co", EntityKind.CO)
    for back, value in sorted(values_by_offset, reverse=True):
        clock.set(START - back)
        registry.set_status(ent.id, NumericState(value, "ppm"), actor="device")
    clock.set(START)
    return ent


def stub_rule(trigger, conditions=(), name="r"):
    return AutomationRule(
        id="", name=name, trigger=trigger, conditions=tuple(conditions),
        actions=(CallService("stub.record", trigger.entity_id),),
    )


# ---------------------------------------------------------------- triggers


def test_state_change_trigger_entity_and_to_value():
    clock, registry, engine, calls, _ = build()
    door = registry.register_entity("door", EntityKind.DOOR)
    other = registry.register_entity("door2", EntityKind.DOOR)
    trig = StateChangeTrigger(entity_id=door.id, to_value=True)

    change = registry.set_status(door.id, BooleanState(True), actor="t")
    assert trigger_matches(trig, change) is True
    change = registry.set_status(door.id, BooleanState(False), actor="t")
    assert trigger_matches(trig, change) is False
    change = registry.set_status(other.id, BooleanState(True), actor="t")
    assert trigger_matches(trig, change) is False


def test_state_change_trigger_from_value_needs_old_state():
    clock, registry, engine, calls, _ = build()
    temp = registry.register_entity("t", EntityKind.TEMPERATURE)
    trig = StateChangeTrigger(entity_id=temp.id, from_value=20.0)
    first = registry.set_status(temp.id, NumericState(20.0, "C"), actor="t")
    # no previous state: from_value cannot match
    assert trigger_matches(trig, first) is False
    second = registry.set_status(temp.id, NumericState(21.0, "C"), actor="t")
    assert trigger_matches(trig, second) is True


def test_button_press_trigger_needs_true():
    clock, registry, engine, calls, _ = build()
    button = registry.register_entity("b", EntityKind.BUTTON)
    trig = ButtonPressTrigger(entity_id=button.id)
    press = registry.set_status(button.id, BooleanState(True), actor="t")
    release = registry.set_status(button.id, BooleanState(False), actor="t")
    assert trigger_matches(trig, press) is True
    assert trigger_matches(trig, release) is False


# ---------------------------------------------------------------- conditions


def test_above_rolling_average_worked_example():
    """History mean 20 over three days; 35 fires, 15 does not."""
    clock, registry, engine, calls, _ = build()
    ent = co_with_history(clock, registry, [
        (timedelta(days=2), 15.0),
        (timedelta(days=1), 20.0),
        (timedelta(hours=12), 25.0),
    ])
    rule_id = engine.save_rule(stub_rule(
        StateChangeTrigger(entity_id=ent.id),
        [AboveRollingAverage(entity_id=ent.id)],
    ))

    change = registry.set_status(ent.id, NumericState(35.0, "ppm"), actor="device")
    fired = engine.on_event(change)
    assert [f.rule_id for f in fired] == [rule_id]
    assert calls and calls[0][0] == ent.id

    calls.clear()
    clock.advance(timedelta(seconds=1))
    change = registry.set_status(ent.id, NumericState(15.0, "ppm"), actor="device")
    assert engine.on_event(change) == []
    assert calls == []


def test_rolling_window_boundaries_are_half_open():
    """Sample at exactly now-3d is in; the triggering sample itself is out."""
    clock, registry, engine, calls, _ = build()
    ent = co_with_history(clock, registry, [
        (timedelta(days=3, microseconds=1), 1000.0),  # out: before window start
        (timedelta(days=3), 10.0),                    # in: exactly at window start
        (timedelta(microseconds=1), 30.0),            # in: just before anchor
    ])
    avg = engine.rolling_average(ent.id, timedelta(days=3), now=START)
    assert avg.sample_count == 2
    assert avg.mean == pytest.approx(20.0)

    rule_id = engine.save_rule(stub_rule(
        StateChangeTrigger(entity_id=ent.id),
        [AboveRollingAverage(entity_id=ent.id)],
    ))
    # the trigger commit lands at its own anchor and must not dilute the mean
    change = registry.set_status(ent.id, NumericState(20.5, "ppm"), actor="device")
    report = evaluate_rule(engine.get_rule(rule_id), change, registry.snapshot(), START)
    assert report.triggered is True  # 20.5 > mean(10, 30) = 20


def test_above_rolling_average_margin_is_strict():
    clock, registry, engine, calls, _ = build()
    ent = co_with_history(clock, registry, [(timedelta(days=1), 20.0)])
    rule_id = engine.save_rule(stub_rule(
        StateChangeTrigger(entity_id=ent.id),
        [AboveRollingAverage(entity_id=ent.id, margin=10.0)],
    ))
    def probe(value):
        # hypothetical probes keep the baseline history untouched
        hyp = engine.make_hypothetical(ent.id, NumericState(value, "ppm"))
        return engine.dry_run(rule_id, hyp).triggered

    assert probe(30.0) is False  # exactly mean + margin: not above
    assert probe(30.0 + 1e-9) is True


def test_below_average_at_time_compares_same_hours():
    clock, registry, engine, calls, _ = build()
    ent = registry.register_entity("hum", EntityKind.HUMIDITY)
    # 06:30 readings on the three prior days: 55, 60, 65 (mean 60); noise at
    # other hours must not contaminate the baseline
    base = START.replace(hour=6, minute=30)
    for days_back, v in [(3, 55.0), (2, 60.0), (1, 65.0)]:
        clock.set(base - timedelta(days=days_back))
        registry.set_status(ent.id, NumericState(v, "%"), actor="device")
        clock.set(base - timedelta(days=days_back) + timedelta(hours=6))
        registry.set_status(ent.id, NumericState(999.0, "%"), actor="device")
    clock.set(base)
    cond = BelowAverageAtTime(
        entity_id=ent.id, window_start=time(6, 0), window_end=time(9, 0), baseline_days=7,
    )
    rule_id = engine.save_rule(stub_rule(StateChangeTrigger(entity_id=ent.id), [cond]))

    change = registry.set_status(ent.id, NumericState(59.0, "%"), actor="device")
    report = evaluate_rule(engine.get_rule(rule_id), change, registry.snapshot(), change.ts)
    assert report.triggered is True  # 59 < 60

    clock.advance(timedelta(seconds=1))
    change = registry.set_status(ent.id, NumericState(60.0, "%"), actor="device")
    report = evaluate_rule(engine.get_rule(rule_id), change, registry.snapshot(), change.ts)
    assert report.triggered is False  # strict <


def test_below_average_at_time_window_wraps_midnight():
    clock, registry, engine, calls, _ = build()
    ent = registry.register_entity("hum", EntityKind.HUMIDITY)
    night = START.replace(hour=23, minute=30)
    for days_back, v in [(2, 40.0), (1, 50.0)]:
        clock.set(night - timedelta(days=days_back))
        registry.set_status(ent.id, NumericState(v, "%"), actor="device")
    # current reading lands at 00:15, inside the wrapped 23:00-01:00 window
    clock.set(START.replace(hour=0, minute=15) + timedelta(days=1))
    cond = BelowAverageAtTime(
        entity_id=ent.id, window_start=time(23, 0), window_end=time(1, 0), baseline_days=7,
    )
    change = registry.set_status(ent.id, NumericState(44.0, "%"), actor="device")
    rule = AutomationRule(
        id="r1", name="r", trigger=StateChangeTrigger(entity_id=ent.id),
        conditions=(cond,), actions=(Notify("user", "low"),),
    )
    report = evaluate_rule(rule, change, registry.snapshot(), change.ts)
    assert report.per_condition[0].outcome is ConditionOutcome.TRUE  # 44 < mean(40, 50)


def test_numeric_compare_all_ops():
    clock, registry, engine, calls, _ = build()
    ent = registry.register_entity("t", EntityKind.TEMPERATURE)
    change = registry.set_status(ent.id, NumericState(20.0, "C"), actor="t")
    snap = registry.snapshot()
    cases = [("<", 21.0, True), ("<", 20.0, False), ("<=", 20.0, True),
             ("=", 20.0, True), ("=", 19.0, False), (">=", 20.0, True),
             (">", 20.0, False), (">", 19.0, True)]
    from smarthub.automation import evaluate_condition
    for op, threshold, expect in cases:
        outcome = evaluate_condition(NumericCompare(ent.id, op, threshold), snap, change.ts)
        assert (outcome is ConditionOutcome.TRUE) is expect, (op, threshold)


def test_unavailable_when_location_sharing_off():
    clock, registry, engine, calls, _ = build()
    loc = registry.add_location("kitchen", map_point=(0.5, 0.5))
    ent = registry.register_entity("co", EntityKind.CO, location_id=loc.id)
    registry.set_status(ent.id, NumericState(10.0, "ppm"), actor="device")
    registry.set_location_sharing(loc.id, False)

    snap = registry.snapshot()
    from smarthub.automation import evaluate_condition
    outcome = evaluate_condition(NumericCompare(ent.id, ">", 0.0), snap, START)
    assert outcome is ConditionOutcome.UNAVAILABLE

    registry.set_location_sharing(loc.id, True)
    outcome = evaluate_condition(NumericCompare(ent.id, ">", 0.0), registry.snapshot(), START)
    assert outcome is ConditionOutcome.TRUE


def test_unavailable_blocks_firing_never_defaults():
    """An unavailable condition must not count as true or false."""
    clock, registry, engine, calls, _ = build()
    door = registry.register_entity("door", EntityKind.DOOR)
    temp = registry.register_entity("t", EntityKind.TEMPERATURE)  # never written
    rule_id = engine.save_rule(stub_rule(
        StateChangeTrigger(entity_id=door.id),
        [NumericCompare(entity_id=temp.id, op=">", threshold=0.0)],
    ))
    change = registry.set_status(door.id, BooleanState(True), actor="t")
    fired = engine.on_event(change)
    assert fired == []
    report = evaluate_rule(engine.get_rule(rule_id), change, registry.snapshot(), change.ts)
    assert report.per_condition[0].outcome is ConditionOutcome.UNAVAILABLE
    assert report.triggered is False


def test_empty_rolling_window_is_unavailable():
    clock, registry, engine, calls, _ = build()
    ent = registry.register_entity("co", EntityKind.CO)
    clock.set(START - timedelta(days=10))
    registry.set_status(ent.id, NumericState(5.0, "ppm"), actor="device")  # stale
    clock.set(START)
    snap = registry.snapshot()
    from smarthub.automation import evaluate_condition
    outcome = evaluate_condition(
        AboveRollingAverage(entity_id=ent.id, window=timedelta(days=3)), snap, START
    )
    assert outcome is ConditionOutcome.UNAVAILABLE


# ---------------------------------------------------------------- rule CRUD


def test_save_rule_reports_every_problem_at_once():
    clock, registry, engine, calls, _ = build()
    door = registry.register_entity("door", EntityKind.DOOR)
    rule = AutomationRule(
        id="", name="broken",
        trigger=StateChangeTrigger(entity_id="ent-99"),
        conditions=(
            AboveRollingAverage(entity_id=door.id, margin=-1.0),  # wrong kind AND bad margin
            NumericCompare(entity_id="ent-98", op="!=", threshold=0.0),
        ),
        actions=(),
    )
    with pytest.raises(ValidationError) as err:
        engine.save_rule(rule)
    problems = err.value.problems
    assert len(problems) >= 5
    joined = "\n".join(problems)
    assert "at least one action" in joined
    assert "unknown entity 'ent-99'" in joined
    assert "margin" in joined
    assert "unknown comparison op" in joined
    assert "is door" in joined


def test_save_rule_rejects_unknown_service_and_role():
    clock, registry, engine, calls, _ = build()
    door = registry.register_entity("door", EntityKind.DOOR)
    rule = AutomationRule(
        id="", name="r", trigger=StateChangeTrigger(entity_id=door.id),
        conditions=(),
        actions=(CallService("no.such", door.id), Notify("neighbour", "hi")),
    )
    with pytest.raises(ValidationError) as err:
        engine.save_rule(rule)
    joined = "\n".join(err.value.problems)
    assert "unknown service" in joined
    assert "unknown recipient role" in joined


def test_button_trigger_must_point_at_button():
    clock, registry, engine, calls, _ = build()
    door = registry.register_entity("door", EntityKind.DOOR)
    rule = stub_rule(ButtonPressTrigger(entity_id=door.id))
    with pytest.raises(ValidationError):
        engine.save_rule(rule)


def test_edit_replaces_rule_and_bumps_version():
    clock, registry, engine, calls, _ = build(with_log=True)
    door = registry.register_entity("door", EntityKind.DOOR)
    rule_id = engine.save_rule(stub_rule(StateChangeTrigger(entity_id=door.id)))
    assert engine.get_rule(rule_id).version == 1

    edited = AutomationRule(
        id=rule_id, name="renamed", trigger=StateChangeTrigger(entity_id=door.id),
        conditions=(), actions=(Notify("user", "door moved"),),
    )
    engine.save_rule(edited)
    stored = engine.get_rule(rule_id)
    assert stored.version == 2
    assert stored.name == "renamed"
    assert stored.actions == edited.actions  # whole-rule replacement


def test_remove_rule():
    clock, registry, engine, calls, _ = build()
    door = registry.register_entity("door", EntityKind.DOOR)
    rule_id = engine.save_rule(stub_rule(StateChangeTrigger(entity_id=door.id)))
    engine.remove_rule(rule_id)
    with pytest.raises(NotFoundError):
        engine.get_rule(rule_id)


# ---------------------------------------------------------------- live path


def test_rules_fire_in_insertion_order_actions_in_rule_order():
    clock, registry, engine, calls, _ = build()
    door = registry.register_entity("door", EntityKind.DOOR)
    for tag in ("first", "second"):
        engine.save_rule(AutomationRule(
            id="", name=tag, trigger=StateChangeTrigger(entity_id=door.id),
            conditions=(),
            actions=(
                CallService("stub.record", door.id, {"tag": f"{tag}.a"}),
                CallService("stub.record", door.id, {"tag": f"{tag}.b"}),
            ),
        ))
    change = registry.set_status(door.id, BooleanState(True), actor="t")
    engine.on_event(change)
    assert [c[1]["tag"] for c in calls] == ["first.a", "first.b", "second.a", "second.b"]


def test_failed_action_logged_and_does_not_block_the_rest():
    clock, registry, engine, calls, log = build(with_log=True)
    engine._services.register("stub.boom", lambda *a: (_ for _ in ()).throw(RuntimeError("fuse blew")))
    door = registry.register_entity("door", EntityKind.DOOR)
    engine.save_rule(AutomationRule(
        id="", name="r", trigger=StateChangeTrigger(entity_id=door.id),
        conditions=(),
        actions=(CallService("stub.boom", door.id), CallService("stub.record", door.id)),
    ))
    change = registry.set_status(door.id, BooleanState(True), actor="t")
    fired = engine.on_event(change)
    assert [f.ok for f in fired] == [False, True]
    assert "fuse blew" in fired[0].error
    assert len(calls) == 1
    errors = [r for r in log.all_records()
              if r.event_type is EventType.SECURITY and r.details.get("error") == "action_dispatch_failed"]
    assert len(errors) == 1


def test_rule_fired_event_is_logged():
    clock, registry, engine, calls, log = build(with_log=True)
    door = registry.register_entity("door", EntityKind.DOOR)
    rule_id = engine.save_rule(stub_rule(StateChangeTrigger(entity_id=door.id)))
    change = registry.set_status(door.id, BooleanState(True), actor="t")
    engine.on_event(change)
    fired = [r for r in log.all_records() if r.event_type is EventType.RULE_FIRED]
    assert len(fired) == 1
    assert fired[0].details["rule_id"] == rule_id


def test_self_triggering_rule_stops_at_depth_limit(hub):
    lamp = hub.registry.register_entity("lamp", EntityKind.LIGHT)
    hub.engine.save_rule(AutomationRule(
        id="", name="feedback", trigger=StateChangeTrigger(entity_id=lamp.id),
        conditions=(),
        actions=(CallService("light.set", lamp.id, {"intensity": 50}),),
    ))
    hub.registry.set_light(lamp.id, intensity=10, color=(255, 255, 255), actor="tester")
    history = hub.registry.snapshot().history(lamp.id).in_window(
        START - timedelta(days=1), START + timedelta(days=1)
    )
    # manual commit at depth 0 plus rule-driven commits at depths 1..9
    assert len(history) == 10
    tripped = [r for r in hub.log.all_records()
               if r.event_type is EventType.SECURITY
               and r.details.get("error") == "cascade_depth_limit"]
    assert len(tripped) == 1


def test_disabled_rule_never_fires():
    clock, registry, engine, calls, _ = build()
    door = registry.register_entity("door", EntityKind.DOOR)
    rule_id = engine.save_rule(stub_rule(StateChangeTrigger(entity_id=door.id)))
    engine.set_rule_enabled(rule_id, False)
    change = registry.set_status(door.id, BooleanState(True), actor="t")
    assert engine.on_event(change) == []
    assert calls == []


# ---------------------------------------------------------------- dry run


def test_dry_run_dispatches_nothing_and_audits():
    clock, registry, engine, calls, log = build(with_log=True)
    door = registry.register_entity("door", EntityKind.DOOR)
    rule_id = engine.save_rule(stub_rule(StateChangeTrigger(entity_id=door.id)))
    hyp = engine.make_hypothetical(door.id, BooleanState(True))
    report = engine.dry_run(rule_id, hyp)
    assert report.triggered is True
    assert calls == []  # nothing dispatched
    audits = [r for r in log.all_records() if r.event_type is EventType.DRY_RUN]
    assert len(audits) == 1
    assert audits[0].details == {"rule_id": rule_id, "triggered": "true", "reason": ""}
    # the hypothetical never reached the registry
    state, _ = registry.get_status(door.id)
    assert state.value == BooleanState(False)


def test_dry_run_disabled_rule_reports_reason():
    clock, registry, engine, calls, _ = build()
    door = registry.register_entity("door", EntityKind.DOOR)
    rule_id = engine.save_rule(stub_rule(StateChangeTrigger(entity_id=door.id)))
    engine.set_rule_enabled(rule_id, False)
    report = engine.dry_run(rule_id, engine.make_hypothetical(door.id, BooleanState(True)))
    assert report.triggered is False
    assert report.reason == "disabled"


def test_make_hypothetical_mirrors_commit_timestamp_bump():
    clock, registry, engine, calls, _ = build()
    door = registry.register_entity("door", EntityKind.DOOR)
    committed = registry.set_status(door.id, BooleanState(True), actor="t")
    hyp = engine.make_hypothetical(door.id, BooleanState(False))
    # frozen clock: both pick old.updated_at + 1 microsecond
    assert hyp.new.updated_at == committed.new.updated_at + timedelta(microseconds=1)


def test_rolling_average_rejects_non_numeric():
    clock, registry, engine, calls, _ = build()
    door = registry.register_entity("door", EntityKind.DOOR)
    with pytest.raises(TypeMismatchError):
        engine.rolling_average(door.id, timedelta(days=3), now=START)


def test_rolling_average_empty_window_is_none():
    clock, registry, engine, calls, _ = build()
    ent = registry.register_entity("co", EntityKind.CO)
    assert engine.rolling_average(ent.id, timedelta(days=3), now=START) is None


# ---------------------------------------------------------------- properties


@st.composite
def history_and_window(draw):
    n = draw(st.integers(min_value=0, max_value=30))
    offsets = draw(st.lists(
        st.integers(min_value=0, max_value=5 * 24 * 60), min_size=n, max_size=n, unique=True,
    ))
    values = draw(st.lists(
        st.floats(min_value=-1e6, max_value=1e6, allow_nan=False), min_size=n, max_size=n,
    ))
    window_minutes = draw(st.integers(min_value=1, max_value=4 * 24 * 60))
    return offsets, values, window_minutes


@given(history_and_window())
@settings(max_examples=80, deadline=None)
def test_rolling_mean_matches_bruteforce(data):
    offsets, values, window_minutes = data
    clock = ManualClock(START)
    registry = EntityRegistry(clock=clock)
    ent = registry.register_entity("co", EntityKind.CO)
    for back, v in sorted(zip(offsets, values), reverse=True):
        clock.set(START - timedelta(minutes=back))
        registry.set_status(ent.id, NumericState(v, "ppm"), actor="device")
    window = timedelta(minutes=window_minutes)
    got = rolling_mean(registry.snapshot(), ent.id, window, START)

    picked = [v for back, v in zip(offsets, values)
              if START - window <= START - timedelta(minutes=back) < START]
    if not picked:
        assert got is None
    else:
        assert got.sample_count == len(picked)
        assert got.mean == pytest.approx(sum(picked) / len(picked), rel=1e-12)


@st.composite
def equivalence_case(draw):
    history = draw(st.lists(
        st.tuples(
            st.integers(min_value=1, max_value=4 * 24 * 60),
            st.floats(min_value=0.0, max_value=100.0, allow_nan=False),
        ),
        min_size=0, max_size=12,
        unique_by=lambda t: t[0],
    ))
    new_value = draw(st.floats(min_value=0.0, max_value=100.0, allow_nan=False))
    to_value = draw(st.sampled_from([None, new_value, new_value + 1.0]))
    conditions = draw(st.lists(st.sampled_from(["avg", "cmp", "bool"]), max_size=3))
    margin = draw(st.floats(min_value=0.0, max_value=10.0, allow_nan=False))
    threshold = draw(st.floats(min_value=0.0, max_value=100.0, allow_nan=False))
    motion_on = draw(st.booleans())
    return history, new_value, to_value, conditions, margin, threshold, motion_on


@given(equivalence_case())
@settings(max_examples=100, deadline=None)
def test_dry_run_equals_live_evaluation(case):
    history, new_value, to_value, cond_tags, margin, threshold, motion_on = case
    clock = ManualClock(START)
    registry = EntityRegistry(clock=clock)
    services = ServiceRegistry()
    services.register("stub.record", lambda *a: None)
    engine = AutomationEngine(registry, services, clock=clock)

    co = registry.register_entity("co", EntityKind.CO)
    motion = registry.register_entity("motion", EntityKind.MOTION)
    for back, v in sorted(history, reverse=True):
        clock.set(START - timedelta(minutes=back))
        registry.set_status(co.id, NumericState(v, "ppm"), actor="device")
    clock.set(START)
    if motion_on:
        registry.set_status(motion.id, BooleanState(True), actor="device")

    conditions = []
    for tag in cond_tags:
        if tag == "avg":
            conditions.append(AboveRollingAverage(entity_id=co.id, margin=margin))
        elif tag == "cmp":
            conditions.append(NumericCompare(entity_id=co.id, op=">=", threshold=threshold))
        else:
            conditions.append(BooleanIs(entity_id=motion.id, value=True))
    rule_id = engine.save_rule(AutomationRule(
        id="", name="p", trigger=StateChangeTrigger(entity_id=co.id, to_value=to_value),
        conditions=tuple(conditions),
        actions=(CallService("stub.record", co.id),),
    ))

    dry = engine.dry_run(rule_id, engine.make_hypothetical(co.id, NumericState(new_value, "ppm")))

    live_reports = []
    engine.report_listener = live_reports.append
    change = registry.set_status(co.id, NumericState(new_value, "ppm"), actor="device")
    fired = engine.on_event(change, now=change.ts)

    assert len(live_reports) == 1
    live = live_reports[0]
    assert dry.triggered == live.triggered
    assert [c.outcome for c in dry.per_condition] == [c.outcome for c in live.per_condition]
    assert dry.reason == live.reason
    assert dry.actions_that_would_fire == tuple(f.action for f in fired)


rule_docs = st.builds(
    AutomationRule,
    id=st.sampled_from(["", "rule-7"]),
    name=st.text(min_size=1, max_size=20),
    trigger=st.one_of(
        st.builds(ButtonPressTrigger, entity_id=st.just("ent-1")),
        st.builds(
            StateChangeTrigger,
            entity_id=st.just("ent-1"),
            to_value=st.one_of(st.none(), st.booleans(), st.floats(allow_nan=False, allow_infinity=False)),
            from_value=st.one_of(st.none(), st.booleans()),
        ),
    ),
    conditions=st.tuples() | st.tuples(st.one_of(
        st.builds(
            AboveRollingAverage,
            entity_id=st.just("ent-2"),
            window=st.timedeltas(min_value=timedelta(minutes=1), max_value=timedelta(days=14)),
            margin=st.floats(min_value=0, max_value=1e6, allow_nan=False),
        ),
        st.builds(
            BelowAverageAtTime,
            entity_id=st.just("ent-2"),
            window_start=st.times().map(lambda t: t.replace(second=0, microsecond=0)),
            window_end=st.times().map(lambda t: t.replace(second=0, microsecond=0)),
            baseline_days=st.integers(min_value=1, max_value=30),
        ),
        st.builds(
            NumericCompare,
            entity_id=st.just("ent-2"),
            op=st.sampled_from(["<", "<=", "=", ">=", ">"]),
            threshold=st.floats(allow_nan=False, allow_infinity=False),
        ),
        st.builds(BooleanIs, entity_id=st.just("ent-3"), value=st.booleans()),
    )),
    actions=st.tuples(st.one_of(
        st.builds(
            CallService,
            service_name=st.just("light.on"),
            entity_id=st.just("ent-4"),
            params=st.dictionaries(st.sampled_from(["intensity", "note"]), st.integers(0, 100), max_size=2),
        ),
        st.builds(
            Notify,
            recipient_role=st.sampled_from(["user", "designated_contact", "system_manager"]),
            message_template=st.text(max_size=40),
        ),
    )),
    enabled=st.booleans(),
    version=st.integers(min_value=1, max_value=99),
)


@given(rule_docs)
@settings(max_examples=100, deadline=None)
def test_rule_text_round_trips(rule):
    text = rule_to_text(rule)
    back = rule_from_text(text)
    assert back == rule
    # re-serialization is bit for bit stable
    assert rule_to_text(back) == text


def test_rule_window_seconds_survive_round_trip():
    rule = AutomationRule(
        id="rule-1", name="co watch",
        trigger=StateChangeTrigger(entity_id="ent-1"),
        conditions=(AboveRollingAverage(entity_id="ent-1", window=timedelta(hours=36), margin=2.5),),
        actions=(Notify("user", "co rising"),),
    )
    back = rule_from_text(rule_to_text(rule))
    assert back.conditions[0].window == timedelta(hours=36)
    assert back.conditions[0].margin == 2.5


def test_rule_text_rejects_unknown_schema():
    with pytest.raises(ValidationError):
        rule_from_text('{"schema": "hub.rule.v9", "name": "x"}')
