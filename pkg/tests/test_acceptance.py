"""Acceptance suite. One test per criterion; the run summary prints a
PASS/FAIL line for each (see conftest).

These deliberately re-verify behavior the unit suites already cover, but
end to end and at scale: staged attacks with negative controls, randomized
dry-run/live agreement, credential rotation, window boundaries, the MFA
manifest sweep, flood throttling, a 10,000-record log oracle, and wire
round-trips.
"""

from __future__ import annotations

import math
import random
import time as time_mod
from datetime import datetime, time, timedelta, timezone

import pytest
from fastapi.testclient import TestClient

from smarthub.adapters import (
    Command,
    DeviceEndpoint,
    Direction,
    Protocol,
    Reading,
    coap_path,
    http_ingest_path,
    mqtt_state_topic,
    parse_command,
    parse_reading,
    serialize_command,
    serialize_reading,
)
from smarthub.api import create_app, privileged_routes
from smarthub.attacks import (
    NEGATIVE_CONTROLS,
    STAGE_EXPLOITATION,
    run_all,
    scenario_kinds,
)
from smarthub.automation import (
    AboveRollingAverage,
    AutomationEngine,
    AutomationRule,
    BelowAverageAtTime,
    BooleanIs,
    CallService,
    ConditionOutcome,
    NumericCompare,
    ServiceRegistry,
    StateChangeTrigger,
)
from smarthub.clock import ManualClock
from smarthub.config import HubConfig
from smarthub.eventlog import (
    INVESTIGATION_HOLD_KEY,
    INVESTIGATION_HOLD_OPEN,
    EventLog,
    EventRecord,
    EventType,
    MemoryLogStore,
)
from smarthub.hub import Hub
from smarthub.registry import BooleanState, EntityKind, EntityRegistry, NumericState
from smarthub.security import RequestMeta, is_credential_expired, make_credential, totp_code

from conftest import OWNER, OWNER_PASSWORD, OWNER_SECRET, START, make_config

US = timedelta(microseconds=1)


def login(client, clock, headers: dict | None = None) -> str:
    headers = headers or {}
    resp = client.post(
        "/api/auth/login",
        json={"user_id": OWNER, "password": OWNER_PASSWORD},
        headers=headers,
    )
    assert resp.status_code == 200, resp.text
    resp = client.post(
        "/api/auth/mfa",
        json={
            "challenge_id": resp.json()["challenge_id"],
            "code": totp_code(OWNER_SECRET, clock.now()),
        },
        headers=headers,
    )
    assert resp.status_code == 200, resp.text
    return resp.json()["session_token"]


# -- criterion 1 --------------------------------------------------------------


@pytest.mark.acceptance(
    num=1,
    title="all five staged attacks defeated; each negative control flips exactly its own row",
)
def test_attack_matrix_and_negative_controls():
    started = time_mod.monotonic()
    kinds = scenario_kinds()
    assert len(kinds) == 5

    outcomes = run_all(seed=101)
    assert [o.kind for o in outcomes] == kinds
    for outcome in outcomes:
        assert outcome.defeated is True, outcome.kind
        assert STAGE_EXPLOITATION not in outcome.stages_reached, outcome.kind
        assert outcome.prevention_fired is True, outcome.kind
        assert outcome.prevention_kind == outcome.expected_prevention, outcome.kind

    # 5x5: turning off one defense flips exactly the matching row
    for off_kind, overrides in NEGATIVE_CONTROLS.items():
        weakened = HubConfig().with_security(**overrides)
        matrix = run_all(seed=101, config=weakened)
        flipped = [o.kind for o in matrix if not o.defeated]
        assert flipped == [off_kind], f"disabling {overrides} flipped {flipped}"
        broken = next(o for o in matrix if o.kind == off_kind)
        assert STAGE_EXPLOITATION in broken.stages_reached
        assert broken.prevention_fired is False

    assert time_mod.monotonic() - started < 60.0


# -- criterion 2 --------------------------------------------------------------


def _random_rule_parts(rng, co, temp, motion):
    trigger_entity = rng.choice((co, temp, motion))
    if trigger_entity is motion:
        new_value = rng.random() < 0.5
        to_value = rng.choice((None, True, False))
    else:
        new_value = rng.uniform(-50.0, 150.0)
        to_value = rng.choice((None, round(new_value, 1)))
    trigger = StateChangeTrigger(entity_id=trigger_entity.id, to_value=to_value)

    conditions = []
    for _ in range(rng.randrange(0, 4)):
        pick = rng.randrange(4)
        numeric_target = rng.choice((co, temp))
        if pick == 0:
            conditions.append(
                AboveRollingAverage(
                    entity_id=numeric_target.id,
                    window=timedelta(hours=rng.uniform(1.0, 96.0)),
                    margin=rng.uniform(0.0, 10.0),
                )
            )
        elif pick == 1:
            start_h, end_h = rng.randrange(24), rng.randrange(24)
            conditions.append(
                BelowAverageAtTime(
                    entity_id=numeric_target.id,
                    window_start=time(start_h, 0),
                    window_end=time(end_h, 0),
                )
            )
        elif pick == 2:
            conditions.append(
                NumericCompare(
                    entity_id=numeric_target.id,
                    op=rng.choice((">", ">=", "<", "<=", "=")),
                    threshold=rng.uniform(-50.0, 150.0),
                )
            )
        else:
            conditions.append(BooleanIs(entity_id=motion.id, value=rng.random() < 0.5))
    return trigger_entity, new_value, trigger, conditions


@pytest.mark.acceptance(
    num=2,
    title="dry run agrees with live evaluation on 1,000 randomized cases; rolling mean matches brute force",
)
def test_dry_run_agrees_with_live_on_randomized_triples():
    rng = random.Random(0xC0FFEE)
    for trial in range(1000):
        clock = ManualClock(START)
        registry = EntityRegistry(clock=clock)
        services = ServiceRegistry()
        services.register("sink.record", lambda *a: None)
        engine = AutomationEngine(registry, services, clock=clock)

        room = registry.add_location("room", map_point=(0.5, 0.5))
        co = registry.register_entity("co", EntityKind.CO, location_id=room.id)
        temp = registry.register_entity("temp", EntityKind.TEMPERATURE, location_id=room.id)
        motion = registry.register_entity("motion", EntityKind.MOTION, location_id=room.id)

        # random histories, committed oldest-first so timestamps stay honest
        committed: dict[str, list[tuple[datetime, float]]] = {co.id: [], temp.id: []}
        events = []
        for entity in (co, temp):
            offsets = {rng.uniform(0.0, 4 * 86400.0) for _ in range(rng.randrange(0, 22))}
            for off in offsets:
                events.append((START - timedelta(seconds=off), entity, rng.uniform(-50.0, 150.0)))
        events.sort(key=lambda e: e[0])
        for ts, entity, value in events:
            clock.set(ts)
            change = registry.set_status(entity.id, NumericState(value, "u"), actor="seed")
            committed[entity.id].append((change.new.updated_at, value))
        clock.set(START)
        if rng.random() < 0.3:
            registry.set_status(motion.id, BooleanState(rng.random() < 0.5), actor="seed")
        if rng.random() < 0.15:
            registry.set_location_sharing(room.id, False)

        trigger_entity, new_value, trigger, conditions = _random_rule_parts(rng, co, temp, motion)
        rule_id = engine.save_rule(
            AutomationRule(
                id="",
                name=f"trial {trial}",
                trigger=trigger,
                conditions=tuple(conditions),
                actions=(CallService("sink.record", trigger_entity.id),),
            )
        )

        state = BooleanState(new_value) if isinstance(new_value, bool) else NumericState(new_value, "u")
        dry = engine.dry_run(rule_id, engine.make_hypothetical(trigger_entity.id, state))

        live_reports = []
        engine.report_listener = live_reports.append
        change = registry.set_status(trigger_entity.id, state, actor="device")
        fired = engine.on_event(change, now=change.ts)

        assert len(live_reports) == 1
        live = live_reports[0]
        assert dry.triggered == live.triggered, f"trial {trial}"
        assert [c.outcome for c in dry.per_condition] == [c.outcome for c in live.per_condition]
        assert dry.reason == live.reason
        assert dry.actions_that_would_fire == tuple(f.action for f in fired)

        # rolling mean against an independent brute-force oracle
        probe = rng.choice((co, temp))
        window = timedelta(seconds=rng.uniform(600.0, 4 * 86400.0))
        got = engine.rolling_average(probe.id, window, START)
        in_window = [v for ts, v in committed[probe.id] if START - window <= ts < START]
        if not in_window:
            assert got is None
        else:
            expect = sum(in_window) / len(in_window)
            assert got.sample_count == len(in_window)
            assert math.isclose(got.mean, expect, rel_tol=1e-9, abs_tol=1e-12)


# -- criterion 3 --------------------------------------------------------------


@pytest.mark.acceptance(
    num=3,
    title="credentials expire exactly 30 days after creation; expired credentials refused on every privileged route",
)
def test_monthly_rotation_boundary_and_refusal_sweep():
    # closed boundary on the credential itself
    credential = make_credential(OWNER_PASSWORD, START)
    assert is_credential_expired(credential, START + timedelta(days=30) - US, 30.0) is False
    assert is_credential_expired(credential, START + timedelta(days=30), 30.0) is True

    # same boundary through the login flow
    clock = ManualClock(START)
    hub = Hub(config=make_config(), clock=clock)
    clock.set(START + timedelta(days=30) - US)
    assert hub.guard.authenticate(OWNER, OWNER_PASSWORD).status == "challenge"
    clock.set(START + timedelta(days=30))
    outcome = hub.guard.authenticate(OWNER, OWNER_PASSWORD)
    assert outcome.status == "credential_expired"

    # a session opened just before the boundary loses every privileged route
    # the moment the credential ages out
    clock2 = ManualClock(START)
    hub2 = Hub(config=make_config(), clock=clock2)
    with TestClient(create_app(hub2)) as client:
        clock2.advance(timedelta(days=29, hours=23))
        token = login(client, clock2)
        ok = client.post(
            "/api/locations",
            json={"name": "den", "map_point": [0.5, 0.5]},
            headers={"X-Session-Token": token},
        )
        assert ok.status_code == 200

        clock2.advance(timedelta(hours=2))
        manifest = privileged_routes(client.app)
        assert len(manifest) >= 15
        refused = 0
        for method, path in manifest:
            concrete = (
                path.replace("{entity_id}", "ent-1")
                .replace("{location_id}", "loc-1")
                .replace("{rule_id}", "rule-1")
                .replace("{panel_id}", "panel-1")
            )
            resp = client.request(
                method, concrete, json={}, headers={"X-Session-Token": token}
            )
            if resp.status_code == 403 and "credential_expired" in resp.json()["reasons"]:
                refused += 1
        assert refused == len(manifest), "every sweep case must be refused"


# -- criterion 4 --------------------------------------------------------------


def _engine_with_history(samples):
    """Fresh registry/engine with one CO sensor and (ts, value) history."""
    clock = ManualClock(START)
    registry = EntityRegistry(clock=clock)
    services = ServiceRegistry()
    services.register("sink.record", lambda *a: None)
    engine = AutomationEngine(registry, services, clock=clock)
    sensor = registry.register_entity("co", EntityKind.CO)
    for ts, value in sorted(samples):
        clock.set(ts)
        registry.set_status(sensor.id, NumericState(value, "ppm"), actor="seed")
    clock.set(START)
    return clock, registry, engine, sensor


def _probe(engine, registry, sensor, value: float) -> bool:
    rule_id = engine.save_rule(
        AutomationRule(
            id="",
            name="probe",
            trigger=StateChangeTrigger(entity_id=sensor.id),
            conditions=(AboveRollingAverage(entity_id=sensor.id),),
            actions=(CallService("sink.record", sensor.id),),
        )
    )
    report = engine.dry_run(
        rule_id, engine.make_hypothetical(sensor.id, NumericState(value, "ppm"))
    )
    return report


@pytest.mark.acceptance(
    num=4,
    title="default rolling window covers exactly [now-3d, now), shown on hand-built boundary histories",
)
def test_three_day_window_boundaries_by_hand():
    window = timedelta(days=3)

    # a sample sitting exactly on now-3d belongs to the window ...
    clock, registry, engine, sensor = _engine_with_history(
        [(START - window, 10.0), (START - timedelta(days=1), 30.0)]
    )
    assert engine.rolling_average(sensor.id, window, START).mean == 20.0
    assert engine.rolling_average(sensor.id, window, START).sample_count == 2
    report = _probe(engine, registry, sensor, 20.5)
    assert report.triggered is True  # 20.5 > mean(10, 30)

    # ... and moving that one sample back a single microsecond drops it
    clock, registry, engine, sensor = _engine_with_history(
        [(START - window - US, 10.0), (START - timedelta(days=1), 30.0)]
    )
    assert engine.rolling_average(sensor.id, window, START).mean == 30.0
    assert engine.rolling_average(sensor.id, window, START).sample_count == 1
    report = _probe(engine, registry, sensor, 20.5)
    assert report.triggered is False  # 20.5 < mean(30)

    # the right edge is open: a sample at now itself is not part of the baseline
    clock, registry, engine, sensor = _engine_with_history([(START - US, 50.0)])
    registry.set_status(sensor.id, NumericState(99.0, "ppm"), actor="device")  # lands at START
    average = engine.rolling_average(sensor.id, window, START)
    assert average.sample_count == 1 and average.mean == 50.0

    # trigger evaluation anchors at the event: the triggering sample is excluded
    # from its own baseline, samples up to one microsecond before it count
    clock, registry, engine, sensor = _engine_with_history([(START - US, 50.0)])
    report = _probe(engine, registry, sensor, 50.5)
    assert report.triggered is True  # baseline mean is 50, not (50 + 50.5) / 2
    assert [c.outcome for c in report.per_condition] == [ConditionOutcome.TRUE]

    # empty window: the condition is unavailable and blocks firing
    clock, registry, engine, sensor = _engine_with_history(
        [(START - window - timedelta(days=2), 10.0)]
    )
    assert engine.rolling_average(sensor.id, window, START) is None
    report = _probe(engine, registry, sensor, 20.5)
    assert report.triggered is False
    assert [c.outcome for c in report.per_condition] == [ConditionOutcome.UNAVAILABLE]


# -- criterion 5 --------------------------------------------------------------


@pytest.mark.acceptance(
    num=5,
    title="every privileged endpoint rejects password-only sessions, zero exceptions",
)
def test_password_only_sessions_rejected_everywhere(hub, clock):
    with TestClient(create_app(hub)) as client:
        token = login(client, clock)
        hub.guard.downgrade_session(token, reason="acceptance sweep")

        manifest = privileged_routes(client.app)
        assert len(manifest) >= 15
        exceptions = []
        for method, path in manifest:
            concrete = (
                path.replace("{entity_id}", "ent-1")
                .replace("{location_id}", "loc-1")
                .replace("{rule_id}", "rule-1")
                .replace("{panel_id}", "panel-1")
            )
            resp = client.request(
                method, concrete, json={}, headers={"X-Session-Token": token}
            )
            if resp.status_code != 403 or "mfa_incomplete" not in resp.json()["reasons"]:
                exceptions.append((method, path, resp.status_code))
        assert exceptions == []


# -- criterion 6 --------------------------------------------------------------


@pytest.mark.acceptance(
    num=6,
    title="1,000 req/s flood held to 20/s (±1) per window; legitimate heating commands succeed 100%",
)
def test_flood_is_throttled_while_legit_heating_commands_succeed(hub, clock):
    legit_headers = {"X-Forwarded-For": "198.51.100.7"}
    flood_source = "203.0.113.9"
    with TestClient(create_app(hub)) as client:
        token = login(client, clock, headers=legit_headers)
        heater = hub.registry.register_entity("living heater", EntityKind.HEATER)

        per_window = []
        legit_results = []
        for window in range(12):
            allowed = 0
            for _ in range(1000):
                clock.advance(timedelta(milliseconds=1))
                meta = RequestMeta(
                    source=flood_source,
                    method="POST",
                    path="/api/entities/ent-1/state",
                    query="",
                    body='{"value": 35.0}',
                    session_token=None,
                    privileged=False,
                    fingerprint=None,
                )
                if hub.guard.filter_request(meta).allowed:
                    allowed += 1
            per_window.append(allowed)
            resp = client.post(
                f"/api/entities/{heater.id}/state",
                json={"value": 21.0 + window, "unit": "C"},
                headers={"X-Session-Token": token, **legit_headers},
            )
            legit_results.append(resp.status_code)

        # window 0 spends the 40-token burst plus the 20/s refill
        assert 59 <= per_window[0] <= 61
        for allowed in per_window[1:]:
            assert abs(allowed - 20) <= 1
        assert legit_results == [200] * 12, "legitimate client must keep 100% success"

        state, _ = hub.registry.get_status(heater.id)
        assert state.value.value == 32.0  # last command landed
        assert hub.guard.filter_counts["rate_limited"] >= 11_000


# -- criterion 7 --------------------------------------------------------------


@pytest.mark.acceptance(
    num=7,
    title="10,000-record log matches a linear-scan oracle for queries, export round-trip, and purge",
)
def test_log_matches_linear_scan_oracle_at_scale():
    rng = random.Random(0x10C5)
    log = EventLog(MemoryLogStore())
    base = START - timedelta(days=30)
    entity_pool = [None] + [f"ent-{i}" for i in range(1, 21)]
    types = list(EventType)

    oracle: list[EventRecord] = []
    for i in range(10_000):
        ts = base + timedelta(seconds=rng.uniform(0.0, 30 * 86400.0))
        event_type = rng.choice(types)
        entity_id = rng.choice(entity_pool)
        actor = f"actor-{rng.randrange(5)}"
        details = {"i": str(i)}
        if rng.random() < 0.02:
            details[INVESTIGATION_HOLD_KEY] = INVESTIGATION_HOLD_OPEN
        seq = log.append(
            ts=ts, event_type=event_type, actor=actor, entity_id=entity_id, details=details
        )
        oracle.append(
            EventRecord(
                seq=seq,
                ts=ts,
                event_type=event_type,
                entity_id=entity_id,
                actor=actor,
                details=dict(details),
            )
        )

    # every randomized (period, filter) query equals the linear scan
    for _ in range(200):
        a = base + timedelta(seconds=rng.uniform(-86400.0, 31 * 86400.0))
        b = a + timedelta(seconds=rng.uniform(0.0, 12 * 86400.0))
        event_type = rng.choice([None] + types)
        entity_id = rng.choice([None, "ent-3", "ent-7", "ent-404"])
        got = log.query(a, b, event_type=event_type, entity_id=entity_id)
        want = [
            r
            for r in oracle
            if a <= r.ts < b
            and (event_type is None or r.event_type is event_type)
            and (entity_id is None or r.entity_id == entity_id)
        ]
        assert got == want

    # export -> import round trip is record-identical
    data = log.export(base - timedelta(days=1), START + timedelta(days=1), fmt="lines")
    assert EventLog.records_from_lines(data) == log.all_records() == oracle

    # purge counts match brute force and held records survive
    log.set_retention(timedelta(days=10), actor="admin", now=START)
    audit = log.all_records()[-1]  # the retention change itself is logged
    assert audit.event_type is EventType.CONFIG_CHANGE
    cutoff = START - timedelta(days=10)
    doomed = [r for r in oracle if r.ts < cutoff and not r.held]
    survivors = [r for r in oracle if r.ts >= cutoff or r.held] + [audit]
    assert log.purge(START) == len(doomed)
    assert log.all_records() == survivors
    assert any(r.held for r in survivors)


# -- criterion 8 --------------------------------------------------------------


def _random_offset_tz(rng) -> timezone:
    return timezone(timedelta(minutes=rng.randrange(-14 * 60, 14 * 60 + 1)))


def _random_ts(rng) -> datetime:
    return datetime(
        2024,
        rng.randrange(1, 13),
        rng.randrange(1, 29),
        rng.randrange(24),
        rng.randrange(60),
        rng.randrange(60),
        rng.randrange(1_000_000),
        tzinfo=_random_offset_tz(rng),
    )


@pytest.mark.acceptance(
    num=8,
    title="wire round-trip identity for 10,000 payloads across all three protocols; malformed payloads never mutate state",
)
def test_wire_round_trip_identity_and_malformed_rejection():
    rng = random.Random(0xBEEF)
    units = ["", "C", "ppm", "%", "lx", "m/s", "µg/m³"]

    for _ in range(5000):
        roll = rng.random()
        if roll < 0.25:
            value = rng.random() < 0.5
        elif roll < 0.5:
            value = float(rng.randrange(-10_000, 10_000))
        else:
            value = rng.uniform(-1e6, 1e6)
        reading = Reading(value=value, unit=rng.choice(units), ts=_random_ts(rng))
        payload = serialize_reading(reading)
        back = parse_reading(payload)
        assert back == reading
        assert serialize_reading(back) == payload  # byte-stable

    names = ["set", "toggle", "light.set", "heater.set", "lock"]
    for _ in range(5000):
        params = {}
        if rng.random() < 0.7:
            params["intensity"] = rng.randrange(0, 101)
        if rng.random() < 0.4:
            params["color"] = [rng.randrange(256) for _ in range(3)]
        if rng.random() < 0.3:
            params["note"] = "".join(rng.choice("abc xyz-") for _ in range(rng.randrange(0, 12)))
        command = Command(name=rng.choice(names), params=params)
        payload = serialize_command(command)
        back = parse_command(payload)
        assert back == command
        assert serialize_command(back) == payload

    # the same frames flow through all three protocol bindings unchanged
    clock = ManualClock(START)
    hub = Hub(config=make_config(), clock=clock)
    room = hub.registry.add_location("room", map_point=(0.5, 0.5))
    bindings = []
    for protocol, address_fn in (
        (Protocol.MQTT, lambda name: mqtt_state_topic("room", name)),
        (Protocol.COAP, lambda name: coap_path("room", name)),
        (Protocol.HTTP, http_ingest_path),
    ):
        name = f"temp-{protocol.value}"
        entity = hub.registry.register_entity(name, EntityKind.TEMPERATURE, location_id=room.id)
        address = address_fn(name)
        hub.gateway.bind(
            DeviceEndpoint(
                entity_id=entity.id,
                protocol=protocol,
                direction=Direction.INBOUND,
                address=address,
            )
        )
        bindings.append((protocol, address, entity))

    last_value = {}
    for i in range(900):
        protocol, address, entity = bindings[i % 3]
        clock.advance(timedelta(seconds=1))
        value = round(rng.uniform(-20.0, 40.0), 3)
        payload = serialize_reading(Reading(value=value, unit="C", ts=clock.now()))
        assert hub.gateway.ingest(protocol, address, payload) is True
        last_value[entity.id] = value
    for protocol, _, entity in bindings:
        state, _ = hub.registry.get_status(entity.id)
        assert state.value.value == last_value[entity.id]
        assert state.updated_by == f"device:{protocol.value}"

    # malformed corpus: none of these may change any entity's state
    snapshot_before = {
        e.id: hub.registry.get_status(e.id) for e in hub.registry.list_entities()
    }
    good_ts = clock.now().isoformat()
    mqtt_addr = bindings[0][1]
    corpus = [
        b"",
        b"not json",
        b"[1, 2, 3]",
        b'"just a string"',
        b'{"value": "warm", "unit": "C", "ts": "%s"}' % good_ts.encode(),
        b'{"value": NaN, "unit": "C", "ts": "%s"}' % good_ts.encode(),
        b'{"value": Infinity, "unit": "C", "ts": "%s"}' % good_ts.encode(),
        b'{"value": 1.0, "unit": 7, "ts": "%s"}' % good_ts.encode(),
        b'{"value": 1.0, "unit": "C"}',
        b'{"value": 1.0, "unit": "C", "ts": "yesterday"}',
        b'{"value": 1.0, "unit": "C", "ts": "2024-05-01T08:00:00"}',
        b'{"value": 1.0, "unit": "C", "ts": "%s", "extra": 1}' % good_ts.encode(),
        b'{"unit": "C", "ts": "%s"}' % good_ts.encode(),
        b'{"value": 1.0, "unit": "C", "ts": "%s"}'
        % (clock.now() + timedelta(minutes=5, seconds=1)).isoformat().encode(),
        b'{"value": 1.0, "unit": "C", "ts": "' + good_ts.encode() + b'", "pad": "'
        + b"x" * 5000
        + b'"}',
    ]
    rejected = 0
    for payload in corpus:
        accepted = hub.gateway.ingest(Protocol.MQTT, mqtt_addr, payload)
        assert accepted is False
        rejected += 1
    # unknown endpoint with a perfectly valid payload
    valid = serialize_reading(Reading(value=1.0, unit="C", ts=clock.now()))
    assert hub.gateway.ingest(Protocol.MQTT, "home/room/state/ghost", valid) is False
    rejected += 1

    snapshot_after = {
        e.id: hub.registry.get_status(e.id) for e in hub.registry.list_entities()
    }
    assert snapshot_after == snapshot_before, "malformed payloads must never mutate state"
    assert sum(hub.gateway.reject_counts.values()) == rejected
