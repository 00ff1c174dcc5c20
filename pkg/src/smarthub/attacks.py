"""Attack-scenario harness: replayable intrusions against a fresh hub.

Each scenario walks a forward-only staged intrusion chain against a hub
built with a manual clock, so runs are deterministic for a given seed. A
scenario is defeated when its matching defense fired and the exploitation
stage was never reached. Flipping the defense off in the security config
must make the same scenario succeed; run_negative_control does exactly
that, one flag per scenario.
"""

from __future__ import annotations

import json
import random
import time
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from importlib import resources

from .clock import ManualClock
from .config import HubConfig
from .errors import AuthError, ValidationError
from .eventlog import EventType
from .hub import Hub
from .registry import BooleanState, NumericState
from .security import RequestMeta

HANDLER_CAPACITY_PER_SEC = 100
SCENARIO_START = datetime(2024, 3, 1, 8, 0, tzinfo=timezone.utc)

STAGE_TARGET_DETECTION = "target_detection"
STAGE_PREPARATION = "preparation"
STAGE_MALWARE_ACQUISITION = "malware_acquisition"
STAGE_DEPLOYMENT = "deployment"
STAGE_ATTACK = "attack"
STAGE_DETECTION = "detection"
STAGE_PREVAIL = "prevail"
STAGE_EXPLOITATION = "exploitation"


def load_stage_data() -> dict:
    raw = resources.files("smarthub").joinpath("data/attack_stages.json").read_text("utf-8")
    return json.loads(raw)


def scenario_kinds() -> list[str]:
    return list(load_stage_data()["scenarios"])


class StageTracker:
    """Forward-only progress through the intrusion chain."""

    def __init__(self, stages: list[str]):
        self._order = {stage: i for i, stage in enumerate(stages)}
        self.total = len(stages)
        self.reached: list[str] = []

    def advance(self, stage: str) -> None:
        if stage not in self._order:
            raise ValidationError(f"unknown stage: {stage!r}")
        if self.reached and self._order[stage] <= self._order[self.reached[-1]]:
            raise ValidationError(
                f"stage {stage!r} does not advance past {self.reached[-1]!r}"
            )
        self.reached.append(stage)

    def has(self, stage: str) -> bool:
        return stage in self.reached


@dataclass(frozen=True)
class ScenarioOutcome:
    kind: str
    surface: str
    defeated: bool
    stages_reached: tuple[str, ...]
    stages_total: int
    prevention_fired: bool
    prevention_kind: str
    expected_prevention: str
    detail: tuple[str, ...]
    elapsed_seconds: float


NEGATIVE_CONTROLS = {
    "physical_door": {"facial_recognition_enabled": False},
    "social_engineering_co": {"threshold_alerts_enabled": False},
    "ddos_heating": {"waf_enabled": False},
    "ransomware_motion": {"reactivation_gate_enabled": False},
    "mitm_devices": {"mfa_required": False},
}

OWNER_ID = "owner"
OWNER_PASSWORD = "Quiet-Meadow-117!"
OWNER_TOTP_SECRET = "JBSWY3DPEHPK3PXP"


def _fresh_hub(config: HubConfig | None) -> tuple[Hub, ManualClock]:
    clock = ManualClock(SCENARIO_START)
    hub = Hub(config=config if config is not None else HubConfig(), clock=clock)
    return hub, clock


def _owner_session(hub: Hub, clock: ManualClock, fingerprint: str = "fp-owner-laptop") -> str:
    from .security import totp_code

    hub.guard.add_user(OWNER_ID, OWNER_PASSWORD, totp_secret=OWNER_TOTP_SECRET, role="user")
    outcome = hub.guard.authenticate(OWNER_ID, OWNER_PASSWORD, fingerprint=fingerprint)
    if outcome.status == "challenge":
        code = totp_code(OWNER_TOTP_SECRET, clock.now(),
                         step_seconds=hub.config.security.totp_step_seconds)
        outcome = hub.guard.verify_mfa(outcome.challenge_id, code)
    assert outcome.status == "ok", outcome
    return outcome.session_token


# -- scenarios ------------------------------------------------------------------


def _run_physical_door(hub: Hub, clock: ManualClock, tracker: StageTracker,
                       rng: random.Random, detail: list[str]) -> tuple[bool, str]:
    entry = hub.registry.add_location("entry", map_point=(0.5, 0.1))
    door = hub.registry.register_entity("front-door", "door", location_id=entry.id)
    hub.guard.recognizer.enroll("resident", "entry-token-resident")

    tracker.advance(STAGE_TARGET_DETECTION)
    detail.append("intruder cases the house and finds the smart entry door")
    tracker.advance(STAGE_PREPARATION)
    tracker.advance(STAGE_MALWARE_ACQUISITION)
    detail.append("intruder brings pry tools and a spoofed entry badge")
    tracker.advance(STAGE_DEPLOYMENT)

    tracker.advance(STAGE_ATTACK)
    clock.advance(timedelta(seconds=5))
    first = hub.guard.verify_entry(door.id, "entry-token-forged")
    denied = not first.allowed
    if denied:
        tracker.advance(STAGE_DETECTION)
        detail.append(f"entry denied ({first.reason}); denial is on the record")
        tracker.advance(STAGE_PREVAIL)
        clock.advance(timedelta(seconds=30))
        second = hub.guard.verify_entry(door.id, "entry-token-forged-2")
        if second.allowed:
            denied = False
        else:
            detail.append("second forged token denied as well; door never opened")
    if not denied:
        hub.registry.set_status(door.id, BooleanState(value=True), actor="intruder")
        tracker.advance(STAGE_EXPLOITATION)
        detail.append("door opened for an unverified visitor; intruder inside")
    prevention_fired = any(
        r.details.get("check") == "entry_denied"
        for r in hub.log.all_records()
        if r.event_type is EventType.SECURITY
    )
    return prevention_fired, "entry_control"


def _run_social_engineering_co(hub: Hub, clock: ManualClock, tracker: StageTracker,
                               rng: random.Random, detail: list[str]) -> tuple[bool, str]:
    kitchen = hub.registry.add_location("kitchen", map_point=(0.3, 0.4))
    co = hub.registry.register_entity("kitchen-co", "co", location_id=kitchen.id)
    stove = hub.registry.register_entity("stove", "heater", location_id=kitchen.id)

    tracker.advance(STAGE_TARGET_DETECTION)
    tracker.advance(STAGE_PREPARATION)
    detail.append("occupant phished with a fake service call")
    tracker.advance(STAGE_MALWARE_ACQUISITION)
    tracker.advance(STAGE_DEPLOYMENT)
    detail.append("occupant tricked into granting remote stove access")

    tracker.advance(STAGE_ATTACK)
    hub.registry.set_status(stove.id, NumericState(value=9.0, unit="level"), actor="remote:stove")

    dangerous_ppm = 400.0
    level = 20.0
    peak = level
    responded_at: int | None = None
    for minute in range(30):
        clock.advance(timedelta(minutes=1))
        if responded_at is None:
            level += 15.0
        else:
            level = max(0.0, level * 0.7)
        hub.registry.set_status(co.id, NumericState(value=level, unit="ppm"), actor="sensor:co")
        peak = max(peak, level)
        alerted = any(a.kind == "co_threshold" for a in hub.guard.alerts_sent)
        if alerted and responded_at is None and not tracker.has(STAGE_DETECTION):
            tracker.advance(STAGE_DETECTION)
            detail.append(
                f"threshold alert at minute {minute} reached user, "
                f"{hub.config.security.designated_contact}, and system_manager"
            )
        if tracker.has(STAGE_DETECTION) and responded_at is None and minute >= 3:
            responded_at = minute
            hub.registry.set_status(stove.id, NumericState(value=0.0, unit="level"), actor=OWNER_ID)
            detail.append(f"stove shut off at minute {minute} after the alert")
        if responded_at is not None and minute == responded_at + 2 and not tracker.has(STAGE_PREVAIL):
            tracker.advance(STAGE_PREVAIL)
            hub.registry.set_status(stove.id, NumericState(value=9.0, unit="level"), actor="remote:stove")
            hub.registry.set_status(stove.id, NumericState(value=0.0, unit="level"), actor=OWNER_ID)
            detail.append("attacker re-raised the stove; occupant, already alerted, cut it again")

    if peak >= dangerous_ppm:
        tracker.advance(STAGE_EXPLOITATION)
        detail.append(f"CO peaked at {peak:.0f} ppm with nobody notified")
    else:
        detail.append(f"CO peaked at {peak:.0f} ppm, below the dangerous {dangerous_ppm:.0f} ppm")
    prevention_fired = any(a.kind == "co_threshold" for a in hub.guard.alerts_sent)
    return prevention_fired, "threshold_alerts"


def _run_ddos_heating(hub: Hub, clock: ManualClock, tracker: StageTracker,
                      rng: random.Random, detail: list[str]) -> tuple[bool, str]:
    living = hub.registry.add_location("living-room", map_point=(0.6, 0.6))
    heater = hub.registry.register_entity("main-heater", "heater", location_id=living.id)
    token = _owner_session(hub, clock)

    tracker.advance(STAGE_TARGET_DETECTION)
    tracker.advance(STAGE_PREPARATION)
    tracker.advance(STAGE_MALWARE_ACQUISITION)
    detail.append("botnet of two sources aimed at the hub API")
    tracker.advance(STAGE_DEPLOYMENT)
    tracker.advance(STAGE_ATTACK)

    sources = ("198.51.100.7", "198.51.100.8")
    flood_per_source = 100
    legit_ok = 0
    legit_dropped = 0
    seconds = 10
    for second in range(seconds):
        # arrival order within the second is seed-shuffled
        arrivals: list[tuple[str, bool]] = [("legit", True)]
        for src in sources:
            arrivals.extend((src, False) for _ in range(flood_per_source))
        rng.shuffle(arrivals)
        capacity = HANDLER_CAPACITY_PER_SEC
        for src, is_legit in arrivals:
            if is_legit:
                meta = RequestMeta(
                    source="192.168.1.10", method="POST",
                    path=f"/api/entities/{heater.id}/state",
                    body='{"value": 21.5}', session_token=token, privileged=True,
                )
            else:
                meta = RequestMeta(source=src, method="GET", path="/api/entities")
            decision = hub.guard.filter_request(meta)
            if not decision.allowed:
                continue
            if capacity <= 0:
                if is_legit:
                    legit_dropped += 1
                continue
            capacity -= 1
            if is_legit:
                hub.registry.set_status(
                    heater.id, NumericState(value=21.5, unit="C"), actor=OWNER_ID
                )
                legit_ok += 1
        if second == 0 and hub.guard.filter_counts.get("rate_limited", 0) > 50:
            tracker.advance(STAGE_DETECTION)
            hub.guard.raise_security_alert(
                "traffic_flood",
                f"{hub.guard.filter_counts['rate_limited']} requests throttled in one second",
            )
            detail.append("flood throttled and flagged within the first second")
        if second == 1 and tracker.has(STAGE_DETECTION):
            tracker.advance(STAGE_PREVAIL)
            detail.append("flood kept coming; throttle held for the remaining seconds")
        clock.advance(timedelta(seconds=1))

    detail.append(f"heater commands: {legit_ok} ok, {legit_dropped} dropped of {seconds}")
    if legit_dropped > 0:
        tracker.advance(STAGE_EXPLOITATION)
        detail.append("heating control was disrupted by the flood")
    prevention_fired = hub.guard.filter_counts.get("rate_limited", 0) > 0
    return prevention_fired, "request_filter"


def _run_ransomware_motion(hub: Hub, clock: ManualClock, tracker: StageTracker,
                           rng: random.Random, detail: list[str]) -> tuple[bool, str]:
    hall = hub.registry.add_location("hallway", map_point=(0.5, 0.5))
    sensors = [
        hub.registry.register_entity(f"motion-{i}", "motion", location_id=hall.id)
        for i in range(1, 4)
    ]
    token = _owner_session(hub, clock)

    tracker.advance(STAGE_TARGET_DETECTION)
    tracker.advance(STAGE_PREPARATION)
    tracker.advance(STAGE_MALWARE_ACQUISITION)
    detail.append("ransomware kit targets the motion sensor integration")
    tracker.advance(STAGE_DEPLOYMENT)

    tracker.advance(STAGE_ATTACK)
    clock.advance(timedelta(minutes=1))
    for sensor in sensors:
        hub.registry.set_enabled(sensor.id, False, actor="malware:integration", reason="ransom")
    detail.append("all motion sensors shut off; ransom note delivered")

    knocked_out = [
        r for r in hub.log.all_records()
        if r.event_type is EventType.SECURITY
        and r.details.get("action") == "sensor_disabled"
        and r.actor.startswith("malware")
    ]
    if knocked_out:
        tracker.advance(STAGE_DETECTION)
        hub.guard.raise_security_alert(
            "sensors_disabled", f"{len(knocked_out)} motion sensors shut off unexpectedly"
        )
        detail.append("sensor shutdown spotted in the record; owner alerted")

    gate_on = hub.config.security.reactivation_gate_enabled
    clock.advance(timedelta(minutes=5))
    for sensor in sensors:
        hub.guard.reactivate_sensor(token, sensor.id, OWNER_PASSWORD)
    detail.append("owner reactivated every sensor with a password proof" if gate_on
                  else "owner reactivated every sensor (gate off, no proof needed)")

    tracker.advance(STAGE_PREVAIL)
    if gate_on:
        # compromised integration is revoked after detection; the malware
        # falls back to guessing its way into the owner account
        guesses = ["password", "123456", "letmein", "ransom2024", "hunter2", "qwerty"]
        rejected = 0
        for guess in guesses:
            clock.advance(timedelta(seconds=10))
            outcome = hub.guard.authenticate(OWNER_ID, guess)
            if outcome.status in ("rejected", "locked"):
                rejected += 1
        detail.append(f"{rejected} password guesses rejected; account locked down")
    else:
        # nothing gates the sensor switch, so the malware just flips
        # everything back off and keeps it that way
        for sensor in sensors:
            hub.registry.set_enabled(sensor.id, False, actor="malware:integration", reason="ransom")
        detail.append("malware re-disabled the sensors; no proof required to hold them")

    still_off = [s.id for s in sensors if not hub.registry.get_entity(s.id).enabled]
    if still_off:
        tracker.advance(STAGE_EXPLOITATION)
        detail.append(f"{len(still_off)} sensors still off; ransom leverage holds")
    else:
        detail.append("all sensors back on without paying")
    prevention_fired = gate_on and not still_off
    return prevention_fired, "reactivation_gate"


def _run_mitm_devices(hub: Hub, clock: ManualClock, tracker: StageTracker,
                      rng: random.Random, detail: list[str]) -> tuple[bool, str]:
    entry = hub.registry.add_location("entry", map_point=(0.5, 0.1))
    lock = hub.registry.register_entity("door-lock", "lock", location_id=entry.id)
    hub.registry.set_status(lock.id, BooleanState(value=True), actor=OWNER_ID)
    token = _owner_session(hub, clock, fingerprint="fp-owner-laptop")

    tracker.advance(STAGE_TARGET_DETECTION)
    tracker.advance(STAGE_PREPARATION)
    detail.append("attacker wedges into the home network path")
    tracker.advance(STAGE_MALWARE_ACQUISITION)
    tracker.advance(STAGE_DEPLOYMENT)
    detail.append("owner session token captured in transit")

    tracker.advance(STAGE_ATTACK)
    clock.advance(timedelta(seconds=30))

    def attacker_command() -> bool:
        meta = RequestMeta(
            source="192.168.1.66", method="POST",
            path=f"/api/entities/{lock.id}/state", body='{"value": false}',
            session_token=token, privileged=True, fingerprint="fp-attacker-box",
        )
        decision = hub.guard.filter_request(meta)
        if decision.allowed:
            hub.registry.set_status(lock.id, BooleanState(value=False), actor="attacker")
            return True
        detail.append(f"forged command blocked: {','.join(decision.reasons)}")
        return False

    succeeded = attacker_command()
    downgraded = any(
        r.details.get("check") == "link_fingerprint_changed"
        for r in hub.log.all_records()
        if r.event_type is EventType.SECURITY
    )
    if downgraded:
        tracker.advance(STAGE_DETECTION)
        detail.append("link fingerprint change spotted; session lost its second factor")
    if not succeeded:
        tracker.advance(STAGE_PREVAIL)
        clock.advance(timedelta(seconds=30))
        succeeded = attacker_command()

    if succeeded:
        tracker.advance(STAGE_EXPLOITATION)
        detail.append("attacker unlocked the door with the stolen session")
    else:
        from .security import totp_code

        code = totp_code(OWNER_TOTP_SECRET, clock.now(),
                         step_seconds=hub.config.security.totp_step_seconds)
        restored = hub.guard.step_up(token, code)
        state, _ = hub.registry.get_status(lock.id)
        detail.append(
            f"owner re-proved the second factor ({'ok' if restored else 'failed'}); "
            f"lock stayed {'locked' if state.value.value else 'unlocked'}"
        )
    prevention_fired = downgraded and not succeeded
    return prevention_fired, "session_integrity"


_RUNNERS = {
    "physical_door": _run_physical_door,
    "social_engineering_co": _run_social_engineering_co,
    "ddos_heating": _run_ddos_heating,
    "ransomware_motion": _run_ransomware_motion,
    "mitm_devices": _run_mitm_devices,
}


def run_scenario(kind: str, seed: int = 0, config: HubConfig | None = None) -> ScenarioOutcome:
    data = load_stage_data()
    if kind not in data["scenarios"]:
        raise ValidationError(f"unknown scenario {kind!r}, expected one of {sorted(data['scenarios'])}")
    meta = data["scenarios"][kind]
    started = time.perf_counter()
    hub, clock = _fresh_hub(config)
    tracker = StageTracker(data["stages"])
    rng = random.Random(seed)
    detail: list[str] = []
    prevention_fired, prevention_kind = _RUNNERS[kind](hub, clock, tracker, rng, detail)
    elapsed = time.perf_counter() - started
    defeated = (
        not tracker.has(STAGE_EXPLOITATION)
        and prevention_fired
        and prevention_kind == meta["expected_prevention"]
    )
    return ScenarioOutcome(
        kind=kind,
        surface=meta["surface"],
        defeated=defeated,
        stages_reached=tuple(tracker.reached),
        stages_total=tracker.total,
        prevention_fired=prevention_fired,
        prevention_kind=prevention_kind,
        expected_prevention=meta["expected_prevention"],
        detail=tuple(detail),
        elapsed_seconds=elapsed,
    )


def run_negative_control(kind: str, seed: int = 0) -> ScenarioOutcome:
    """Same scenario with its one matching defense switched off."""
    overrides = NEGATIVE_CONTROLS[kind]
    config = HubConfig().with_security(**overrides)
    return run_scenario(kind, seed=seed, config=config)


def run_all(seed: int = 0, config: HubConfig | None = None) -> list[ScenarioOutcome]:
    return [run_scenario(kind, seed=seed, config=config) for kind in scenario_kinds()]


def format_report(outcomes: list[ScenarioOutcome], style: str = "table") -> str:
    if style == "lines":
        lines = []
        for o in outcomes:
            lines.append(
                f"scenario={o.kind} defeated={'yes' if o.defeated else 'no'} "
                f"prevention={o.prevention_kind} fired={'yes' if o.prevention_fired else 'no'} "
                f"stages={len(o.stages_reached)}/{o.stages_total}"
            )
        return "\n".join(lines)
    if style != "table":
        raise ValidationError(f"unknown report style: {style!r}")
    headers = ("scenario", "surface", "prevention", "stages", "defeated")
    rows = [
        (
            o.kind,
            o.surface,
            o.prevention_kind,
            f"{len(o.stages_reached)}/{o.stages_total}",
            "yes" if o.defeated else "NO",
        )
        for o in outcomes
    ]
    widths = [max(len(h), *(len(r[i]) for r in rows)) for i, h in enumerate(headers)]
    out = ["  ".join(h.ljust(widths[i]) for i, h in enumerate(headers))]
    out.append("  ".join("-" * w for w in widths))
    for row in rows:
        out.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)))
    return "\n".join(out)
