"""Device transports, wire codecs, endpoint bindings, and simulated devices.

Everything device-facing funnels through DeviceGateway.ingest, which
enforces the payload size cap, the clock-skew bound, and wire-schema
validation before any value reaches the registry. Transports are ports;
the in-memory implementations here are enough for tests and simulation,
and a real broker client can be slotted in without touching the gateway.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from enum import Enum
from typing import Callable, Union

from .clock import Clock, SystemClock
from .errors import ConfigurationError, NotFoundError, ValidationError
from .eventlog import EventLog, EventType
from .registry import (
    BOOLEAN_KINDS,
    LIGHT_KINDS,
    BooleanState,
    EntityRegistry,
    LightState,
    NumericState,
)

MAX_PAYLOAD_BYTES = 4096
MAX_CLOCK_SKEW = timedelta(minutes=5)


class Protocol(Enum):
    MQTT = "mqtt"
    COAP = "coap"
    HTTP = "http"


class Direction(Enum):
    INBOUND = "inbound"
    OUTBOUND = "outbound"


@dataclass(frozen=True)
class DeviceEndpoint:
    entity_id: str
    protocol: Protocol
    direction: Direction
    address: str


def mqtt_state_topic(location_name: str, entity_name: str) -> str:
    return f"home/{location_name}/{entity_name}/state"


def mqtt_command_topic(location_name: str, entity_name: str) -> str:
    return f"home/{location_name}/{entity_name}/cmd"


def coap_path(location_name: str, entity_name: str) -> str:
    return f"/home/{location_name}/{entity_name}"


def http_ingest_path(entity_name: str) -> str:
    return f"/ingest/{entity_name}"


# -- wire schemas -------------------------------------------------------------


@dataclass(frozen=True)
class Reading:
    value: float | bool
    unit: str
    ts: datetime


@dataclass(frozen=True)
class Command:
    name: str
    params: dict = field(default_factory=dict)


def serialize_reading(reading: Reading) -> bytes:
    doc = {
        "value": reading.value,
        "unit": reading.unit,
        "ts": reading.ts.isoformat(),
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode("utf-8")


def parse_reading(payload: bytes) -> Reading:
    try:
        doc = json.loads(payload.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ValidationError(f"unparseable reading payload: {exc}") from exc
    if not isinstance(doc, dict):
        raise ValidationError("reading payload must be a JSON object")
    problems = []
    value = doc.get("value")
    # bool is an int subclass; check it first so flags stay flags
    if not isinstance(value, (bool, int, float)):
        problems.append("value must be a number or boolean")
    elif isinstance(value, float) and not math.isfinite(value):
        problems.append("value must be finite")
    unit = doc.get("unit", "")
    if not isinstance(unit, str):
        problems.append("unit must be a string")
    ts_raw = doc.get("ts")
    ts = None
    if not isinstance(ts_raw, str):
        problems.append("ts must be an ISO 8601 string")
    else:
        try:
            ts = datetime.fromisoformat(ts_raw)
        except ValueError:
            problems.append(f"ts is not ISO 8601: {ts_raw!r}")
        else:
            if ts.tzinfo is None:
                problems.append("ts must carry a UTC offset")
    extra = set(doc) - {"value", "unit", "ts"}
    if extra:
        problems.append(f"unexpected fields: {sorted(extra)}")
    if problems:
        raise ValidationError("invalid reading", problems=problems)
    if not isinstance(value, bool):
        value = float(value)
    return Reading(value=value, unit=unit, ts=ts)


def serialize_command(command: Command) -> bytes:
    doc = {"name": command.name, "params": command.params}
    return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode("utf-8")


def parse_command(payload: bytes) -> Command:
    try:
        doc = json.loads(payload.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ValidationError(f"unparseable command payload: {exc}") from exc
    if not isinstance(doc, dict):
        raise ValidationError("command payload must be a JSON object")
    name = doc.get("name")
    params = doc.get("params", {})
    problems = []
    if not isinstance(name, str) or not name:
        problems.append("name must be a non-empty string")
    if not isinstance(params, dict):
        problems.append("params must be an object")
    extra = set(doc) - {"name", "params"}
    if extra:
        problems.append(f"unexpected fields: {sorted(extra)}")
    if problems:
        raise ValidationError("invalid command", problems=problems)
    return Command(name=name, params=params)


# -- transports -----------------------------------------------------------------

MessageHandler = Callable[[str, bytes], None]


class InMemoryTransport:
    """Loopback message bus used by tests and the simulator.

    Keeps a full publish record so assertions can inspect outbound traffic.
    """

    def __init__(self) -> None:
        self.published: list[tuple[str, bytes]] = []
        self._handlers: dict[str, list[MessageHandler]] = {}

    def publish(self, address: str, payload: bytes) -> None:
        self.published.append((address, payload))
        for handler in self._handlers.get(address, []):
            handler(address, payload)

    def subscribe(self, address: str, handler: MessageHandler) -> None:
        self._handlers.setdefault(address, []).append(handler)


# -- the gateway ------------------------------------------------------------------


class DeviceGateway:
    """Binds entities to transport addresses and polices inbound payloads."""

    def __init__(
        self,
        registry: EntityRegistry,
        event_log: EventLog | None = None,
        clock: Clock | None = None,
        transports: dict[Protocol, InMemoryTransport] | None = None,
    ):
        self._registry = registry
        self._log = event_log
        self._clock = clock if clock is not None else SystemClock()
        self._transports = transports if transports is not None else {p: InMemoryTransport() for p in Protocol}
        self._inbound: dict[tuple[Protocol, str], DeviceEndpoint] = {}
        self._by_entity: dict[tuple[str, Direction], DeviceEndpoint] = {}
        self.reject_counts: dict[str, int] = {}

    def transport(self, protocol: Protocol) -> InMemoryTransport:
        return self._transports[protocol]

    def bind(self, endpoint: DeviceEndpoint) -> None:
        key = (endpoint.entity_id, endpoint.direction)
        self._registry.get_entity(endpoint.entity_id)
        if key in self._by_entity:
            raise ValidationError(
                f"entity {endpoint.entity_id!r} already has an {endpoint.direction.value} endpoint"
            )
        if endpoint.direction is Direction.INBOUND:
            addr_key = (endpoint.protocol, endpoint.address)
            if addr_key in self._inbound:
                raise ValidationError(
                    f"address {endpoint.address!r} already bound on {endpoint.protocol.value}"
                )
            self._inbound[addr_key] = endpoint
            self._transports[endpoint.protocol].subscribe(
                endpoint.address,
                lambda address, payload: self.ingest(endpoint.protocol, address, payload),
            )
        self._by_entity[key] = endpoint

    def endpoints(self) -> list[DeviceEndpoint]:
        return list(self._by_entity.values())

    def _reject(self, reason: str, protocol: Protocol, address: str, detail: str = "") -> None:
        self.reject_counts[reason] = self.reject_counts.get(reason, 0) + 1
        if self._log is not None:
            details = {"reject": reason, "protocol": protocol.value, "address": address}
            if detail:
                details["detail"] = detail
            self._log.append(
                ts=self._clock.now(),
                event_type=EventType.SECURITY,
                actor="gateway",
                details=details,
            )

    def ingest(self, protocol: Protocol, address: str, payload: bytes, source: str = "device") -> bool:
        """Validate one inbound payload and commit it. Returns False on reject."""
        if len(payload) > MAX_PAYLOAD_BYTES:
            self._reject("oversize_payload", protocol, address, f"{len(payload)} bytes")
            return False
        endpoint = self._inbound.get((protocol, address))
        if endpoint is None:
            self._reject("unknown_endpoint", protocol, address)
            return False
        try:
            reading = parse_reading(payload)
        except ValidationError as exc:
            self._reject("malformed_payload", protocol, address, str(exc))
            return False
        now = self._clock.now()
        if reading.ts > now + MAX_CLOCK_SKEW:
            self._reject(
                "clock_skew", protocol, address,
                f"reading ts {reading.ts.isoformat()} is past the +5 minute bound",
            )
            return False
        try:
            entity = self._registry.get_entity(endpoint.entity_id)
        except NotFoundError:
            self._reject("unknown_endpoint", protocol, address, "entity removed")
            return False
        if not entity.enabled:
            # stopped sensors report nothing until someone reactivates them
            self._reject("entity_disabled", protocol, address, entity.id)
            return False
        value = self._coerce(entity.kind, reading)
        self._registry.set_status(entity.id, value, actor=f"{source}:{protocol.value}")
        return True

    @staticmethod
    def _coerce(kind, reading: Reading) -> Union[BooleanState, NumericState, LightState]:
        if kind in BOOLEAN_KINDS:
            raw = reading.value if isinstance(reading.value, bool) else float(reading.value) >= 0.5
            return BooleanState(value=raw)
        if kind in LIGHT_KINDS:
            if isinstance(reading.value, bool):
                return LightState(on=reading.value, intensity=100 if reading.value else 0)
            level = max(0, min(100, int(round(float(reading.value)))))
            return LightState(on=level > 0, intensity=level)
        raw = 1.0 if reading.value is True else 0.0 if reading.value is False else float(reading.value)
        return NumericState(value=raw, unit=reading.unit)

    def publish_command(self, entity_id: str, command: Command) -> None:
        endpoint = self._by_entity.get((entity_id, Direction.OUTBOUND))
        if endpoint is None:
            raise ConfigurationError(f"entity {entity_id!r} has no outbound endpoint")
        self._transports[endpoint.protocol].publish(endpoint.address, serialize_command(command))


# -- simulated devices --------------------------------------------------------------

WAVEFORMS = ("constant", "ramp", "sine", "random_walk")


@dataclass(frozen=True)
class Anomaly:
    offset_seconds: float
    value: float


@dataclass(frozen=True)
class SimProfile:
    entity_id: str
    waveform: str = "constant"
    base: float = 0.0
    amplitude: float = 1.0
    period_seconds: float = 3600.0
    interval_seconds: float = 60.0
    noise: float = 0.0
    unit: str = ""
    anomalies: tuple[Anomaly, ...] = ()


@dataclass(frozen=True)
class SimReport:
    samples_fed: int
    samples_rejected: int
    per_entity: dict


def generate_samples(
    profile: SimProfile, duration_seconds: float, seed: int, profile_index: int
) -> list[tuple[float, float]]:
    """(offset_seconds, value) pairs for one profile; pure function of its inputs.

    Each profile gets its own RNG stream keyed by (seed, index) so adding a
    profile never disturbs the others.
    """
    if profile.waveform not in WAVEFORMS:
        raise ValidationError(f"unknown waveform {profile.waveform!r}, expected one of {WAVEFORMS}")
    if profile.interval_seconds <= 0:
        raise ValidationError("interval_seconds must be positive")
    rng = random.Random(f"{seed}:{profile_index}")
    anomaly_at = {a.offset_seconds: a.value for a in profile.anomalies}
    samples: list[tuple[float, float]] = []
    walk = profile.base
    t = 0.0
    while t < duration_seconds:
        if profile.waveform == "constant":
            value = profile.base
        elif profile.waveform == "ramp":
            value = profile.base + profile.amplitude * (t / profile.period_seconds)
        elif profile.waveform == "sine":
            value = profile.base + profile.amplitude * math.sin(2 * math.pi * t / profile.period_seconds)
        else:
            walk += rng.uniform(-profile.amplitude, profile.amplitude)
            value = walk
        if profile.noise > 0:
            value += rng.uniform(-profile.noise, profile.noise)
        if t in anomaly_at:
            value = anomaly_at[t]
        samples.append((t, value))
        t += profile.interval_seconds
    # anomalies that fall between grid points become extra samples at their
    # exact offsets
    for offset, value in sorted(anomaly_at.items()):
        if offset < duration_seconds and not any(s[0] == offset for s in samples):
            samples.append((offset, value))
    samples.sort(key=lambda s: s[0])
    return samples


def run_simulation(
    gateway: DeviceGateway,
    registry: EntityRegistry,
    profiles: list[SimProfile],
    duration_seconds: float,
    seed: int,
    start_ts: datetime | None = None,
) -> SimReport:
    """Feed generated readings through the gateway's validation path.

    Samples from all profiles are merged in (timestamp, profile index) order;
    the run is fully deterministic for a given seed. When the gateway clock is
    adjustable it is advanced alongside the generated timestamps so the skew
    bound sees consistent time.
    """
    clock = gateway._clock
    if start_ts is None:
        start_ts = clock.now()
    if start_ts.tzinfo is None:
        start_ts = start_ts.replace(tzinfo=timezone.utc)

    merged: list[tuple[float, int, SimProfile, float]] = []
    for index, profile in enumerate(profiles):
        for offset, value in generate_samples(profile, duration_seconds, seed, index):
            merged.append((offset, index, profile, value))
    merged.sort(key=lambda item: (item[0], item[1]))

    fed = 0
    rejected = 0
    per_entity: dict[str, int] = {}
    for offset, _index, profile, value in merged:
        ts = start_ts + timedelta(seconds=offset)
        if hasattr(clock, "set") and ts > clock.now():
            clock.set(ts)
        entity = registry.get_entity(profile.entity_id)
        wire_value: float | bool = value
        if entity.kind in BOOLEAN_KINDS:
            wire_value = value >= 0.5
        endpoint = next(
            (e for e in gateway.endpoints()
             if e.entity_id == profile.entity_id and e.direction is Direction.INBOUND),
            None,
        )
        if endpoint is None:
            raise ConfigurationError(f"entity {profile.entity_id!r} has no inbound endpoint to simulate")
        payload = serialize_reading(Reading(value=wire_value, unit=profile.unit, ts=ts))
        if gateway.ingest(endpoint.protocol, endpoint.address, payload, source="sim"):
            fed += 1
            per_entity[profile.entity_id] = per_entity.get(profile.entity_id, 0) + 1
        else:
            rejected += 1
    return SimReport(samples_fed=fed, samples_rejected=rejected, per_entity=per_entity)


def profile_from_dict(doc: dict) -> SimProfile:
    anomalies = tuple(
        Anomaly(offset_seconds=float(a["offset_seconds"]), value=float(a["value"]))
        for a in doc.get("anomalies", [])
    )
    return SimProfile(
        entity_id=doc["entity_id"],
        waveform=doc.get("waveform", "constant"),
        base=float(doc.get("base", 0.0)),
        amplitude=float(doc.get("amplitude", 1.0)),
        period_seconds=float(doc.get("period_seconds", 3600.0)),
        interval_seconds=float(doc.get("interval_seconds", 60.0)),
        noise=float(doc.get("noise", 0.0)),
        unit=doc.get("unit", ""),
        anomalies=anomalies,
    )
