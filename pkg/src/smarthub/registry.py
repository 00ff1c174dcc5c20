"""Catalog of entities, their live typed state, and named locations.

State writes are type-checked against the entity kind, committed under a
single commit lock (giving a total commit order), logged, and then handed to
registered change listeners. Everything returned to callers is an immutable
snapshot safe to pass between threads.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field, replace
from datetime import datetime, timedelta
from enum import Enum
from typing import Callable, Union

from .clock import Clock, SystemClock
from .config import DEFAULT_LOCATION_RETENTION_DAYS, MapBounds
from .errors import NotFoundError, RangeError, TypeMismatchError, ValidationError
from .eventlog import EventLog, EventType


class EntityKind(Enum):
    MOTION = "motion"
    DOOR = "door"
    LIGHT = "light"
    TEMPERATURE = "temperature"
    HUMIDITY = "humidity"
    CO = "co"
    SMOKE = "smoke"
    BUTTON = "button"
    HEATER = "heater"
    LOCK = "lock"


# Which state variant each kind carries. Heater holds its numeric setpoint,
# lock holds a locked/unlocked boolean.
BOOLEAN_KINDS = {EntityKind.MOTION, EntityKind.DOOR, EntityKind.BUTTON, EntityKind.LOCK}
NUMERIC_KINDS = {
    EntityKind.TEMPERATURE,
    EntityKind.HUMIDITY,
    EntityKind.CO,
    EntityKind.SMOKE,
    EntityKind.HEATER,
}
LIGHT_KINDS = {EntityKind.LIGHT}


@dataclass(frozen=True)
class BooleanState:
    value: bool


@dataclass(frozen=True)
class NumericState:
    value: float
    unit: str = ""


@dataclass(frozen=True)
class LightState:
    on: bool
    intensity: int
    color: tuple[int, int, int]

    def __post_init__(self) -> None:
        if not 0 <= self.intensity <= 100:
            raise RangeError(f"light intensity {self.intensity} outside 0..100")
        for channel in self.color:
            if not 0 <= channel <= 255:
                raise RangeError(f"color channel {channel} outside 0..255")


StateValue = Union[BooleanState, NumericState, LightState]


@dataclass(frozen=True)
class EntityState:
    value: StateValue
    updated_at: datetime
    updated_by: str


@dataclass(frozen=True)
class Entity:
    id: str
    name: str
    kind: EntityKind
    location_id: str | None = None
    attributes: dict[str, str] = field(default_factory=dict)
    enabled: bool = True


@dataclass(frozen=True)
class Location:
    id: str
    name: str
    latitude: float
    longitude: float
    sharing_enabled: bool
    created_at: datetime
    retention: timedelta


@dataclass(frozen=True)
class StateChange:
    """One committed state write, as emitted to listeners and the log."""

    entity_id: str
    old: EntityState | None
    new: EntityState
    actor: str
    ts: datetime
    cascade_depth: int = 0


@dataclass(frozen=True)
class Sample:
    """One point of an entity's committed history (scalar form)."""

    ts: datetime
    value: float | bool


def variant_for_kind(kind: EntityKind) -> type:
    if kind in BOOLEAN_KINDS:
        return BooleanState
    if kind in NUMERIC_KINDS:
        return NumericState
    return LightState


def scalar_of(value: StateValue) -> float | bool:
    if isinstance(value, BooleanState):
        return value.value
    if isinstance(value, NumericState):
        return value.value
    return value.on


class HistoryView:
    """Immutable prefix view over an entity's append-only sample list."""

    __slots__ = ("_samples", "_len")

    def __init__(self, samples: list[Sample], length: int):
        self._samples = samples
        self._len = length

    def __len__(self) -> int:
        return self._len

    def __iter__(self):
        for i in range(self._len):
            yield self._samples[i]

    def in_window(self, start: datetime, end: datetime) -> list[Sample]:
        """Samples with start <= ts < end."""
        return [s for s in self if start <= s.ts < end]


class RegistrySnapshot:
    """Consistent read view handed to the automation engine.

    Captures entity records, current states, history prefixes and the
    location-sharing flags at one commit point.
    """

    def __init__(
        self,
        entities: dict[str, Entity],
        states: dict[str, EntityState],
        histories: dict[str, HistoryView],
        sharing: dict[str, bool],
    ):
        self._entities = entities
        self._states = states
        self._histories = histories
        self._sharing = sharing

    def entity(self, entity_id: str) -> Entity | None:
        return self._entities.get(entity_id)

    def state(self, entity_id: str) -> EntityState | None:
        return self._states.get(entity_id)

    def history(self, entity_id: str) -> HistoryView:
        return self._histories.get(entity_id, HistoryView([], 0))

    def location_sharing(self, entity_id: str) -> bool | None:
        """Sharing flag of the entity's location, None when unlocated."""
        entity = self._entities.get(entity_id)
        if entity is None or entity.location_id is None:
            return None
        return self._sharing.get(entity.location_id)

    def overlay(self, change: StateChange) -> "RegistrySnapshot":
        """A new snapshot with ``change`` applied hypothetically.

        Used by the dry-run path so evaluation sees exactly the snapshot a
        real commit would have produced.
        """
        states = dict(self._states)
        states[change.entity_id] = change.new
        histories = dict(self._histories)
        base = histories.get(change.entity_id, HistoryView([], 0))
        samples = list(base) + [Sample(ts=change.new.updated_at, value=scalar_of(change.new.value))]
        histories[change.entity_id] = HistoryView(samples, len(samples))
        return RegistrySnapshot(self._entities, states, histories, self._sharing)


ChangeListener = Callable[[StateChange], None]


class EntityRegistry:
    def __init__(
        self,
        clock: Clock | None = None,
        event_log: EventLog | None = None,
        map_bounds: MapBounds | None = None,
        default_location_retention: timedelta | None = None,
    ):
        self._clock = clock if clock is not None else SystemClock()
        self._log = event_log
        self._map_bounds = map_bounds if map_bounds is not None else MapBounds()
        self._default_retention = (
            default_location_retention
            if default_location_retention is not None
            else timedelta(days=DEFAULT_LOCATION_RETENTION_DAYS)
        )
        self._commit_lock = threading.RLock()
        self._entities: dict[str, Entity] = {}
        self._states: dict[str, EntityState] = {}
        self._histories: dict[str, list[Sample]] = {}
        self._locations: dict[str, Location] = {}
        self._listeners: list[ChangeListener] = []
        self._entity_counter = 0
        self._location_counter = 0

    def add_listener(self, listener: ChangeListener) -> None:
        self._listeners.append(listener)

    # -- entities ----------------------------------------------------------

    def register_entity(
        self,
        name: str,
        kind: EntityKind | str,
        location_id: str | None = None,
        attributes: dict[str, str] | None = None,
    ) -> Entity:
        if not name or not name.strip():
            raise ValidationError("entity name must be non-empty")
        if isinstance(kind, str):
            try:
                kind = EntityKind(kind)
            except ValueError:
                raise ValidationError(f"unknown entity kind: {kind!r}") from None
        with self._commit_lock:
            if location_id is not None and location_id not in self._locations:
                raise NotFoundError(f"unknown location: {location_id}")
            for other in self._entities.values():
                if other.name == name and other.location_id == location_id:
                    raise ValidationError(
                        f"entity named {name!r} already exists in this location"
                    )
            self._entity_counter += 1
            entity = Entity(
                id=f"ent-{self._entity_counter}",
                name=name,
                kind=kind,
                location_id=location_id,
                attributes=dict(attributes or {}),
            )
            self._entities[entity.id] = entity
            self._histories[entity.id] = []
            default = self._default_state(kind)
            if default is not None:
                now = self._clock.now()
                self._states[entity.id] = EntityState(
                    value=default, updated_at=now, updated_by="system"
                )
            return entity

    @staticmethod
    def _default_state(kind: EntityKind) -> StateValue | None:
        # Inert defaults; numeric entities stay stateless until a first reading.
        if kind in BOOLEAN_KINDS:
            return BooleanState(value=False)
        if kind in LIGHT_KINDS:
            return LightState(on=False, intensity=0, color=(255, 255, 255))
        return None

    def get_entity(self, entity_id: str) -> Entity:
        entity = self._entities.get(entity_id)
        if entity is None:
            raise NotFoundError(f"unknown entity: {entity_id}")
        return entity

    def find_by_name(self, name: str) -> Entity | None:
        for entity in self._entities.values():
            if entity.name == name:
                return entity
        return None

    def list_entities(self) -> list[Entity]:
        with self._commit_lock:
            return list(self._entities.values())

    def get_status(self, entity_id: str) -> tuple[EntityState | None, dict[str, str]]:
        """Last committed state plus the attribute map. Never mutates."""
        entity = self.get_entity(entity_id)
        return self._states.get(entity_id), dict(entity.attributes)

    def set_status(
        self,
        entity_id: str,
        value: StateValue,
        actor: str,
        cascade_depth: int = 0,
    ) -> StateChange:
        if not actor:
            raise ValidationError("state writes must carry an actor")
        with self._commit_lock:
            entity = self.get_entity(entity_id)
            expected = variant_for_kind(entity.kind)
            if not isinstance(value, expected):
                raise TypeMismatchError(
                    f"entity {entity.name!r} ({entity.kind.value}) takes "
                    f"{expected.__name__}, got {type(value).__name__}"
                )
            old = self._states.get(entity_id)
            ts = self._clock.now()
            if old is not None and ts <= old.updated_at:
                # Keep updated_at strictly increasing per entity even under
                # a frozen test clock.
                ts = old.updated_at + timedelta(microseconds=1)
            new_state = EntityState(value=value, updated_at=ts, updated_by=actor)
            self._states[entity_id] = new_state
            self._histories[entity_id].append(Sample(ts=ts, value=scalar_of(value)))
            change = StateChange(
                entity_id=entity_id,
                old=old,
                new=new_state,
                actor=actor,
                ts=ts,
                cascade_depth=cascade_depth,
            )
            self._log_change(entity, change)
            for listener in self._listeners:
                listener(change)
            return change

    def _log_change(self, entity: Entity, change: StateChange) -> None:
        if self._log is None:
            return
        value = change.new.value
        if entity.kind is EntityKind.MOTION and isinstance(value, BooleanState) and value.value:
            event_type = EventType.MOTION_DETECTED
        else:
            event_type = EventType.STATE_CHANGE
        self._log.append(
            ts=change.ts,
            event_type=event_type,
            actor=change.actor,
            entity_id=entity.id,
            details={"value": _describe(value)},
        )

    def set_light(
        self,
        entity_id: str,
        intensity: int,
        color: tuple[int, int, int],
        actor: str,
        cascade_depth: int = 0,
    ) -> StateChange:
        """Set a light's intensity and color. Intensity 0 means off."""
        entity = self.get_entity(entity_id)
        if entity.kind is not EntityKind.LIGHT:
            raise TypeMismatchError(f"entity {entity.name!r} is not a light")
        value = LightState(on=intensity > 0, intensity=intensity, color=tuple(color))
        return self.set_status(entity_id, value, actor, cascade_depth=cascade_depth)

    def set_enabled(self, entity_id: str, enabled: bool, actor: str, reason: str = "") -> Entity:
        """Enable or disable an entity (e.g. a sensor knocked out by an attack)."""
        with self._commit_lock:
            entity = self.get_entity(entity_id)
            updated = replace(entity, enabled=enabled)
            self._entities[entity_id] = updated
            if self._log is not None:
                self._log.append(
                    ts=self._clock.now(),
                    event_type=EventType.SECURITY,
                    actor=actor,
                    entity_id=entity_id,
                    details={
                        "action": "sensor_enabled" if enabled else "sensor_disabled",
                        "reason": reason,
                    },
                )
            return updated

    # -- locations ---------------------------------------------------------

    def add_location(
        self,
        name: str,
        latitude: float | None = None,
        longitude: float | None = None,
        map_point: tuple[float, float] | None = None,
        retention: timedelta | None = None,
    ) -> Location:
        """Create a location from explicit coordinates or a map point.

        A map point (x, y) in [0, 1] x [0, 1] is interpolated linearly over
        the configured map bounding box and stored as plain lat/lon.
        """
        if not name or not name.strip():
            raise ValidationError("location name must be non-empty")
        if map_point is not None:
            x, y = map_point
            if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
                raise RangeError(f"map point ({x}, {y}) outside the map bounds")
            b = self._map_bounds
            latitude = b.lat_min + y * (b.lat_max - b.lat_min)
            longitude = b.lon_min + x * (b.lon_max - b.lon_min)
        if latitude is None or longitude is None:
            raise ValidationError("either explicit coordinates or a map point is required")
        if not -90.0 <= latitude <= 90.0:
            raise RangeError(f"latitude {latitude} outside -90..90")
        if not -180.0 <= longitude <= 180.0:
            raise RangeError(f"longitude {longitude} outside -180..180")
        with self._commit_lock:
            self._location_counter += 1
            location = Location(
                id=f"loc-{self._location_counter}",
                name=name,
                latitude=latitude,
                longitude=longitude,
                sharing_enabled=True,
                created_at=self._clock.now(),
                retention=retention if retention is not None else self._default_retention,
            )
            self._locations[location.id] = location
            return location

    def get_location(self, location_id: str) -> Location:
        location = self._locations.get(location_id)
        if location is None:
            raise NotFoundError(f"unknown location: {location_id}")
        return location

    def list_locations(self) -> list[Location]:
        with self._commit_lock:
            return list(self._locations.values())

    def set_location_sharing(self, location_id: str, enabled: bool) -> Location:
        with self._commit_lock:
            location = self.get_location(location_id)
            updated = replace(location, sharing_enabled=enabled)
            self._locations[location_id] = updated
            return updated

    def delete_location(self, location_id: str) -> None:
        with self._commit_lock:
            self.get_location(location_id)
            del self._locations[location_id]
            self._detach_entities(location_id)

    def purge_expired_locations(self, now: datetime) -> int:
        """Remove locations past their retention; entities keep a null location."""
        with self._commit_lock:
            expired = [
                loc.id for loc in self._locations.values() if loc.created_at + loc.retention < now
            ]
            for location_id in expired:
                del self._locations[location_id]
                self._detach_entities(location_id)
            return len(expired)

    def _detach_entities(self, location_id: str) -> None:
        for entity_id, entity in list(self._entities.items()):
            if entity.location_id == location_id:
                self._entities[entity_id] = replace(entity, location_id=None)

    # -- snapshots ---------------------------------------------------------

    def snapshot(self) -> RegistrySnapshot:
        with self._commit_lock:
            return RegistrySnapshot(
                entities=dict(self._entities),
                states=dict(self._states),
                histories={
                    eid: HistoryView(samples, len(samples))
                    for eid, samples in self._histories.items()
                },
                sharing={loc.id: loc.sharing_enabled for loc in self._locations.values()},
            )


def _describe(value: StateValue) -> str:
    if isinstance(value, BooleanState):
        return "true" if value.value else "false"
    if isinstance(value, NumericState):
        return f"{value.value}{' ' + value.unit if value.unit else ''}"
    r, g, b = value.color
    return f"{'on' if value.on else 'off'} intensity={value.intensity} color=#{r:02x}{g:02x}{b:02x}"
