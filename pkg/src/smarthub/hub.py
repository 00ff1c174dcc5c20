"""Composition root: wires the registry, rule engine, guard, and gateway.

The hub owns the event pump. Registry commits enqueue their change and a
single-threaded FIFO drain feeds the rule engine and the threshold
watcher, so cascading rule activity is processed in commit order without
recursion.
"""

from __future__ import annotations

from collections import deque
from datetime import timedelta
from pathlib import Path

from .adapters import DeviceGateway
from .automation import AutomationEngine, ServiceRegistry
from .clock import Clock, SystemClock
from .config import HubConfig
from .eventlog import EventLog, EventType, FileLogStore, LogStore
from .panels import PanelStore
from .registry import (
    BooleanState,
    EntityKind,
    EntityRegistry,
    LightState,
    NumericState,
    StateChange,
)
from .security import SecurityGuard


class Hub:
    def __init__(
        self,
        config: HubConfig | None = None,
        clock: Clock | None = None,
        log_store: LogStore | None = None,
    ):
        self.config = config if config is not None else HubConfig()
        self.clock = clock if clock is not None else SystemClock()
        if log_store is None and self.config.log_path:
            log_store = FileLogStore(Path(self.config.log_path))
        self.log = EventLog(store=log_store)
        self.registry = EntityRegistry(
            clock=self.clock,
            event_log=self.log,
            map_bounds=self.config.map_bounds,
            default_location_retention=timedelta(days=self.config.location_retention_days),
        )
        self.services = ServiceRegistry()
        self.notifications: list[tuple[str, str]] = []
        self.engine = AutomationEngine(
            self.registry,
            self.services,
            event_log=self.log,
            clock=self.clock,
            notify_sink=self._notify,
        )
        self.guard = SecurityGuard(
            self.config.security,
            registry=self.registry,
            event_log=self.log,
            clock=self.clock,
        )
        self.gateway = DeviceGateway(
            self.registry, event_log=self.log, clock=self.clock
        )
        self.panels = PanelStore(self.registry, self.engine, self.log, self.clock)
        self._queue: deque[StateChange] = deque()
        self._pumping = False
        self.registry.add_listener(self._enqueue)
        self._register_services()
        for seed in self.config.seed_users:
            self.guard.add_user(
                seed.user_id, seed.password, totp_secret=seed.totp_secret, role=seed.role
            )

    # -- event pump ----------------------------------------------------------

    def _enqueue(self, change: StateChange) -> None:
        self._queue.append(change)
        if self._pumping:
            return
        self._pumping = True
        try:
            while self._queue:
                self._process(self._queue.popleft())
        finally:
            self._pumping = False

    def _process(self, change: StateChange) -> None:
        self.engine.on_event(change, now=change.ts)
        self._watch_thresholds(change)

    def _watch_thresholds(self, change: StateChange) -> None:
        entity = self.registry.get_entity(change.entity_id)
        value = change.new.value
        if not isinstance(value, NumericState):
            return
        if entity.kind is EntityKind.CO:
            self.guard.raise_threshold_alert(
                entity.id, "co_threshold", value.value,
                self.config.security.co_threshold_ppm, now=change.ts,
            )
        elif entity.kind is EntityKind.SMOKE:
            self.guard.raise_threshold_alert(
                entity.id, "smoke_threshold", value.value,
                self.config.security.smoke_threshold, now=change.ts,
            )

    def _notify(self, role: str, message: str) -> None:
        self.notifications.append((role, message))
        self.log.append(
            ts=self.clock.now(),
            event_type=EventType.ALERT,
            actor="system",
            details={"kind": "rule_notify", "severity": "info",
                     "recipients": role, "message": message},
        )

    # -- built-in services -----------------------------------------------------

    def _register_services(self) -> None:
        self.services.register("light.on", self._svc_light_on)
        self.services.register("light.off", self._svc_light_off)
        self.services.register("light.set", self._svc_light_set)
        self.services.register("heater.set", self._svc_heater_set)
        self.services.register("lock.lock", self._svc_lock)
        self.services.register("lock.unlock", self._svc_unlock)

    def _current_color(self, entity_id: str) -> tuple[int, int, int]:
        state, _ = self.registry.get_status(entity_id)
        if state is not None and isinstance(state.value, LightState):
            return state.value.color
        return (255, 255, 255)

    @staticmethod
    def _color_param(params: dict, fallback: tuple[int, int, int]) -> tuple[int, int, int]:
        raw = params.get("color")
        if raw is None:
            return fallback
        return (int(raw[0]), int(raw[1]), int(raw[2]))

    def _svc_light_on(self, entity_id: str, params: dict, actor: str, depth: int) -> None:
        intensity = int(params.get("intensity", 100))
        color = self._color_param(params, self._current_color(entity_id))
        self.registry.set_light(entity_id, intensity, color, actor, cascade_depth=depth)

    def _svc_light_off(self, entity_id: str, params: dict, actor: str, depth: int) -> None:
        self.registry.set_light(
            entity_id, 0, self._current_color(entity_id), actor, cascade_depth=depth
        )

    def _svc_light_set(self, entity_id: str, params: dict, actor: str, depth: int) -> None:
        intensity = int(params["intensity"])
        color = self._color_param(params, self._current_color(entity_id))
        self.registry.set_light(entity_id, intensity, color, actor, cascade_depth=depth)

    def _svc_heater_set(self, entity_id: str, params: dict, actor: str, depth: int) -> None:
        value = NumericState(value=float(params["setpoint"]), unit=str(params.get("unit", "C")))
        self.registry.set_status(entity_id, value, actor, cascade_depth=depth)

    def _svc_lock(self, entity_id: str, params: dict, actor: str, depth: int) -> None:
        self.registry.set_status(entity_id, BooleanState(value=True), actor, cascade_depth=depth)

    def _svc_unlock(self, entity_id: str, params: dict, actor: str, depth: int) -> None:
        self.registry.set_status(entity_id, BooleanState(value=False), actor, cascade_depth=depth)
