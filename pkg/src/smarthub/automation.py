"""Trigger / condition / action automation with a dry-run tester.

A rule fires in three steps: an event triggers it, its conditions are
examined against an immutable registry snapshot, and if all of them hold its
actions are dispatched in order. Condition evaluation is three-valued
(true / false / unavailable); any unavailable condition blocks firing and is
reported distinctly.

Evaluation is a pure function of (rule, change, snapshot): time windows are
anchored at the triggering change's timestamp, so the triggering sample
never counts toward its own baseline and dry runs reproduce live outcomes
exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from datetime import datetime, time, timedelta
from enum import Enum
from typing import Callable, Union

from .clock import Clock, SystemClock
from .errors import NotFoundError, TypeMismatchError, ValidationError
from .eventlog import EventLog, EventType
from .registry import (
    BOOLEAN_KINDS,
    NUMERIC_KINDS,
    EntityKind,
    EntityRegistry,
    EntityState,
    RegistrySnapshot,
    StateChange,
    StateValue,
    scalar_of,
    variant_for_kind,
)

RULE_SCHEMA = "hub.rule.v1"
CASCADE_DEPTH_LIMIT = 8
DEFAULT_ROLLING_WINDOW = timedelta(days=3)
DEFAULT_BASELINE_DAYS = 7
COMPARE_OPS = ("<", "<=", "=", ">=", ">")
NOTIFY_ROLES = ("user", "designated_contact", "system_manager")


class ConditionOutcome(Enum):
    TRUE = "true"
    FALSE = "false"
    UNAVAILABLE = "unavailable"


# -- triggers ---------------------------------------------------------------


@dataclass(frozen=True)
class StateChangeTrigger:
    """Matches a committed state change, optionally filtered by value.

    Matchers compare against the scalar form of the state (bool for
    boolean/light entities, number for numeric ones); None matches anything.
    """

    entity_id: str
    to_value: float | bool | None = None
    from_value: float | bool | None = None


@dataclass(frozen=True)
class ButtonPressTrigger:
    entity_id: str


Trigger = Union[StateChangeTrigger, ButtonPressTrigger]


def trigger_matches(trigger: Trigger, change: StateChange) -> bool:
    if isinstance(trigger, ButtonPressTrigger):
        return change.entity_id == trigger.entity_id and scalar_of(change.new.value) is True
    if change.entity_id != trigger.entity_id:
        return False
    if trigger.to_value is not None and scalar_of(change.new.value) != trigger.to_value:
        return False
    if trigger.from_value is not None:
        if change.old is None or scalar_of(change.old.value) != trigger.from_value:
            return False
    return True


# -- conditions ---------------------------------------------------------------


@dataclass(frozen=True)
class AboveRollingAverage:
    """Current reading strictly above the trailing-window mean plus margin."""

    entity_id: str
    window: timedelta = DEFAULT_ROLLING_WINDOW
    margin: float = 0.0


@dataclass(frozen=True)
class BelowAverageAtTime:
    """Current reading strictly below the mean of readings that fell inside
    the same time-of-day window over the previous baseline days.

    A window with start > end wraps past midnight.
    """

    entity_id: str
    window_start: time
    window_end: time
    baseline_days: int = DEFAULT_BASELINE_DAYS


@dataclass(frozen=True)
class NumericCompare:
    entity_id: str
    op: str
    threshold: float


@dataclass(frozen=True)
class BooleanIs:
    entity_id: str
    value: bool


Condition = Union[AboveRollingAverage, BelowAverageAtTime, NumericCompare, BooleanIs]


# -- actions ------------------------------------------------------------------


@dataclass(frozen=True)
class CallService:
    service_name: str
    entity_id: str
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Notify:
    recipient_role: str
    message_template: str


Action = Union[CallService, Notify]


@dataclass(frozen=True)
class AutomationRule:
    id: str
    name: str
    trigger: Trigger
    conditions: tuple[Condition, ...]
    actions: tuple[Action, ...]
    enabled: bool = True
    version: int = 1


@dataclass(frozen=True)
class ConditionReport:
    index: int
    outcome: ConditionOutcome


@dataclass(frozen=True)
class TriggerReport:
    rule_id: str
    triggered: bool
    per_condition: tuple[ConditionReport, ...]
    actions_that_would_fire: tuple[Action, ...]
    evaluated_at: datetime
    reason: str = ""


@dataclass(frozen=True)
class FiredAction:
    rule_id: str
    action: Action
    ok: bool
    error: str = ""


@dataclass(frozen=True)
class RollingAverage:
    mean: float
    sample_count: int


# -- pure evaluation ----------------------------------------------------------


def rolling_mean(snapshot: RegistrySnapshot, entity_id: str, window: timedelta, now: datetime) -> RollingAverage | None:
    """Arithmetic mean of samples with now - window <= ts < now.

    None when the window holds no samples.
    """
    samples = snapshot.history(entity_id).in_window(now - window, now)
    if not samples:
        return None
    total = 0.0
    for sample in samples:
        total += float(sample.value)
    return RollingAverage(mean=total / len(samples), sample_count=len(samples))


def _time_of_day_in_window(value: time, start: time, end: time) -> bool:
    if start <= end:
        return start <= value < end
    return value >= start or value < end


def _time_of_day_mean(
    snapshot: RegistrySnapshot,
    entity_id: str,
    start: time,
    end: time,
    baseline_days: int,
    now: datetime,
) -> RollingAverage | None:
    window_samples = snapshot.history(entity_id).in_window(
        now - timedelta(days=baseline_days), now
    )
    picked = [s for s in window_samples if _time_of_day_in_window(s.ts.timetz().replace(tzinfo=None), start, end)]
    if not picked:
        return None
    total = sum(float(s.value) for s in picked)
    return RollingAverage(mean=total / len(picked), sample_count=len(picked))


def evaluate_condition(
    condition: Condition, snapshot: RegistrySnapshot, anchor: datetime
) -> ConditionOutcome:
    # Privacy gate: an entity whose location stopped sharing contributes no
    # data to automation; the outcome is explicitly "unavailable".
    if snapshot.location_sharing(condition.entity_id) is False:
        return ConditionOutcome.UNAVAILABLE

    state = snapshot.state(condition.entity_id)
    if state is None:
        return ConditionOutcome.UNAVAILABLE
    current = scalar_of(state.value)

    if isinstance(condition, AboveRollingAverage):
        average = rolling_mean(snapshot, condition.entity_id, condition.window, anchor)
        if average is None:
            return ConditionOutcome.UNAVAILABLE
        above = float(current) > average.mean + condition.margin
        return ConditionOutcome.TRUE if above else ConditionOutcome.FALSE

    if isinstance(condition, BelowAverageAtTime):
        average = _time_of_day_mean(
            snapshot,
            condition.entity_id,
            condition.window_start,
            condition.window_end,
            condition.baseline_days,
            anchor,
        )
        if average is None:
            return ConditionOutcome.UNAVAILABLE
        return ConditionOutcome.TRUE if float(current) < average.mean else ConditionOutcome.FALSE

    if isinstance(condition, NumericCompare):
        value = float(current)
        t = condition.threshold
        result = {
            "<": value < t,
            "<=": value <= t,
            "=": value == t,
            ">=": value >= t,
            ">": value > t,
        }[condition.op]
        return ConditionOutcome.TRUE if result else ConditionOutcome.FALSE

    if isinstance(condition, BooleanIs):
        return ConditionOutcome.TRUE if bool(current) == condition.value else ConditionOutcome.FALSE

    raise TypeError(f"unknown condition type: {type(condition).__name__}")


def evaluate_rule(
    rule: AutomationRule,
    change: StateChange,
    snapshot: RegistrySnapshot,
    evaluated_at: datetime,
) -> TriggerReport:
    """Pure rule evaluation; both the live path and dry runs come through here."""
    if not rule.enabled:
        return TriggerReport(
            rule_id=rule.id,
            triggered=False,
            per_condition=(),
            actions_that_would_fire=(),
            evaluated_at=evaluated_at,
            reason="disabled",
        )
    if not trigger_matches(rule.trigger, change):
        return TriggerReport(
            rule_id=rule.id,
            triggered=False,
            per_condition=(),
            actions_that_would_fire=(),
            evaluated_at=evaluated_at,
            reason="trigger_mismatch",
        )
    anchor = change.new.updated_at
    reports = tuple(
        ConditionReport(index=i, outcome=evaluate_condition(c, snapshot, anchor))
        for i, c in enumerate(rule.conditions)
    )
    triggered = all(r.outcome is ConditionOutcome.TRUE for r in reports)
    return TriggerReport(
        rule_id=rule.id,
        triggered=triggered,
        per_condition=reports,
        actions_that_would_fire=rule.actions if triggered else (),
        evaluated_at=evaluated_at,
    )


# -- the engine ---------------------------------------------------------------


ServiceHandler = Callable[[str, dict, str, int], None]


class ServiceRegistry:
    """Named services an action can call: handler(entity_id, params, actor, depth)."""

    def __init__(self) -> None:
        self._services: dict[str, ServiceHandler] = {}

    def register(self, name: str, handler: ServiceHandler) -> None:
        self._services[name] = handler

    def has(self, name: str) -> bool:
        return name in self._services

    def call(self, name: str, entity_id: str, params: dict, actor: str, depth: int) -> None:
        handler = self._services.get(name)
        if handler is None:
            raise NotFoundError(f"unknown service: {name}")
        handler(entity_id, params, actor, depth)

    def names(self) -> list[str]:
        return sorted(self._services)


NotifySink = Callable[[str, str], None]


class AutomationEngine:
    def __init__(
        self,
        registry: EntityRegistry,
        services: ServiceRegistry,
        event_log: EventLog | None = None,
        clock: Clock | None = None,
        notify_sink: NotifySink | None = None,
    ):
        self._registry = registry
        self._services = services
        self._log = event_log
        self._clock = clock if clock is not None else SystemClock()
        self._notify = notify_sink
        self._rules: dict[str, AutomationRule] = {}
        self._rule_counter = 0
        # observation hook: receives every TriggerReport the live path produces
        self.report_listener: Callable[[TriggerReport], None] | None = None

    # -- rule CRUD -----------------------------------------------------------

    def save_rule(self, rule: AutomationRule) -> str:
        """Validate and persist a rule. Edits replace the whole rule and
        bump its version; every dangling reference is reported at once."""
        problems = self._validate(rule)
        if problems:
            raise ValidationError(f"rule {rule.name!r} failed validation", problems=problems)
        if rule.id and rule.id in self._rules:
            stored = replace(rule, version=self._rules[rule.id].version + 1)
        else:
            self._rule_counter += 1
            rule_id = rule.id if rule.id else f"rule-{self._rule_counter}"
            stored = replace(rule, id=rule_id, version=1)
        self._rules[stored.id] = stored
        if self._log is not None:
            self._log.append(
                ts=self._clock.now(),
                event_type=EventType.CONFIG_CHANGE,
                actor="system",
                details={"change": "rule_saved", "rule_id": stored.id, "version": str(stored.version)},
            )
        return stored.id

    def _validate(self, rule: AutomationRule) -> list[str]:
        problems: list[str] = []
        if not rule.actions:
            problems.append("rule must have at least one action")

        def check_entity(entity_id: str, where: str, kinds: set[EntityKind] | None = None) -> None:
            try:
                entity = self._registry.get_entity(entity_id)
            except NotFoundError:
                problems.append(f"{where}: unknown entity {entity_id!r}")
                return
            if kinds is not None and entity.kind not in kinds:
                allowed = ", ".join(sorted(k.value for k in kinds))
                problems.append(
                    f"{where}: entity {entity_id!r} is {entity.kind.value}, needs one of: {allowed}"
                )

        trigger = rule.trigger
        if isinstance(trigger, ButtonPressTrigger):
            check_entity(trigger.entity_id, "trigger", {EntityKind.BUTTON})
        else:
            check_entity(trigger.entity_id, "trigger")

        for i, condition in enumerate(rule.conditions):
            where = f"condition[{i}]"
            if isinstance(condition, (AboveRollingAverage, BelowAverageAtTime, NumericCompare)):
                check_entity(condition.entity_id, where, NUMERIC_KINDS)
            else:
                check_entity(condition.entity_id, where, BOOLEAN_KINDS)
            if isinstance(condition, AboveRollingAverage) and condition.margin < 0:
                problems.append(f"{where}: margin must be >= 0")
            if isinstance(condition, BelowAverageAtTime) and condition.baseline_days < 1:
                problems.append(f"{where}: baseline_days must be >= 1")
            if isinstance(condition, NumericCompare) and condition.op not in COMPARE_OPS:
                problems.append(f"{where}: unknown comparison op {condition.op!r}")

        for i, action in enumerate(rule.actions):
            where = f"action[{i}]"
            if isinstance(action, CallService):
                if not self._services.has(action.service_name):
                    problems.append(f"{where}: unknown service {action.service_name!r}")
                check_entity(action.entity_id, where)
            else:
                if action.recipient_role not in NOTIFY_ROLES:
                    problems.append(f"{where}: unknown recipient role {action.recipient_role!r}")
        return problems

    def get_rule(self, rule_id: str) -> AutomationRule:
        rule = self._rules.get(rule_id)
        if rule is None:
            raise NotFoundError(f"unknown rule: {rule_id}")
        return rule

    def list_rules(self) -> list[AutomationRule]:
        return list(self._rules.values())

    def remove_rule(self, rule_id: str) -> None:
        self.get_rule(rule_id)
        del self._rules[rule_id]
        if self._log is not None:
            self._log.append(
                ts=self._clock.now(),
                event_type=EventType.CONFIG_CHANGE,
                actor="system",
                details={"change": "rule_removed", "rule_id": rule_id},
            )

    def set_rule_enabled(self, rule_id: str, enabled: bool) -> AutomationRule:
        rule = self.get_rule(rule_id)
        updated = replace(rule, enabled=enabled)
        self._rules[rule_id] = updated
        return updated

    # -- live path -------------------------------------------------------------

    def on_event(self, change: StateChange, now: datetime | None = None) -> list[FiredAction]:
        """Evaluate every rule against the commit snapshot and dispatch.

        Action failures are logged and do not abort other rules.
        """
        now = now if now is not None else self._clock.now()
        if change.cascade_depth > CASCADE_DEPTH_LIMIT:
            if self._log is not None:
                self._log.append(
                    ts=now,
                    event_type=EventType.SECURITY,
                    actor="system",
                    entity_id=change.entity_id,
                    details={
                        "error": "cascade_depth_limit",
                        "depth": str(change.cascade_depth),
                    },
                )
            return []
        snapshot = self._registry.snapshot()
        fired: list[FiredAction] = []
        for rule in self._rules.values():
            report = evaluate_rule(rule, change, snapshot, now)
            if self.report_listener is not None:
                self.report_listener(report)
            if not report.triggered:
                continue
            if self._log is not None:
                self._log.append(
                    ts=now,
                    event_type=EventType.RULE_FIRED,
                    actor="system",
                    entity_id=change.entity_id,
                    details={"rule_id": rule.id, "rule_name": rule.name},
                )
            for action in rule.actions:
                fired.append(self._dispatch(rule, action, change, now))
        return fired

    def _dispatch(
        self, rule: AutomationRule, action: Action, change: StateChange, now: datetime
    ) -> FiredAction:
        try:
            if isinstance(action, CallService):
                self._services.call(
                    action.service_name,
                    action.entity_id,
                    dict(action.params),
                    actor=f"rule:{rule.id}",
                    depth=change.cascade_depth + 1,
                )
            else:
                if self._notify is not None:
                    self._notify(action.recipient_role, action.message_template)
            return FiredAction(rule_id=rule.id, action=action, ok=True)
        except Exception as exc:  # noqa: BLE001 - one action must not kill the rest
            if self._log is not None:
                self._log.append(
                    ts=now,
                    event_type=EventType.SECURITY,
                    actor="system",
                    entity_id=change.entity_id,
                    details={"error": "action_dispatch_failed", "rule_id": rule.id, "detail": str(exc)},
                )
            return FiredAction(rule_id=rule.id, action=action, ok=False, error=str(exc))

    # -- dry run -----------------------------------------------------------------

    def make_hypothetical(self, entity_id: str, value: StateValue, actor: str = "dry_run") -> StateChange:
        """Build the StateChange a set_status would commit, without committing."""
        entity = self._registry.get_entity(entity_id)
        expected = variant_for_kind(entity.kind)
        if not isinstance(value, expected):
            raise TypeMismatchError(
                f"entity {entity.name!r} ({entity.kind.value}) takes "
                f"{expected.__name__}, got {type(value).__name__}"
            )
        old, _ = self._registry.get_status(entity_id)
        ts = self._clock.now()
        if old is not None and ts <= old.updated_at:
            ts = old.updated_at + timedelta(microseconds=1)
        new = EntityState(value=value, updated_at=ts, updated_by=actor)
        return StateChange(entity_id=entity_id, old=old, new=new, actor=actor, ts=ts)

    def dry_run(self, rule_id: str, hypothetical: StateChange, now: datetime | None = None) -> TriggerReport:
        """Evaluate exactly as on_event would, dispatching nothing.

        The only write is an audit record marked dry_run.
        """
        now = now if now is not None else self._clock.now()
        rule = self.get_rule(rule_id)
        snapshot = self._registry.snapshot().overlay(hypothetical)
        report = evaluate_rule(rule, hypothetical, snapshot, now)
        if self._log is not None:
            self._log.append(
                ts=now,
                event_type=EventType.DRY_RUN,
                actor=hypothetical.actor,
                entity_id=hypothetical.entity_id,
                details={
                    "rule_id": rule_id,
                    "triggered": "true" if report.triggered else "false",
                    "reason": report.reason,
                },
            )
        return report

    # -- aggregates ----------------------------------------------------------------

    def rolling_average(self, entity_id: str, window: timedelta, now: datetime) -> RollingAverage | None:
        """Mean of the entity's committed samples in [now - window, now)."""
        entity = self._registry.get_entity(entity_id)
        if entity.kind not in NUMERIC_KINDS:
            raise TypeMismatchError(
                f"rolling average needs a numeric entity, {entity.name!r} is {entity.kind.value}"
            )
        return rolling_mean(self._registry.snapshot(), entity_id, window, now)


# -- rule documents -------------------------------------------------------------
#
# Rules serialize to a stable JSON text form (sorted keys, two-space indent)
# so external editors can round-trip them bit-exactly.


def _trigger_to_doc(trigger: Trigger) -> dict:
    if isinstance(trigger, ButtonPressTrigger):
        return {"type": "button_press", "entity_id": trigger.entity_id}
    return {
        "type": "state_change",
        "entity_id": trigger.entity_id,
        "to_value": trigger.to_value,
        "from_value": trigger.from_value,
    }


def _condition_to_doc(condition: Condition) -> dict:
    if isinstance(condition, AboveRollingAverage):
        return {
            "type": "above_rolling_average",
            "entity_id": condition.entity_id,
            "window_seconds": condition.window.total_seconds(),
            "margin": condition.margin,
        }
    if isinstance(condition, BelowAverageAtTime):
        return {
            "type": "below_average_at_time",
            "entity_id": condition.entity_id,
            "window_start": condition.window_start.strftime("%H:%M"),
            "window_end": condition.window_end.strftime("%H:%M"),
            "baseline_days": condition.baseline_days,
        }
    if isinstance(condition, NumericCompare):
        return {
            "type": "numeric_compare",
            "entity_id": condition.entity_id,
            "op": condition.op,
            "threshold": condition.threshold,
        }
    return {"type": "boolean_is", "entity_id": condition.entity_id, "value": condition.value}


def _action_to_doc(action: Action) -> dict:
    if isinstance(action, CallService):
        return {
            "type": "call_service",
            "service_name": action.service_name,
            "entity_id": action.entity_id,
            "params": dict(action.params),
        }
    return {
        "type": "notify",
        "recipient_role": action.recipient_role,
        "message_template": action.message_template,
    }


def rule_to_document(rule: AutomationRule) -> dict:
    return {
        "schema": RULE_SCHEMA,
        "id": rule.id,
        "name": rule.name,
        "enabled": rule.enabled,
        "version": rule.version,
        "trigger": _trigger_to_doc(rule.trigger),
        "conditions": [_condition_to_doc(c) for c in rule.conditions],
        "actions": [_action_to_doc(a) for a in rule.actions],
    }


def rule_to_text(rule: AutomationRule) -> str:
    return json.dumps(rule_to_document(rule), sort_keys=True, indent=2) + "\n"


def _trigger_from_doc(doc: dict) -> Trigger:
    if doc["type"] == "button_press":
        return ButtonPressTrigger(entity_id=doc["entity_id"])
    if doc["type"] == "state_change":
        return StateChangeTrigger(
            entity_id=doc["entity_id"],
            to_value=doc.get("to_value"),
            from_value=doc.get("from_value"),
        )
    raise ValidationError(f"unknown trigger type: {doc['type']!r}")


def _condition_from_doc(doc: dict) -> Condition:
    kind = doc["type"]
    if kind == "above_rolling_average":
        return AboveRollingAverage(
            entity_id=doc["entity_id"],
            window=timedelta(seconds=float(doc.get("window_seconds", DEFAULT_ROLLING_WINDOW.total_seconds()))),
            margin=float(doc.get("margin", 0.0)),
        )
    if kind == "below_average_at_time":
        return BelowAverageAtTime(
            entity_id=doc["entity_id"],
            window_start=_parse_time(doc["window_start"]),
            window_end=_parse_time(doc["window_end"]),
            baseline_days=int(doc.get("baseline_days", DEFAULT_BASELINE_DAYS)),
        )
    if kind == "numeric_compare":
        return NumericCompare(
            entity_id=doc["entity_id"], op=doc["op"], threshold=float(doc["threshold"])
        )
    if kind == "boolean_is":
        return BooleanIs(entity_id=doc["entity_id"], value=bool(doc["value"]))
    raise ValidationError(f"unknown condition type: {kind!r}")


def _action_from_doc(doc: dict) -> Action:
    if doc["type"] == "call_service":
        return CallService(
            service_name=doc["service_name"],
            entity_id=doc["entity_id"],
            params=dict(doc.get("params", {})),
        )
    if doc["type"] == "notify":
        return Notify(
            recipient_role=doc["recipient_role"], message_template=doc["message_template"]
        )
    raise ValidationError(f"unknown action type: {doc['type']!r}")


def _parse_time(text: str) -> time:
    hour, minute = text.split(":")
    return time(hour=int(hour), minute=int(minute))


def rule_from_document(doc: dict) -> AutomationRule:
    if doc.get("schema") != RULE_SCHEMA:
        raise ValidationError(f"unknown rule schema: {doc.get('schema')!r}")
    return AutomationRule(
        id=doc.get("id", ""),
        name=doc["name"],
        trigger=_trigger_from_doc(doc["trigger"]),
        conditions=tuple(_condition_from_doc(c) for c in doc.get("conditions", [])),
        actions=tuple(_action_from_doc(a) for a in doc.get("actions", [])),
        enabled=bool(doc.get("enabled", True)),
        version=int(doc.get("version", 1)),
    )


def rule_from_text(text: str) -> AutomationRule:
    return rule_from_document(json.loads(text))
