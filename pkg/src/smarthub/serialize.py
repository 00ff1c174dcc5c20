"""JSON-shaped views of hub objects for the HTTP API and exports."""

from __future__ import annotations

from .automation import TriggerReport
from .eventlog import EventRecord
from .registry import (
    BooleanState,
    Entity,
    EntityState,
    Location,
    NumericState,
)


def state_to_doc(state: EntityState | None) -> dict | None:
    if state is None:
        return None
    value = state.value
    if isinstance(value, BooleanState):
        body = {"type": "boolean", "value": value.value}
    elif isinstance(value, NumericState):
        body = {"type": "numeric", "value": value.value, "unit": value.unit}
    else:
        body = {
            "type": "light",
            "on": value.on,
            "intensity": value.intensity,
            "color": list(value.color),
        }
    body["updated_at"] = state.updated_at.isoformat()
    body["updated_by"] = state.updated_by
    return body


def entity_to_doc(entity: Entity, state: EntityState | None) -> dict:
    return {
        "id": entity.id,
        "name": entity.name,
        "kind": entity.kind.value,
        "location_id": entity.location_id,
        "enabled": entity.enabled,
        "attributes": dict(entity.attributes),
        "state": state_to_doc(state),
    }


def location_to_doc(location: Location) -> dict:
    return {
        "id": location.id,
        "name": location.name,
        "latitude": location.latitude,
        "longitude": location.longitude,
        "sharing_enabled": location.sharing_enabled,
        "created_at": location.created_at.isoformat(),
        "retention_days": location.retention.total_seconds() / 86400.0,
    }


def record_to_doc(record: EventRecord) -> dict:
    return {
        "seq": record.seq,
        "ts": record.ts.isoformat(),
        "event_type": record.event_type.value,
        "entity_id": record.entity_id,
        "actor": record.actor,
        "details": dict(record.details),
    }


def report_to_doc(report: TriggerReport) -> dict:
    from .automation import _action_to_doc  # stable doc shape shared with rule files

    return {
        "rule_id": report.rule_id,
        "triggered": report.triggered,
        "reason": report.reason,
        "evaluated_at": report.evaluated_at.isoformat(),
        "conditions": [
            {"index": c.index, "outcome": c.outcome.value} for c in report.per_condition
        ],
        "actions_that_would_fire": [_action_to_doc(a) for a in report.actions_that_would_fire],
    }
