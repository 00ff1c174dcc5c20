"""Custom dashboard panels: named widget grids over registry entities.

A panel is layout plus references; the data endpoint resolves each widget
to the entity's current state, and aggregate widgets to a trailing mean.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timedelta

from .automation import AutomationEngine
from .clock import Clock
from .errors import NotFoundError, ValidationError
from .eventlog import EventLog, EventType
from .registry import NUMERIC_KINDS, EntityRegistry
from .serialize import state_to_doc

WIDGET_TYPES = ("entity", "aggregate")
DEFAULT_AGGREGATE_WINDOW_SECONDS = 3 * 24 * 3600.0


@dataclass(frozen=True)
class PanelWidget:
    entity_id: str
    row: int
    col: int
    widget_type: str = "entity"
    window_seconds: float = DEFAULT_AGGREGATE_WINDOW_SECONDS


@dataclass(frozen=True)
class Panel:
    id: str
    name: str
    widgets: tuple[PanelWidget, ...]


class PanelStore:
    def __init__(
        self,
        registry: EntityRegistry,
        engine: AutomationEngine,
        event_log: EventLog | None,
        clock: Clock,
    ):
        self._registry = registry
        self._engine = engine
        self._log = event_log
        self._clock = clock
        self._panels: dict[str, Panel] = {}
        self._counter = 0

    def _validate(self, name: str, widgets: tuple[PanelWidget, ...]) -> list[str]:
        problems = []
        if not name or not name.strip():
            problems.append("panel name must be non-empty")
        positions: set[tuple[int, int]] = set()
        for i, widget in enumerate(widgets):
            where = f"widget[{i}]"
            if widget.widget_type not in WIDGET_TYPES:
                problems.append(f"{where}: unknown widget type {widget.widget_type!r}")
            if (widget.row, widget.col) in positions:
                problems.append(f"{where}: position ({widget.row}, {widget.col}) used twice")
            positions.add((widget.row, widget.col))
            try:
                entity = self._registry.get_entity(widget.entity_id)
            except NotFoundError:
                problems.append(f"{where}: unknown entity {widget.entity_id!r}")
                continue
            if widget.widget_type == "aggregate":
                if entity.kind not in NUMERIC_KINDS:
                    problems.append(
                        f"{where}: aggregate needs a numeric entity, "
                        f"{entity.name!r} is {entity.kind.value}"
                    )
                if widget.window_seconds <= 0:
                    problems.append(f"{where}: window_seconds must be positive")
        return problems

    def save(self, name: str, widgets: tuple[PanelWidget, ...], panel_id: str | None = None) -> Panel:
        problems = self._validate(name, widgets)
        if problems:
            raise ValidationError(f"panel {name!r} failed validation", problems=problems)
        if panel_id is not None:
            self.get(panel_id)
        else:
            self._counter += 1
            panel_id = f"panel-{self._counter}"
        panel = Panel(id=panel_id, name=name, widgets=tuple(widgets))
        self._panels[panel_id] = panel
        return panel

    def get(self, panel_id: str) -> Panel:
        panel = self._panels.get(panel_id)
        if panel is None:
            raise NotFoundError(f"unknown panel: {panel_id}")
        return panel

    def list_panels(self) -> list[Panel]:
        return list(self._panels.values())

    def delete(self, panel_id: str, actor: str) -> None:
        panel = self.get(panel_id)
        del self._panels[panel_id]
        if self._log is not None:
            self._log.append(
                ts=self._clock.now(),
                event_type=EventType.PANEL_OFF,
                actor=actor,
                details={"panel_id": panel_id, "name": panel.name},
            )

    def panel_data(self, panel_id: str, now: datetime | None = None) -> list[dict]:
        """Resolved widget values in panel order."""
        now = now if now is not None else self._clock.now()
        panel = self.get(panel_id)
        rows = []
        for widget in panel.widgets:
            entity = self._registry.get_entity(widget.entity_id)
            state, _ = self._registry.get_status(widget.entity_id)
            cell: dict = {
                "entity_id": entity.id,
                "name": entity.name,
                "kind": entity.kind.value,
                "enabled": entity.enabled,
                "row": widget.row,
                "col": widget.col,
                "widget_type": widget.widget_type,
                "state": state_to_doc(state),
            }
            if widget.widget_type == "aggregate":
                average = self._engine.rolling_average(
                    widget.entity_id, timedelta(seconds=widget.window_seconds), now
                )
                cell["window_seconds"] = widget.window_seconds
                cell["mean"] = None if average is None else average.mean
                cell["sample_count"] = 0 if average is None else average.sample_count
            rows.append(cell)
        return rows
