"""Command line front door: serve, simulate, replay attacks, query the log."""

from __future__ import annotations

import json
import re
import sys
from datetime import datetime, timedelta, timezone
from pathlib import Path

import click

from .adapters import (
    DeviceEndpoint,
    Direction,
    Protocol,
    mqtt_state_topic,
    profile_from_dict,
    run_simulation,
)
from .attacks import (
    format_report,
    run_all,
    run_negative_control,
    run_scenario,
    scenario_kinds,
)
from .clock import ManualClock
from .config import load_config
from .errors import HubError
from .eventlog import EventLog, EventType, FileLogStore
from .hub import Hub

_DURATION = re.compile(r"^(\d+(?:\.\d+)?)([smhd]?)$")
_UNIT_SECONDS = {"": 1.0, "s": 1.0, "m": 60.0, "h": 3600.0, "d": 86400.0}


def parse_duration(text: str) -> float:
    """'90s', '15m', '12h', '3d', or bare seconds."""
    match = _DURATION.match(text.strip())
    if not match:
        raise click.BadParameter(f"cannot parse duration {text!r} (use e.g. 90s, 15m, 12h, 3d)")
    return float(match.group(1)) * _UNIT_SECONDS[match.group(2)]


def _parse_ts(text: str | None, fallback: datetime) -> datetime:
    if not text:
        return fallback
    try:
        parsed = datetime.fromisoformat(text)
    except ValueError:
        raise click.BadParameter(f"not an ISO 8601 timestamp: {text!r}") from None
    if parsed.tzinfo is None:
        parsed = parsed.replace(tzinfo=timezone.utc)
    return parsed


@click.group()
def main() -> None:
    """Self-hosted smart home hub."""


@main.command()
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="Config file (JSON). HUB_CONFIG env wins when set.")
def serve(config_path: str | None) -> None:
    """Run the HTTP API."""
    from .api import serve as serve_api

    try:
        config = load_config(config_path)
    except HubError as exc:
        raise click.ClickException(str(exc)) from exc
    serve_api(config)


@main.command()
@click.option("--profile", "profile_path", type=click.Path(exists=True), required=True,
              help="Simulation profile file (JSON).")
@click.option("--duration", default="1d", show_default=True, help="How long to simulate.")
@click.option("--seed", default=0, show_default=True, type=int)
def sim(profile_path: str, duration: str, seed: int) -> None:
    """Run simulated devices against a throwaway hub and print what landed."""
    raw = json.loads(Path(profile_path).read_text(encoding="utf-8"))
    duration_seconds = parse_duration(duration)
    clock = ManualClock(datetime(2024, 1, 1, tzinfo=timezone.utc))
    hub = Hub(clock=clock)
    location = hub.registry.add_location("sim", map_point=(0.5, 0.5))
    name_to_id: dict[str, str] = {}
    for spec_entity in raw.get("entities", []):
        entity = hub.registry.register_entity(
            spec_entity["name"], spec_entity["kind"], location_id=location.id
        )
        name_to_id[entity.name] = entity.id
        hub.gateway.bind(
            DeviceEndpoint(
                entity_id=entity.id,
                protocol=Protocol.MQTT,
                direction=Direction.INBOUND,
                address=mqtt_state_topic("sim", entity.name),
            )
        )
    profiles = []
    for doc in raw.get("profiles", []):
        entity_key = doc.get("entity", doc.get("entity_id", ""))
        if entity_key not in name_to_id:
            raise click.ClickException(f"profile references unknown entity {entity_key!r}")
        profiles.append(profile_from_dict({**doc, "entity_id": name_to_id[entity_key]}))
    report = run_simulation(
        hub.gateway, hub.registry, profiles, duration_seconds, seed,
        start_ts=clock.now(),
    )
    click.echo(f"fed {report.samples_fed} samples, rejected {report.samples_rejected}")
    for name, entity_id in sorted(name_to_id.items()):
        state, _ = hub.registry.get_status(entity_id)
        count = report.per_entity.get(entity_id, 0)
        if state is None:
            click.echo(f"{name} ({entity_id}): {count} samples, no state")
            continue
        from .registry import NumericState, BooleanState

        value = state.value
        if isinstance(value, NumericState):
            shown = f"{value.value:.3f}{' ' + value.unit if value.unit else ''}"
        elif isinstance(value, BooleanState):
            shown = "true" if value.value else "false"
        else:
            shown = f"intensity={value.intensity}"
        click.echo(f"{name} ({entity_id}): {count} samples, last {shown}")


@main.group()
def attack() -> None:
    """Replay staged intrusions against a fresh hub."""


@attack.command("run")
@click.option("--scenario", "kind", required=True, type=click.Choice(scenario_kinds()))
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--negative-control", is_flag=True,
              help="Run with the matching defense switched off; the attack should succeed.")
def attack_run(kind: str, seed: int, negative_control: bool) -> None:
    """Run one scenario and print the staged outcome."""
    outcome = run_negative_control(kind, seed=seed) if negative_control else run_scenario(kind, seed=seed)
    click.echo(f"scenario: {outcome.kind}")
    click.echo(f"surface: {outcome.surface}")
    click.echo(f"stages reached: {', '.join(outcome.stages_reached)} "
               f"({len(outcome.stages_reached)}/{outcome.stages_total})")
    click.echo(f"prevention: {outcome.prevention_kind} "
               f"({'fired' if outcome.prevention_fired else 'did not fire'})")
    for line in outcome.detail:
        click.echo(f"  - {line}")
    click.echo(f"defeated: {'yes' if outcome.defeated else 'NO'}")
    if negative_control:
        sys.exit(0 if not outcome.defeated else 1)
    sys.exit(0 if outcome.defeated else 1)


@attack.command("run-all")
@click.option("--report", "style", default="table", show_default=True,
              type=click.Choice(["table", "lines"]))
@click.option("--seed", default=0, show_default=True, type=int)
def attack_run_all(style: str, seed: int) -> None:
    """Run every scenario and summarize."""
    outcomes = run_all(seed=seed)
    click.echo(format_report(outcomes, style=style))
    sys.exit(0 if all(o.defeated for o in outcomes) else 1)


@main.group()
def log() -> None:
    """Inspect the append-only event log."""


@log.command("query")
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--log-file", type=click.Path(), default=None,
              help="Log file to read; defaults to the configured log_path.")
@click.option("--from", "from_ts", default=None, help="Period start (ISO 8601, inclusive).")
@click.option("--to", "to_ts", default=None, help="Period end (ISO 8601, exclusive).")
@click.option("--type", "event_type", default=None,
              type=click.Choice([e.value for e in EventType]))
@click.option("--entity", "entity_id", default=None)
@click.option("--export", "export_fmt", default=None, type=click.Choice(["csv", "lines"]))
@click.option("--out", "out_path", type=click.Path(), default=None,
              help="Write the export here instead of stdout.")
def log_query(
    config_path: str | None,
    log_file: str | None,
    from_ts: str | None,
    to_ts: str | None,
    event_type: str | None,
    entity_id: str | None,
    export_fmt: str | None,
    out_path: str | None,
) -> None:
    """Query a period of the log, optionally exporting it."""
    if log_file is None:
        try:
            config = load_config(config_path)
        except HubError as exc:
            raise click.ClickException(str(exc)) from exc
        log_file = config.log_path
    if log_file is None:
        raise click.ClickException("no log file: pass --log-file or set log_path in the config")
    if not Path(log_file).exists():
        raise click.ClickException(f"log file not found: {log_file}")
    event_log = EventLog(store=FileLogStore(Path(log_file)))
    period_from = _parse_ts(from_ts, datetime(1970, 1, 1, tzinfo=timezone.utc))
    period_to = _parse_ts(to_ts, datetime.now(timezone.utc) + timedelta(seconds=1))
    etype = EventType(event_type) if event_type else None
    if export_fmt:
        data = event_log.export(period_from, period_to, fmt=export_fmt)
        if out_path:
            Path(out_path).write_bytes(data)
            click.echo(f"wrote {len(data)} bytes to {out_path}")
        else:
            sys.stdout.buffer.write(data)
        return
    records = event_log.query(period_from, period_to, event_type=etype, entity_id=entity_id)
    for record in records:
        entity = record.entity_id or "-"
        click.echo(
            f"{record.seq}\t{record.ts.isoformat()}\t{record.event_type.value}"
            f"\t{entity}\t{record.actor}\t{json.dumps(record.details, sort_keys=True)}"
        )
    click.echo(f"{len(records)} records", err=True)


if __name__ == "__main__":
    main()
