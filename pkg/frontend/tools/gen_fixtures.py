"""Record real hub API exchanges into tests/fixtures/server.json.

The dashboard's contract tests replay these instead of guessing what the
server would say. Regenerate after any API change:

    python3 tools/gen_fixtures.py
"""

from __future__ import annotations

import base64
import json
from datetime import datetime, timedelta, timezone
from pathlib import Path

from fastapi.testclient import TestClient

from smarthub.api import create_app, privileged_routes
from smarthub.clock import ManualClock
from smarthub.config import HubConfig, SeedUser
from smarthub.hub import Hub
from smarthub.registry import EntityKind, NumericState
from smarthub.security import totp_code

START = datetime(2024, 5, 1, 8, 0, 0, tzinfo=timezone.utc)
USER = "alice"
PASSWORD = "Correct-Horse-42-Battery!"
SECRET = "JBSWY3DPEHPK3PXP"

OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "server.json"


def login(client: TestClient, clock: ManualClock) -> str:
    res = client.post("/api/auth/login", json={"user_id": USER, "password": PASSWORD})
    challenge = res.json()["challenge_id"]
    res = client.post(
        "/api/auth/mfa",
        json={"challenge_id": challenge, "code": totp_code(SECRET, clock.now())},
    )
    return res.json()["session_token"]


def main() -> None:
    clock = ManualClock(START)
    config = HubConfig(seed_users=(SeedUser(USER, PASSWORD, SECRET),))
    hub = Hub(config=config, clock=clock)

    # History for the rolling-average dry run, committed before anything else.
    sensor = hub.registry.register_entity("porch co", EntityKind.CO)
    for hours_ago, value in ((30, 18.0), (20, 22.0), (10, 20.0)):
        clock.set(START - timedelta(hours=hours_ago))
        hub.registry.set_status(sensor.id, NumericState(value=value, unit="ppm"),
                                actor="fixture")
    clock.set(START)
    bare = hub.registry.register_entity("attic co", EntityKind.CO)

    app = create_app(hub)
    fixture: dict = {
        "base_time": START.isoformat(),
        "map_bounds": {
            "lat_min": config.map_bounds.lat_min,
            "lat_max": config.map_bounds.lat_max,
            "lon_min": config.map_bounds.lon_min,
            "lon_max": config.map_bounds.lon_max,
        },
        "privileged_manifest": [list(row) for row in privileged_routes(app)],
    }

    with TestClient(app) as client:
        token = login(client, clock)
        auth = {"X-Session-Token": token}

        # Map interpolation: what the server computes for each map point.
        samples = []
        for x, y in ((0.0, 0.0), (1.0, 1.0), (0.25, 0.75), (0.5, 0.5),
                     (0.125, 0.875), (1.0, 0.0), (0.0, 1.0), (0.33, 0.66)):
            res = client.post("/api/locations",
                              json={"name": f"probe {x},{y}", "map_point": [x, y]},
                              headers=auth)
            doc = res.json()
            samples.append({"x": x, "y": y,
                            "latitude": doc["latitude"], "longitude": doc["longitude"]})
        fixture["interpolation"] = samples

        # A committed light state, exactly as the API reports it.
        res = client.post("/api/entities",
                          json={"name": "hall light", "kind": "light"}, headers=auth)
        light_id = res.json()["id"]
        set_body = {"intensity": 60, "color": [20, 120, 240]}
        res = client.post(f"/api/entities/{light_id}/light", json=set_body, headers=auth)
        fixture["set_light"] = {
            "entity_id": light_id,
            "request": set_body,
            "response": res.json(),
        }
        res = client.get("/api/entities", headers=auth)
        fixture["entities"] = res.json()

        # Dry runs: one that fires, one against a disabled rule, one with an
        # unavailable condition (no baseline history at all).
        rule = {
            "schema": "hub.rule.v1", "id": "rule-co", "name": "co spike",
            "enabled": True, "version": 1,
            "trigger": {"type": "state_change", "entity_id": sensor.id},
            "conditions": [
                {"type": "above_rolling_average", "entity_id": sensor.id,
                 "window_seconds": 3 * 24 * 3600.0, "margin": 0.0},
            ],
            "actions": [
                {"type": "notify", "recipient_role": "designated_contact",
                 "message_template": "co spike at {value}"},
            ],
        }
        client.post("/api/automations", json=rule, headers=auth)
        probe = {"entity_id": sensor.id, "value": 30.0, "unit": "ppm"}
        fixture["dry_run_fires"] = client.post(
            "/api/automations/rule-co/dry_run", json=probe, headers=auth).json()

        client.post("/api/automations/rule-co/enabled",
                    json={"enabled": False}, headers=auth)
        fixture["dry_run_disabled"] = client.post(
            "/api/automations/rule-co/dry_run", json=probe, headers=auth).json()
        client.post("/api/automations/rule-co/enabled",
                    json={"enabled": True}, headers=auth)

        unavailable_rule = dict(rule, id="rule-attic", name="attic spike",
                                trigger={"type": "state_change", "entity_id": bare.id},
                                conditions=[{"type": "above_rolling_average",
                                             "entity_id": bare.id,
                                             "window_seconds": 3 * 24 * 3600.0,
                                             "margin": 0.0}])
        client.post("/api/automations", json=unavailable_rule, headers=auth)
        fixture["dry_run_unavailable"] = client.post(
            "/api/automations/rule-attic/dry_run",
            json={"entity_id": bare.id, "value": 5.0, "unit": "ppm"},
            headers=auth).json()
        fixture["automations"] = client.get("/api/automations", headers=auth).json()

        # Log export bytes, both formats, for the byte-identity check.
        for i in range(6):
            clock.advance(timedelta(seconds=1))
            hub.registry.set_status(sensor.id,
                                    NumericState(value=20.0 + i, unit="ppm"),
                                    actor="fixture")
        window = {"from": (START - timedelta(days=2)).isoformat(),
                  "to": (clock.now() + timedelta(seconds=1)).isoformat()}
        exports = {}
        for fmt in ("lines", "csv"):
            res = client.get("/api/logs/export", params={**window, "fmt": fmt},
                             headers=auth)
            exports[fmt] = {
                "query": {**window, "fmt": fmt},
                "content_disposition": res.headers["content-disposition"],
                "body_b64": base64.b64encode(res.content).decode("ascii"),
            }
        fixture["exports"] = exports
        fixture["logs_page"] = client.get(
            "/api/logs", params={"limit": 10}, headers=auth).json()
        fixture["health"] = client.get("/api/health").json()

    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(fixture, indent=2, sort_keys=True) + "\n")
    print(f"wrote {OUT} ({OUT.stat().st_size} bytes)")


if __name__ == "__main__":
    main()
