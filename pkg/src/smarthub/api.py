"""HTTP API over the hub.

Every request, including static and auth traffic, passes the guard's
request filter before any route runs; write methods additionally need a
full-factor session with an unexpired credential. Responses carry a
schema_version field and error bodies stay message-only.
"""

from __future__ import annotations

import hashlib
import json
from datetime import datetime, timedelta, timezone
from urllib.parse import unquote

from fastapi import Body, FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response

from .adapters import Protocol
from .automation import rule_from_document, rule_to_document
from .config import HubConfig
from .errors import (
    AuthError,
    ConfigurationError,
    CredentialExpiredError,
    DegradedModeError,
    NotFoundError,
    ValidationError,
)
from .eventlog import EventType
from .hub import Hub
from .panels import PanelWidget
from .registry import BooleanState, EntityKind, NumericState
from .security import RequestMeta
from .serialize import (
    entity_to_doc,
    location_to_doc,
    record_to_doc,
    report_to_doc,
    state_to_doc,
)
from . import __version__

SCHEMA_VERSION = "hub.api.v1"
LOG_PAGE_LIMIT = 200
WRITE_METHODS = {"POST", "PUT", "DELETE"}
EXEMPT_PREFIXES = ("/api/auth/", "/ingest/")
OPEN_GET_PATHS = {"/api/health"}


def envelope(payload: dict) -> dict:
    return {"schema_version": SCHEMA_VERSION, **payload}


def _is_exempt(path: str) -> bool:
    return any(path.startswith(prefix) for prefix in EXEMPT_PREFIXES)


def privileged_routes(app: FastAPI) -> list[tuple[str, str]]:
    """Every (method, path) the session/MFA/credential checks apply to."""
    found = []
    for route in app.routes:
        methods = getattr(route, "methods", None) or set()
        path = getattr(route, "path", "")
        if not path.startswith("/api/") or _is_exempt(path):
            continue
        for method in methods:
            if method in WRITE_METHODS:
                found.append((method, path))
    return sorted(found)


_BLOCK_STATUS = (
    ("rate_limited", 429),
    ("oversize_body", 413),
    ("injection_detected", 400),
    ("no_session", 401),
    ("mfa_incomplete", 403),
    ("credential_expired", 403),
)


def _status_for(reasons: tuple[str, ...]) -> int:
    for reason, status in _BLOCK_STATUS:
        if reason in reasons:
            return status
    return 403


class GuardMiddleware:
    """ASGI wrapper that buffers the body and runs the request filter."""

    def __init__(self, app, hub: Hub):
        self.app = app
        self.hub = hub

    async def __call__(self, scope, receive, send):
        if scope["type"] != "http":
            await self.app(scope, receive, send)
            return
        chunks = []
        while True:
            message = await receive()
            chunks.append(message.get("body", b""))
            if not message.get("more_body", False):
                break
        body = b"".join(chunks)

        headers = {k.decode("latin-1").lower(): v.decode("latin-1") for k, v in scope.get("headers", [])}
        forwarded = headers.get("x-forwarded-for", "")
        client = scope.get("client") or ("unknown", 0)
        source = forwarded.split(",")[0].strip() if forwarded else client[0]
        user_agent = headers.get("user-agent", "")
        fingerprint = hashlib.sha256(f"{source}|{user_agent}".encode("utf-8")).hexdigest()[:16]
        token = headers.get("x-session-token")
        path = scope["path"]
        method = scope["method"]
        query = unquote(scope.get("query_string", b"").decode("latin-1"))
        privileged = method in WRITE_METHODS and path.startswith("/api/") and not _is_exempt(path)

        meta = RequestMeta(
            source=source,
            method=method,
            path=path,
            query=query,
            body=body.decode("utf-8", errors="replace"),
            session_token=token,
            privileged=privileged,
            fingerprint=fingerprint if privileged else None,
        )
        decision = self.hub.guard.filter_request(meta)
        if not decision.allowed:
            await self._reject(send, _status_for(decision.reasons), decision.reasons)
            return
        state = scope.setdefault("state", {})
        state["source"] = source
        state["fingerprint"] = fingerprint
        state["token"] = token
        if method == "GET" and path.startswith("/api/") and path not in OPEN_GET_PATHS:
            session = self.hub.guard.get_session(token)
            if session is None:
                await self._reject(send, 401, ("no_session",))
                return
            state["user_id"] = session.user_id
        elif privileged:
            session = self.hub.guard.get_session(token)
            state["user_id"] = session.user_id if session else "unknown"
            if self.hub.log.degraded:
                await self._reject(send, 503, ("event_log_degraded",))
                return

        async def replay():
            return {"type": "http.request", "body": body, "more_body": False}

        await self.app(scope, replay, send)

    @staticmethod
    async def _reject(send, status: int, reasons: tuple[str, ...]) -> None:
        payload = json.dumps(
            envelope({"error": "request blocked", "reasons": list(reasons)})
        ).encode("utf-8")
        await send(
            {
                "type": "http.response.start",
                "status": status,
                "headers": [
                    (b"content-type", b"application/json"),
                    (b"content-length", str(len(payload)).encode("ascii")),
                ],
            }
        )
        await send({"type": "http.response.body", "body": payload})


def _error_response(status: int, exc: Exception) -> JSONResponse:
    body: dict = {"error": str(exc)}
    problems = getattr(exc, "problems", None)
    if problems:
        body["problems"] = list(problems)
    return JSONResponse(status_code=status, content=envelope(body))


def _parse_ts(raw: str | None, fallback: datetime) -> datetime:
    if raw is None or raw == "":
        return fallback
    try:
        parsed = datetime.fromisoformat(raw)
    except ValueError:
        raise ValidationError(f"not an ISO 8601 timestamp: {raw!r}") from None
    if parsed.tzinfo is None:
        parsed = parsed.replace(tzinfo=timezone.utc)
    return parsed


def _actor(request: Request) -> str:
    return getattr(request.state, "user_id", None) or "anonymous"


def _widgets_from(payload: dict) -> tuple[PanelWidget, ...]:
    widgets = []
    for raw in payload.get("widgets", []):
        widgets.append(
            PanelWidget(
                entity_id=str(raw.get("entity_id", "")),
                row=int(raw.get("row", 0)),
                col=int(raw.get("col", 0)),
                widget_type=str(raw.get("widget_type", "entity")),
                window_seconds=float(raw.get("window_seconds", 3 * 24 * 3600.0)),
            )
        )
    return tuple(widgets)


def _panel_doc(panel) -> dict:
    return {
        "id": panel.id,
        "name": panel.name,
        "widgets": [
            {
                "entity_id": w.entity_id,
                "row": w.row,
                "col": w.col,
                "widget_type": w.widget_type,
                "window_seconds": w.window_seconds,
            }
            for w in panel.widgets
        ],
    }


def create_app(hub: Hub) -> FastAPI:
    app = FastAPI(title="smarthub", docs_url=None, redoc_url=None, openapi_url=None)

    @app.exception_handler(NotFoundError)
    def _nf(request: Request, exc: NotFoundError):
        return _error_response(404, exc)

    @app.exception_handler(CredentialExpiredError)
    def _ce(request: Request, exc: CredentialExpiredError):
        return _error_response(403, exc)

    @app.exception_handler(AuthError)
    def _ae(request: Request, exc: AuthError):
        return _error_response(401, exc)

    @app.exception_handler(ValidationError)
    def _ve(request: Request, exc: ValidationError):
        return _error_response(422, exc)

    @app.exception_handler(DegradedModeError)
    def _de(request: Request, exc: DegradedModeError):
        return _error_response(503, exc)

    @app.exception_handler(ConfigurationError)
    def _cfg(request: Request, exc: ConfigurationError):
        return _error_response(500, exc)

    @app.exception_handler(RequestValidationError)
    def _rv(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=422, content=envelope({"error": "invalid request body"}))

    # -- auth -----------------------------------------------------------------

    @app.post("/api/auth/login")
    def login(request: Request, payload: dict = Body(...)):
        outcome = hub.guard.authenticate(
            str(payload.get("user_id", "")),
            str(payload.get("password", "")),
            fingerprint=request.state.fingerprint,
        )
        body = {"status": outcome.status}
        if outcome.session_token:
            body["session_token"] = outcome.session_token
        if outcome.challenge_id:
            body["challenge_id"] = outcome.challenge_id
        if outcome.reason:
            body["reason"] = outcome.reason
        status = {"ok": 200, "challenge": 200, "rejected": 401,
                  "locked": 423, "credential_expired": 403}[outcome.status]
        return JSONResponse(status_code=status, content=envelope(body))

    @app.post("/api/auth/mfa")
    def mfa(payload: dict = Body(...)):
        outcome = hub.guard.verify_mfa(
            str(payload.get("challenge_id", "")), str(payload.get("code", ""))
        )
        body = {"status": outcome.status}
        if outcome.session_token:
            body["session_token"] = outcome.session_token
        if outcome.reason:
            body["reason"] = outcome.reason
        status = {"ok": 200, "rejected": 401, "locked": 423}[outcome.status]
        return JSONResponse(status_code=status, content=envelope(body))

    @app.post("/api/auth/step_up")
    def step_up(request: Request, payload: dict = Body(...)):
        restored = hub.guard.step_up(request.state.token, str(payload.get("code", "")))
        return envelope({"restored": restored})

    @app.post("/api/auth/password")
    def change_password(payload: dict = Body(...)):
        hub.guard.change_password(
            str(payload.get("user_id", "")),
            str(payload.get("old_password", "")),
            str(payload.get("new_password", "")),
        )
        return envelope({"changed": True})

    @app.post("/api/auth/logout")
    def logout(request: Request):
        if request.state.token:
            hub.guard.revoke_session(request.state.token)
        return envelope({"ok": True})

    # -- entities --------------------------------------------------------------

    @app.get("/api/entities")
    def list_entities():
        items = []
        for entity in hub.registry.list_entities():
            state, _ = hub.registry.get_status(entity.id)
            items.append(entity_to_doc(entity, state))
        return envelope({"items": items})

    @app.post("/api/entities")
    def create_entity(payload: dict = Body(...)):
        entity = hub.registry.register_entity(
            name=str(payload.get("name", "")),
            kind=str(payload.get("kind", "")),
            location_id=payload.get("location_id"),
            attributes=payload.get("attributes") or {},
        )
        state, _ = hub.registry.get_status(entity.id)
        return envelope(entity_to_doc(entity, state))

    @app.get("/api/entities/{entity_id}/state")
    def get_state(entity_id: str):
        state, attributes = hub.registry.get_status(entity_id)
        return envelope({"entity_id": entity_id, "state": state_to_doc(state),
                         "attributes": attributes})

    @app.post("/api/entities/{entity_id}/state")
    def set_state(entity_id: str, request: Request, payload: dict = Body(...)):
        entity = hub.registry.get_entity(entity_id)
        if "value" not in payload:
            raise ValidationError("body must carry a value field")
        raw = payload["value"]
        if entity.kind is EntityKind.LIGHT:
            raise ValidationError("lights are set through the light endpoint")
        if isinstance(raw, bool):
            value = BooleanState(value=raw)
        elif isinstance(raw, (int, float)):
            value = NumericState(value=float(raw), unit=str(payload.get("unit", "")))
        else:
            raise ValidationError("value must be a number or boolean")
        change = hub.registry.set_status(entity_id, value, actor=_actor(request))
        return envelope({"entity_id": entity_id, "state": state_to_doc(change.new)})

    @app.post("/api/entities/{entity_id}/light")
    def set_light(entity_id: str, request: Request, payload: dict = Body(...)):
        intensity = int(payload.get("intensity", 0))
        color = payload.get("color")
        if color is None:
            state, _ = hub.registry.get_status(entity_id)
            doc = state_to_doc(state)
            color = doc["color"] if doc and doc.get("type") == "light" else [255, 255, 255]
        change = hub.registry.set_light(
            entity_id, intensity, (int(color[0]), int(color[1]), int(color[2])),
            actor=_actor(request),
        )
        return envelope({"entity_id": entity_id, "state": state_to_doc(change.new)})

    @app.post("/api/entities/{entity_id}/enabled")
    def set_enabled(entity_id: str, request: Request, payload: dict = Body(...)):
        enabled = bool(payload.get("enabled", False))
        if enabled:
            hub.guard.reactivate_sensor(
                request.state.token, entity_id, str(payload.get("password", ""))
            )
        else:
            hub.registry.set_enabled(entity_id, False, actor=_actor(request), reason="api")
        entity = hub.registry.get_entity(entity_id)
        state, _ = hub.registry.get_status(entity_id)
        return envelope(entity_to_doc(entity, state))

    # -- locations ----------------------------------------------------------------

    @app.get("/api/locations")
    def list_locations():
        return envelope({"items": [location_to_doc(l) for l in hub.registry.list_locations()]})

    @app.post("/api/locations/purge")
    def purge_locations():
        purged = hub.registry.purge_expired_locations(hub.clock.now())
        return envelope({"purged": purged})

    @app.post("/api/locations")
    def create_location(payload: dict = Body(...)):
        map_point = payload.get("map_point")
        retention_days = payload.get("retention_days")
        location = hub.registry.add_location(
            name=str(payload.get("name", "")),
            latitude=payload.get("latitude"),
            longitude=payload.get("longitude"),
            map_point=tuple(map_point) if map_point is not None else None,
            retention=timedelta(days=float(retention_days)) if retention_days is not None else None,
        )
        return envelope(location_to_doc(location))

    @app.get("/api/locations/{location_id}")
    def get_location(location_id: str):
        return envelope(location_to_doc(hub.registry.get_location(location_id)))

    @app.delete("/api/locations/{location_id}")
    def delete_location(location_id: str):
        hub.registry.delete_location(location_id)
        return envelope({"deleted": True})

    @app.post("/api/locations/{location_id}/sharing")
    def set_sharing(location_id: str, payload: dict = Body(...)):
        location = hub.registry.set_location_sharing(location_id, bool(payload.get("enabled", True)))
        return envelope(location_to_doc(location))

    # -- automations ------------------------------------------------------------------

    @app.get("/api/automations")
    def list_automations():
        return envelope({"items": [rule_to_document(r) for r in hub.engine.list_rules()]})

    @app.post("/api/automations")
    def create_automation(payload: dict = Body(...)):
        rule = rule_from_document({**payload, "schema": payload.get("schema", "hub.rule.v1")})
        rule_id = hub.engine.save_rule(rule)
        return envelope(rule_to_document(hub.engine.get_rule(rule_id)))

    @app.get("/api/automations/{rule_id}")
    def get_automation(rule_id: str):
        return envelope(rule_to_document(hub.engine.get_rule(rule_id)))

    @app.put("/api/automations/{rule_id}")
    def update_automation(rule_id: str, payload: dict = Body(...)):
        hub.engine.get_rule(rule_id)
        rule = rule_from_document({**payload, "schema": payload.get("schema", "hub.rule.v1"), "id": rule_id})
        hub.engine.save_rule(rule)
        return envelope(rule_to_document(hub.engine.get_rule(rule_id)))

    @app.delete("/api/automations/{rule_id}")
    def delete_automation(rule_id: str):
        hub.engine.remove_rule(rule_id)
        return envelope({"deleted": True})

    @app.post("/api/automations/{rule_id}/enabled")
    def set_rule_enabled(rule_id: str, payload: dict = Body(...)):
        rule = hub.engine.set_rule_enabled(rule_id, bool(payload.get("enabled", True)))
        return envelope(rule_to_document(rule))

    @app.post("/api/automations/{rule_id}/dry_run")
    def dry_run(rule_id: str, request: Request, payload: dict = Body(...)):
        entity_id = str(payload.get("entity_id", ""))
        entity = hub.registry.get_entity(entity_id)
        raw = payload.get("value")
        if isinstance(raw, bool):
            value = BooleanState(value=raw)
        elif isinstance(raw, (int, float)):
            value = NumericState(value=float(raw), unit=str(payload.get("unit", "")))
        else:
            raise ValidationError("value must be a number or boolean")
        if entity.kind is EntityKind.LIGHT:
            raise ValidationError("light entities cannot be dry-run through this endpoint")
        hypothetical = hub.engine.make_hypothetical(entity_id, value, actor=_actor(request))
        report = hub.engine.dry_run(rule_id, hypothetical)
        return envelope(report_to_doc(report))

    # -- event log ---------------------------------------------------------------------

    @app.get("/api/logs")
    def query_logs(
        request: Request,
        from_ts: str | None = Query(None, alias="from"),
        to_ts: str | None = Query(None, alias="to"),
        event_type: str | None = Query(None, alias="type"),
        entity_id: str | None = None,
        after_seq: int = 0,
        limit: int = LOG_PAGE_LIMIT,
    ):
        period_from = _parse_ts(from_ts, datetime(1970, 1, 1, tzinfo=timezone.utc))
        period_to = _parse_ts(to_ts, hub.clock.now() + timedelta(microseconds=1))
        etype = None
        if event_type:
            try:
                etype = EventType(event_type)
            except ValueError:
                raise ValidationError(f"unknown event type: {event_type!r}") from None
        records = hub.log.query(period_from, period_to, event_type=etype, entity_id=entity_id)
        page_size = max(1, min(int(limit), LOG_PAGE_LIMIT))
        page = [r for r in records if r.seq > after_seq][:page_size]
        next_cursor = page[-1].seq if len(page) == page_size else None
        return envelope(
            {
                "records": [record_to_doc(r) for r in page],
                "next_after_seq": next_cursor,
            }
        )

    @app.get("/api/logs/export")
    def export_logs(
        from_ts: str | None = Query(None, alias="from"),
        to_ts: str | None = Query(None, alias="to"),
        fmt: str = "lines",
    ):
        period_from = _parse_ts(from_ts, datetime(1970, 1, 1, tzinfo=timezone.utc))
        period_to = _parse_ts(to_ts, hub.clock.now() + timedelta(microseconds=1))
        data = hub.log.export(period_from, period_to, fmt=fmt)
        media = "text/csv" if fmt == "csv" else "application/x-ndjson"
        ext = "csv" if fmt == "csv" else "jsonl"
        return Response(
            content=data,
            media_type=media,
            headers={"Content-Disposition": f'attachment; filename="hub-log-export.{ext}"'},
        )

    @app.put("/api/logs/retention")
    def set_retention(request: Request, payload: dict = Body(...)):
        days = payload.get("max_age_days")
        max_age = None if days is None else timedelta(days=float(days))
        policy = hub.log.set_retention(max_age, actor=_actor(request), now=hub.clock.now())
        return envelope(
            {"max_age_days": None if policy.max_age is None
             else policy.max_age.total_seconds() / 86400.0}
        )

    @app.post("/api/logs/purge")
    def purge_logs():
        return envelope({"purged": hub.log.purge(hub.clock.now())})

    # -- panels ------------------------------------------------------------------------

    @app.get("/api/panels")
    def list_panels():
        return envelope({"items": [_panel_doc(p) for p in hub.panels.list_panels()]})

    @app.post("/api/panels")
    def create_panel(payload: dict = Body(...)):
        panel = hub.panels.save(str(payload.get("name", "")), _widgets_from(payload))
        return envelope(_panel_doc(panel))

    @app.get("/api/panels/{panel_id}")
    def get_panel(panel_id: str):
        return envelope(_panel_doc(hub.panels.get(panel_id)))

    @app.put("/api/panels/{panel_id}")
    def update_panel(panel_id: str, payload: dict = Body(...)):
        panel = hub.panels.save(
            str(payload.get("name", "")), _widgets_from(payload), panel_id=panel_id
        )
        return envelope(_panel_doc(panel))

    @app.delete("/api/panels/{panel_id}")
    def delete_panel(panel_id: str, request: Request):
        hub.panels.delete(panel_id, actor=_actor(request))
        return envelope({"deleted": True})

    @app.get("/api/panels/{panel_id}/data")
    def panel_data(panel_id: str):
        now = hub.clock.now()
        return envelope(
            {"as_of": now.isoformat(), "cells": hub.panels.panel_data(panel_id, now)}
        )

    # -- misc ---------------------------------------------------------------------------

    @app.get("/api/services")
    def list_services():
        return envelope({"items": hub.services.names()})

    @app.get("/api/health")
    def health():
        return envelope(
            {
                "time": hub.clock.now().isoformat(),
                "degraded": hub.log.degraded,
                "version": __version__,
            }
        )

    @app.post("/ingest/{entity_name}")
    async def ingest(entity_name: str, request: Request):
        body = await request.body()
        accepted = hub.gateway.ingest(Protocol.HTTP, f"/ingest/{entity_name}", body)
        status = 200 if accepted else 400
        return JSONResponse(status_code=status, content=envelope({"accepted": accepted}))

    app.add_middleware(GuardMiddleware, hub=hub)

    if hub.config.static_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=hub.config.static_dir, html=True), name="dashboard")

    return app


def serve(config: HubConfig) -> None:
    import uvicorn

    hub = Hub(config=config)
    app = create_app(hub)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
