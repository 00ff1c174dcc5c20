"""Hub configuration: documented defaults plus a JSON config file loader.

Config file layout mirrors the dotted key names used in the docs, e.g.
``security.rate_limit.rps`` lives at ``{"security": {"rate_limit": {"rps": ...}}}``.
The ``HUB_CONFIG`` environment variable overrides the config file path.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

from .errors import ConfigurationError

DEFAULT_LOCATION_RETENTION_DAYS = 30.0
DEFAULT_PASSWORD_MAX_AGE_DAYS = 30.0


@dataclass(frozen=True)
class RateLimitConfig:
    rps: float = 20.0
    burst: float = 40.0


@dataclass(frozen=True)
class SecurityConfig:
    rate_limit: RateLimitConfig = field(default_factory=RateLimitConfig)
    password_max_age_days: float = DEFAULT_PASSWORD_MAX_AGE_DAYS
    designated_contact: str = "designated-contact"
    co_threshold_ppm: float = 50.0
    smoke_threshold: float = 0.1
    body_size_limit: int = 64 * 1024
    lockout_failures: int = 5
    lockout_window_seconds: float = 300.0
    alert_suppression_seconds: float = 600.0
    totp_step_seconds: int = 30
    session_ttl_hours: float = 12.0
    # Guard toggles. All on by default; the attack harness flips individual
    # ones for its negative controls.
    waf_enabled: bool = True
    mfa_required: bool = True
    facial_recognition_enabled: bool = True
    threshold_alerts_enabled: bool = True
    reactivation_gate_enabled: bool = True


@dataclass(frozen=True)
class MapBounds:
    """Bounding box the dashboard's interactive map covers.

    A map point (x, y) with x, y in [0, 1] interpolates linearly:
    x spans lon_min..lon_max, y spans lat_min..lat_max.
    """

    lat_min: float = 44.0
    lat_max: float = 45.0
    lon_min: float = 26.0
    lon_max: float = 27.0


@dataclass(frozen=True)
class SeedUser:
    user_id: str
    password: str
    totp_secret: str = ""
    role: str = "user"


@dataclass(frozen=True)
class HubConfig:
    security: SecurityConfig = field(default_factory=SecurityConfig)
    map_bounds: MapBounds = field(default_factory=MapBounds)
    host: str = "127.0.0.1"
    port: int = 8123
    log_path: str | None = None
    location_retention_days: float = DEFAULT_LOCATION_RETENTION_DAYS
    seed_users: tuple[SeedUser, ...] = ()
    static_dir: str | None = None

    def with_security(self, **overrides: Any) -> "HubConfig":
        return replace(self, security=replace(self.security, **overrides))


def _get(section: dict[str, Any], key: str, default: Any) -> Any:
    value = section.get(key, default)
    if value is None:
        return default
    return value


def config_from_dict(raw: dict[str, Any]) -> HubConfig:
    sec = raw.get("security", {})
    rate = sec.get("rate_limit", {})
    pw = sec.get("password", {})
    alert = sec.get("alert", {})
    co = sec.get("co", {})
    smoke = sec.get("smoke", {})
    defaults = SecurityConfig()
    security = SecurityConfig(
        rate_limit=RateLimitConfig(
            rps=float(_get(rate, "rps", defaults.rate_limit.rps)),
            burst=float(_get(rate, "burst", defaults.rate_limit.burst)),
        ),
        password_max_age_days=float(_get(pw, "max_age_days", defaults.password_max_age_days)),
        designated_contact=str(_get(alert, "designated_contact", defaults.designated_contact)),
        co_threshold_ppm=float(_get(co, "threshold_ppm", defaults.co_threshold_ppm)),
        smoke_threshold=float(_get(smoke, "threshold", defaults.smoke_threshold)),
        body_size_limit=int(_get(sec, "body_size_limit", defaults.body_size_limit)),
        waf_enabled=bool(_get(sec, "waf_enabled", defaults.waf_enabled)),
        mfa_required=bool(_get(sec, "mfa_required", defaults.mfa_required)),
        facial_recognition_enabled=bool(
            _get(sec, "facial_recognition_enabled", defaults.facial_recognition_enabled)
        ),
        threshold_alerts_enabled=bool(
            _get(sec, "threshold_alerts_enabled", defaults.threshold_alerts_enabled)
        ),
        reactivation_gate_enabled=bool(
            _get(sec, "reactivation_gate_enabled", defaults.reactivation_gate_enabled)
        ),
    )
    bounds_raw = raw.get("map_bounds", {})
    bounds_defaults = MapBounds()
    bounds = MapBounds(
        lat_min=float(_get(bounds_raw, "lat_min", bounds_defaults.lat_min)),
        lat_max=float(_get(bounds_raw, "lat_max", bounds_defaults.lat_max)),
        lon_min=float(_get(bounds_raw, "lon_min", bounds_defaults.lon_min)),
        lon_max=float(_get(bounds_raw, "lon_max", bounds_defaults.lon_max)),
    )
    users = tuple(
        SeedUser(
            user_id=str(u["user_id"]),
            password=str(u["password"]),
            totp_secret=str(u.get("totp_secret", "")),
            role=str(u.get("role", "user")),
        )
        for u in raw.get("seed_users", [])
    )
    cfg_defaults = HubConfig()
    return HubConfig(
        security=security,
        map_bounds=bounds,
        host=str(_get(raw, "host", cfg_defaults.host)),
        port=int(_get(raw, "port", cfg_defaults.port)),
        log_path=raw.get("log_path"),
        location_retention_days=float(
            _get(raw, "location_retention_days", cfg_defaults.location_retention_days)
        ),
        seed_users=users,
        static_dir=raw.get("static_dir"),
    )


def load_config(path: str | os.PathLike[str] | None = None) -> HubConfig:
    """Load config from ``path``, honoring the HUB_CONFIG env override.

    No path and no env var yields the documented defaults.
    """
    env_path = os.environ.get("HUB_CONFIG")
    chosen = env_path if env_path else path
    if chosen is None:
        return HubConfig()
    file_path = Path(chosen)
    if not file_path.exists():
        raise ConfigurationError(f"config file not found: {file_path}")
    try:
        raw = json.loads(file_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config file is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigurationError("config file must hold a JSON object")
    return config_from_dict(raw)
