"""Shared fixtures: a frozen clock and a fully wired hub."""

from __future__ import annotations

from datetime import datetime, timezone

import pytest

from smarthub.clock import ManualClock
from smarthub.config import HubConfig, SecurityConfig, SeedUser
from smarthub.hub import Hub

START = datetime(2024, 5, 1, 8, 0, 0, tzinfo=timezone.utc)

OWNER = "alice"
OWNER_PASSWORD = "Correct-Horse-42-Battery!"
# RFC 3548 base32 of "Hello!\xde\xad\xbe\xef"
OWNER_SECRET = "JBSWY3DPEHPK3PXP"


def make_config(**security_overrides) -> HubConfig:
    cfg = HubConfig(
        security=SecurityConfig(),
        seed_users=[SeedUser(user_id=OWNER, password=OWNER_PASSWORD, totp_secret=OWNER_SECRET)],
    )
    if security_overrides:
        cfg = cfg.with_security(**security_overrides)
    return cfg


@pytest.fixture
def clock() -> ManualClock:
    return ManualClock(START)


@pytest.fixture
def hub(clock) -> Hub:
    return Hub(config=make_config(), clock=clock)


# ---------------------------------------------------------------- acceptance
# Collect pass/fail per marked criterion and print one line each at the end.

_ACCEPTANCE: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance(num, title): marks a test as an acceptance criterion"
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when != "call":
        return
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    num = marker.kwargs["num"]
    title = marker.kwargs["title"]
    _ACCEPTANCE[num] = (title, "PASS" if rep.passed else "FAIL")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for num in sorted(_ACCEPTANCE):
        title, verdict = _ACCEPTANCE[num]
        terminalreporter.write_line(f"criterion {num}: {verdict} - {title}")
