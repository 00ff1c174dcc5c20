"""Authentication, request filtering, and the hub's defensive responses.

One guard object owns every security decision: credential checks with a
hard expiry, optional second factor, per-user lockout, per-source request
rate limiting with an injection scanner, threshold alerts with dedup, a
pluggable entry recognizer that fails closed, session link integrity, and
the password-gated path for turning a disabled sensor back on.
"""

from __future__ import annotations

import base64
import hashlib
import hmac
import re
import secrets
import struct
from dataclasses import dataclass, field, replace
from datetime import datetime, timedelta
from typing import Callable, Protocol as TypingProtocol

from .clock import Clock, SystemClock
from .config import SecurityConfig
from .errors import (
    AuthError,
    CredentialExpiredError,
    NotFoundError,
    ValidationError,
)
from .eventlog import EventLog, EventType
from .registry import EntityRegistry

PBKDF2_ITERATIONS = 60_000
PASSWORD_MIN_LENGTH = 12
PASSWORD_MIN_CLASSES = 3
BANNED_PASSWORDS = frozenset(
    {
        "password", "password1", "passw0rd", "123456", "123456789",
        "qwerty", "qwertyuiop", "letmein", "admin", "administrator",
        "welcome", "iloveyou", "monkey", "dragon", "sunshine",
        "smarthome", "smarthouse", "changeme", "default", "secret",
    }
)

CHALLENGE_TTL = timedelta(minutes=5)
FACTOR_PASSWORD = "password"
FACTOR_TOTP = "totp"


# -- password policy -----------------------------------------------------------


def check_password_policy(password: str) -> list[str]:
    """Empty list means the password is acceptable."""
    problems = []
    if len(password) < PASSWORD_MIN_LENGTH:
        problems.append(f"shorter than {PASSWORD_MIN_LENGTH} characters")
    classes = 0
    if any(c.islower() for c in password):
        classes += 1
    if any(c.isupper() for c in password):
        classes += 1
    if any(c.isdigit() for c in password):
        classes += 1
    if any(not c.isalnum() for c in password):
        classes += 1
    if classes < PASSWORD_MIN_CLASSES:
        problems.append(
            f"uses {classes} character classes, needs {PASSWORD_MIN_CLASSES}"
            " of: lowercase, uppercase, digits, symbols"
        )
    if password.lower() in BANNED_PASSWORDS:
        problems.append("appears on the banned password list")
    return problems


# -- credentials ----------------------------------------------------------------


@dataclass(frozen=True)
class Credential:
    salt: bytes
    digest: bytes
    iterations: int
    created_at: datetime


def make_credential(password: str, now: datetime, iterations: int = PBKDF2_ITERATIONS) -> Credential:
    salt = secrets.token_bytes(16)
    digest = hashlib.pbkdf2_hmac("sha256", password.encode("utf-8"), salt, iterations)
    return Credential(salt=salt, digest=digest, iterations=iterations, created_at=now)


def verify_password(credential: Credential, password: str) -> bool:
    digest = hashlib.pbkdf2_hmac(
        "sha256", password.encode("utf-8"), credential.salt, credential.iterations
    )
    return hmac.compare_digest(digest, credential.digest)


def is_credential_expired(credential: Credential, now: datetime, max_age_days: float) -> bool:
    # the boundary instant itself counts as expired
    return now >= credential.created_at + timedelta(days=max_age_days)


# -- one-time codes ---------------------------------------------------------------


def _hotp(secret: bytes, counter: int, digits: int = 6) -> str:
    mac = hmac.new(secret, struct.pack(">Q", counter), hashlib.sha1).digest()
    offset = mac[-1] & 0x0F
    code = (struct.unpack(">I", mac[offset:offset + 4])[0] & 0x7FFFFFFF) % (10 ** digits)
    return str(code).zfill(digits)


def _decode_secret(secret: str) -> bytes:
    padded = secret.strip().upper().replace(" ", "")
    padded += "=" * (-len(padded) % 8)
    return base64.b32decode(padded)


def totp_code(secret: str, now: datetime, step_seconds: int = 30) -> str:
    counter = int(now.timestamp()) // step_seconds
    return _hotp(_decode_secret(secret), counter)


def verify_totp(secret: str, code: str, now: datetime, step_seconds: int = 30, tolerance: int = 1) -> bool:
    counter = int(now.timestamp()) // step_seconds
    key = _decode_secret(secret)
    return any(
        hmac.compare_digest(_hotp(key, counter + drift), code)
        for drift in range(-tolerance, tolerance + 1)
    )


def new_totp_secret() -> str:
    return base64.b32encode(secrets.token_bytes(10)).decode("ascii")


# -- sessions ---------------------------------------------------------------------


@dataclass(frozen=True)
class Session:
    token: str
    user_id: str
    created_at: datetime
    expires_at: datetime
    factors: frozenset[str]
    fingerprint: str | None = None


@dataclass(frozen=True)
class UserAccount:
    user_id: str
    credential: Credential
    totp_secret: str = ""
    role: str = "user"


@dataclass(frozen=True)
class AuthOutcome:
    status: str  # ok | challenge | rejected | locked | credential_expired
    session_token: str | None = None
    challenge_id: str | None = None
    reason: str = ""


@dataclass(frozen=True)
class AlertNotification:
    ts: datetime
    severity: str
    kind: str
    message: str
    recipients: tuple[str, ...]
    entity_id: str | None = None


AlertSink = Callable[[AlertNotification], None]


# -- injection scanner ---------------------------------------------------------------
#
# Pattern data, not code: each entry names the technique it matches so
# blocked requests can say why. The unbalanced-quote check lives in
# detect_sqli because counting is awkward in a regex.

SQLI_PATTERNS: tuple[tuple[str, re.Pattern], ...] = (
    # \3? keeps the classic cut-off form ' OR '1'='1 detectable: its closing
    # quote belongs to the surrounding query, not the payload
    ("tautology", re.compile(r"(?i)\b(?:or|and)\b\s+(['\"]?)([\w@.]+)\1\s*=\s*(['\"]?)\2\3?")),
    ("comment_sequence", re.compile(r"--|/\*")),
    ("stacked_query", re.compile(r"(?i);\s*(?:select|insert|update|delete|drop|alter|create|exec)\b")),
    ("union_select", re.compile(r"(?i)\bunion\b(?:\s+all)?\s+select\b")),
)

_SQL_KEYWORD = re.compile(r"(?i)\b(?:select|insert|update|delete|drop|union|where|exec)\b")


def detect_sqli(text: str) -> list[str]:
    """Names of injection patterns present in the text; empty when clean."""
    found = [name for name, pattern in SQLI_PATTERNS if pattern.search(text)]
    if text.count("'") % 2 == 1 and _SQL_KEYWORD.search(text):
        found.append("unbalanced_quote_keyword")
    return found


# -- request filtering -----------------------------------------------------------------


class TokenBucket:
    """Classic leaky-bucket-as-meter; capacity is the allowed burst."""

    def __init__(self, rate: float, capacity: float, now: datetime):
        self.rate = rate
        self.capacity = capacity
        self.tokens = capacity
        self.updated = now

    def allow(self, now: datetime) -> bool:
        elapsed = (now - self.updated).total_seconds()
        if elapsed > 0:
            self.tokens = min(self.capacity, self.tokens + elapsed * self.rate)
            self.updated = now
        if self.tokens >= 1.0:
            self.tokens -= 1.0
            return True
        return False


@dataclass(frozen=True)
class RequestMeta:
    source: str
    method: str = "GET"
    path: str = "/"
    query: str = ""
    body: str = ""
    session_token: str | None = None
    privileged: bool = False
    fingerprint: str | None = None


@dataclass(frozen=True)
class FilterDecision:
    allowed: bool
    reasons: tuple[str, ...] = ()
    matched_patterns: tuple[str, ...] = ()


@dataclass(frozen=True)
class EntryDecision:
    allowed: bool
    reason: str
    person: str | None = None


class EntryRecognizer(TypingProtocol):
    def identify(self, token: str) -> str | None: ...


class EnrollmentTokenRecognizer:
    """Stand-in recognizer: an entry token is valid iff it was enrolled.

    A camera-backed implementation satisfies the same one-method contract.
    """

    def __init__(self) -> None:
        self._people: dict[str, str] = {}

    def enroll(self, person: str, token: str) -> None:
        self._people[token] = person

    def identify(self, token: str) -> str | None:
        return self._people.get(token)


class _FailingRecognizer:
    def identify(self, token: str) -> str | None:
        raise RuntimeError("recognizer offline")


# -- the guard ---------------------------------------------------------------------


class SecurityGuard:
    def __init__(
        self,
        config: SecurityConfig,
        registry: EntityRegistry | None = None,
        event_log: EventLog | None = None,
        clock: Clock | None = None,
        recognizer: EntryRecognizer | None = None,
    ):
        self.config = config
        self._registry = registry
        self._log = event_log
        self._clock = clock if clock is not None else SystemClock()
        self._recognizer = recognizer if recognizer is not None else EnrollmentTokenRecognizer()
        self._users: dict[str, UserAccount] = {}
        self._sessions: dict[str, Session] = {}
        self._challenges: dict[str, tuple[str, datetime, str | None]] = {}
        self._failures: dict[str, list[datetime]] = {}
        self._locked_alerted: dict[str, datetime] = {}
        self._buckets: dict[str, TokenBucket] = {}
        self._alert_sinks: list[AlertSink] = []
        self._last_alert: dict[tuple[str, str | None], datetime] = {}
        self._link_fingerprints: dict[str, str] = {}
        self.filter_counts: dict[str, int] = {}
        self.alerts_sent: list[AlertNotification] = []

    # -- wiring --------------------------------------------------------------

    def add_alert_sink(self, sink: AlertSink) -> None:
        self._alert_sinks.append(sink)

    def set_recognizer(self, recognizer: EntryRecognizer) -> None:
        self._recognizer = recognizer

    @property
    def recognizer(self) -> EntryRecognizer:
        return self._recognizer

    def _event(self, event_type: EventType, actor: str, entity_id: str | None = None, **details: str) -> None:
        if self._log is None:
            return
        self._log.append(
            ts=self._clock.now(),
            event_type=event_type,
            actor=actor,
            entity_id=entity_id,
            details=details,
        )

    # -- accounts ------------------------------------------------------------

    def add_user(
        self, user_id: str, password: str, totp_secret: str = "", role: str = "user",
        now: datetime | None = None,
    ) -> UserAccount:
        now = now if now is not None else self._clock.now()
        problems = check_password_policy(password)
        if problems:
            raise ValidationError(f"password for {user_id!r} rejected", problems=problems)
        if user_id in self._users:
            raise ValidationError(f"user {user_id!r} already exists")
        account = UserAccount(
            user_id=user_id,
            credential=make_credential(password, now),
            totp_secret=totp_secret,
            role=role,
        )
        self._users[user_id] = account
        return account

    def get_user(self, user_id: str) -> UserAccount:
        account = self._users.get(user_id)
        if account is None:
            raise NotFoundError(f"unknown user: {user_id}")
        return account

    def change_password(self, user_id: str, old_password: str, new_password: str,
                        now: datetime | None = None) -> None:
        """Resets the credential clock; the old password must still verify
        even when it has aged out."""
        now = now if now is not None else self._clock.now()
        account = self.get_user(user_id)
        if not verify_password(account.credential, old_password):
            self._record_failure(user_id, now)
            raise AuthError("current password does not match")
        problems = check_password_policy(new_password)
        if problems:
            raise ValidationError("new password rejected", problems=problems)
        if old_password == new_password:
            raise ValidationError("new password must differ from the old one")
        self._users[user_id] = replace(account, credential=make_credential(new_password, now))
        self._event(EventType.SECURITY, actor=user_id, check="password_changed")

    def credential_expired(self, user_id: str, now: datetime | None = None) -> bool:
        now = now if now is not None else self._clock.now()
        account = self.get_user(user_id)
        return is_credential_expired(account.credential, now, self.config.password_max_age_days)

    # -- lockout ---------------------------------------------------------------

    def _record_failure(self, user_id: str, now: datetime) -> None:
        window = timedelta(seconds=self.config.lockout_window_seconds)
        attempts = [t for t in self._failures.get(user_id, []) if now - t < window]
        attempts.append(now)
        self._failures[user_id] = attempts
        if len(attempts) >= self.config.lockout_failures:
            already = self._locked_alerted.get(user_id)
            if already is None or now - already >= window:
                self._locked_alerted[user_id] = now
                self._event(EventType.SECURITY, actor=user_id, check="lockout",
                            failures=str(len(attempts)))
                self._emit_alert(
                    kind="lockout",
                    severity="high",
                    message=f"account {user_id} locked after repeated failed sign-ins",
                    entity_id=None,
                    now=now,
                    skip_dedup=True,
                )

    def is_locked_out(self, user_id: str, now: datetime | None = None) -> bool:
        now = now if now is not None else self._clock.now()
        window = timedelta(seconds=self.config.lockout_window_seconds)
        attempts = [t for t in self._failures.get(user_id, []) if now - t < window]
        return len(attempts) >= self.config.lockout_failures

    # -- sign-in -----------------------------------------------------------------

    def authenticate(
        self, user_id: str, password: str, fingerprint: str | None = None,
        now: datetime | None = None,
    ) -> AuthOutcome:
        now = now if now is not None else self._clock.now()
        if self.is_locked_out(user_id, now):
            self._event(EventType.SECURITY, actor=user_id, check="login_rejected", reason="locked")
            return AuthOutcome(status="locked", reason="account is locked, retry later")
        account = self._users.get(user_id)
        if account is None or not verify_password(account.credential, password):
            self._record_failure(user_id, now)
            self._event(EventType.SECURITY, actor=user_id, check="login_rejected", reason="bad_credentials")
            return AuthOutcome(status="rejected", reason="unknown user or wrong password")
        if is_credential_expired(account.credential, now, self.config.password_max_age_days):
            self._event(EventType.SECURITY, actor=user_id, check="login_rejected", reason="credential_expired")
            return AuthOutcome(
                status="credential_expired",
                reason="password has aged out, change it to continue",
            )
        self._failures.pop(user_id, None)
        if self.config.mfa_required and account.totp_secret:
            challenge_id = secrets.token_hex(8)
            self._challenges[challenge_id] = (user_id, now, fingerprint)
            self._event(EventType.SECURITY, actor=user_id, check="mfa_challenge")
            return AuthOutcome(status="challenge", challenge_id=challenge_id)
        session = self._open_session(account, {FACTOR_PASSWORD}, fingerprint, now)
        return AuthOutcome(status="ok", session_token=session.token)

    def verify_mfa(self, challenge_id: str, code: str, now: datetime | None = None) -> AuthOutcome:
        now = now if now is not None else self._clock.now()
        pending = self._challenges.get(challenge_id)
        if pending is None:
            return AuthOutcome(status="rejected", reason="unknown or used challenge")
        user_id, issued_at, fingerprint = pending
        if now - issued_at > CHALLENGE_TTL:
            del self._challenges[challenge_id]
            return AuthOutcome(status="rejected", reason="challenge expired")
        if self.is_locked_out(user_id, now):
            return AuthOutcome(status="locked", reason="account is locked, retry later")
        account = self.get_user(user_id)
        if not verify_totp(account.totp_secret, code, now,
                           step_seconds=self.config.totp_step_seconds):
            self._record_failure(user_id, now)
            self._event(EventType.SECURITY, actor=user_id, check="mfa_rejected")
            return AuthOutcome(status="rejected", reason="one-time code does not match")
        del self._challenges[challenge_id]
        session = self._open_session(account, {FACTOR_PASSWORD, FACTOR_TOTP}, fingerprint, now)
        self._event(EventType.SECURITY, actor=user_id, check="mfa_ok")
        return AuthOutcome(status="ok", session_token=session.token)

    def _open_session(
        self, account: UserAccount, factors: set[str], fingerprint: str | None, now: datetime
    ) -> Session:
        session = Session(
            token=secrets.token_hex(16),
            user_id=account.user_id,
            created_at=now,
            expires_at=now + timedelta(hours=self.config.session_ttl_hours),
            factors=frozenset(factors),
            fingerprint=fingerprint,
        )
        self._sessions[session.token] = session
        if fingerprint:
            self._link_fingerprints[session.token] = fingerprint
        self._event(EventType.SECURITY, actor=account.user_id, check="session_opened",
                    factors=",".join(sorted(factors)))
        return session

    def get_session(self, token: str | None, now: datetime | None = None) -> Session | None:
        if not token:
            return None
        now = now if now is not None else self._clock.now()
        session = self._sessions.get(token)
        if session is None:
            return None
        if now >= session.expires_at:
            del self._sessions[token]
            return None
        return session

    def required_factors(self, user_id: str) -> frozenset[str]:
        account = self._users.get(user_id)
        if self.config.mfa_required and account is not None and account.totp_secret:
            return frozenset({FACTOR_PASSWORD, FACTOR_TOTP})
        return frozenset({FACTOR_PASSWORD})

    def is_full_session(self, session: Session) -> bool:
        return self.required_factors(session.user_id) <= session.factors

    def step_up(self, token: str, code: str, now: datetime | None = None) -> bool:
        """Restore the second factor on a downgraded session."""
        now = now if now is not None else self._clock.now()
        session = self.get_session(token, now)
        if session is None:
            raise AuthError("no such session")
        account = self.get_user(session.user_id)
        if not account.totp_secret:
            raise AuthError("account has no second factor enrolled")
        if not verify_totp(account.totp_secret, code, now,
                           step_seconds=self.config.totp_step_seconds):
            self._record_failure(session.user_id, now)
            return False
        self._sessions[token] = replace(session, factors=session.factors | {FACTOR_TOTP})
        self._event(EventType.SECURITY, actor=session.user_id, check="session_restored")
        return True

    def downgrade_session(self, token: str, reason: str) -> None:
        session = self._sessions.get(token)
        if session is None:
            return
        self._sessions[token] = replace(session, factors=session.factors - {FACTOR_TOTP})
        self._event(EventType.SECURITY, actor=session.user_id,
                    check="session_downgraded", reason=reason)

    def revoke_session(self, token: str) -> None:
        self._sessions.pop(token, None)
        self._link_fingerprints.pop(token, None)

    # -- link integrity ------------------------------------------------------------

    def check_link_integrity(self, token: str, fingerprint: str, now: datetime | None = None) -> bool:
        """True when the link fingerprint changed mid-session.

        A change is treated as possible interception: the session loses its
        second factor and must prove it again before privileged calls.
        """
        session = self.get_session(token, now)
        if session is None:
            return False
        seen = self._link_fingerprints.get(token)
        if seen is None:
            self._link_fingerprints[token] = fingerprint
            return False
        if seen == fingerprint:
            return False
        self._link_fingerprints[token] = fingerprint
        self.downgrade_session(token, reason="link_fingerprint_changed")
        self._event(EventType.SECURITY, actor=session.user_id,
                    check="link_fingerprint_changed")
        self._emit_alert(
            kind="link_tamper",
            severity="high",
            message=f"connection fingerprint changed mid-session for {session.user_id}",
            entity_id=None,
            now=now if now is not None else self._clock.now(),
            skip_dedup=True,
        )
        return True

    # -- request filtering -----------------------------------------------------------

    def _count(self, reason: str) -> None:
        self.filter_counts[reason] = self.filter_counts.get(reason, 0) + 1

    def filter_request(self, meta: RequestMeta, now: datetime | None = None) -> FilterDecision:
        """Every API request passes through here; allowed iff no reason fires."""
        now = now if now is not None else self._clock.now()
        reasons: list[str] = []
        matched: list[str] = []

        if self.config.waf_enabled:
            bucket = self._buckets.get(meta.source)
            if bucket is None:
                bucket = TokenBucket(
                    rate=self.config.rate_limit.rps,
                    capacity=self.config.rate_limit.burst,
                    now=now,
                )
                self._buckets[meta.source] = bucket
            if not bucket.allow(now):
                reasons.append("rate_limited")
            if len(meta.body.encode("utf-8")) > self.config.body_size_limit:
                reasons.append("oversize_body")
            scanned = " ".join(p for p in (meta.path, meta.query, meta.body) if p)
            hits = detect_sqli(scanned)
            if hits:
                reasons.append("injection_detected")
                matched.extend(hits)

        if meta.privileged:
            session = self.get_session(meta.session_token, now)
            if session is None:
                reasons.append("no_session")
            else:
                if meta.fingerprint:
                    self.check_link_integrity(meta.session_token, meta.fingerprint, now)
                    session = self.get_session(meta.session_token, now)
                if not self.is_full_session(session):
                    reasons.append("mfa_incomplete")
                if self.credential_expired(session.user_id, now):
                    reasons.append("credential_expired")

        if reasons:
            for reason in reasons:
                self._count(reason)
            self._event(
                EventType.SECURITY, actor=meta.source, check="request_blocked",
                path=meta.path, reasons=",".join(reasons),
            )
            return FilterDecision(allowed=False, reasons=tuple(reasons), matched_patterns=tuple(matched))
        return FilterDecision(allowed=True)

    # -- alerts -------------------------------------------------------------------

    def _emit_alert(
        self, kind: str, severity: str, message: str, entity_id: str | None,
        now: datetime, skip_dedup: bool = False,
    ) -> AlertNotification | None:
        if not skip_dedup:
            key = (kind, entity_id)
            last = self._last_alert.get(key)
            if last is not None and (now - last).total_seconds() < self.config.alert_suppression_seconds:
                return None
            self._last_alert[key] = now
        alert = AlertNotification(
            ts=now,
            severity=severity,
            kind=kind,
            message=message,
            recipients=("user", self.config.designated_contact, "system_manager"),
            entity_id=entity_id,
        )
        self.alerts_sent.append(alert)
        if self._log is not None:
            self._log.append(
                ts=now,
                event_type=EventType.ALERT,
                actor="guard",
                entity_id=entity_id,
                details={
                    "kind": kind,
                    "severity": severity,
                    "message": message,
                    "recipients": ",".join(alert.recipients),
                },
            )
        for sink in self._alert_sinks:
            sink(alert)
        return alert

    def raise_security_alert(
        self, kind: str, message: str, entity_id: str | None = None,
        now: datetime | None = None,
    ) -> AlertNotification | None:
        """Ad-hoc high-severity alert (flood detected, sensors knocked out, ...)."""
        now = now if now is not None else self._clock.now()
        return self._emit_alert(
            kind=kind, severity="high", message=message, entity_id=entity_id, now=now
        )

    def raise_threshold_alert(
        self, entity_id: str, kind: str, value: float, threshold: float,
        now: datetime | None = None,
    ) -> AlertNotification | None:
        """Alert the user, the designated contact, and the system manager
        when a reading crosses its danger threshold. Repeats for the same
        entity inside the suppression window are dropped."""
        if not self.config.threshold_alerts_enabled:
            return None
        if value < threshold:
            return None
        now = now if now is not None else self._clock.now()
        return self._emit_alert(
            kind=kind,
            severity="high",
            message=f"{kind} reading {value:g} crossed threshold {threshold:g}",
            entity_id=entity_id,
            now=now,
        )

    # -- entry control ---------------------------------------------------------------

    def verify_entry(self, entity_id: str, token: str, now: datetime | None = None) -> EntryDecision:
        """Gate a door on the recognizer. Recognizer failure denies entry."""
        now = now if now is not None else self._clock.now()
        if not self.config.facial_recognition_enabled:
            return EntryDecision(allowed=True, reason="recognition_disabled")
        try:
            person = self._recognizer.identify(token)
        except Exception as exc:  # noqa: BLE001 - fail closed on any recognizer fault
            self._event(EventType.SECURITY, actor="guard", entity_id=entity_id,
                        check="recognizer_degraded", detail=str(exc))
            return EntryDecision(allowed=False, reason="recognizer_error")
        if person is None:
            self._event(EventType.SECURITY, actor="guard", entity_id=entity_id,
                        check="entry_denied")
            return EntryDecision(allowed=False, reason="not_recognized")
        self._event(EventType.SECURITY, actor=person, entity_id=entity_id,
                    check="entry_granted")
        return EntryDecision(allowed=True, reason="recognized", person=person)

    # -- sensor reactivation ------------------------------------------------------------

    def reactivate_sensor(
        self, token: str, entity_id: str, password: str, now: datetime | None = None
    ) -> None:
        """Turn a disabled sensor back on; demands a fresh password proof.

        This is the recovery path after sensors have been shut off by
        malware or mistake, so it is deliberately stricter than a normal
        privileged call.
        """
        now = now if now is not None else self._clock.now()
        if self._registry is None:
            raise NotFoundError("no registry attached")
        session = self.get_session(token, now)
        if session is None:
            raise AuthError("sign in before reactivating sensors")
        if not self.is_full_session(session):
            raise AuthError("complete sign-in before reactivating sensors")
        entity = self._registry.get_entity(entity_id)
        if entity.enabled:
            raise ValidationError(f"entity {entity.name!r} is not disabled")
        if self.config.reactivation_gate_enabled:
            if self.is_locked_out(session.user_id, now):
                raise AuthError("account is locked, retry later")
            account = self.get_user(session.user_id)
            if not verify_password(account.credential, password):
                self._record_failure(session.user_id, now)
                self._event(EventType.SECURITY, actor=session.user_id, entity_id=entity_id,
                            check="reactivation_rejected")
                raise AuthError("password does not match")
            if is_credential_expired(account.credential, now, self.config.password_max_age_days):
                raise CredentialExpiredError("password has aged out, change it first")
        self._registry.set_enabled(entity_id, True, actor=session.user_id, reason="reactivated")
        self._event(EventType.SECURITY, actor=session.user_id, entity_id=entity_id,
                    check="sensor_reactivated")
