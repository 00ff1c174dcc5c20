"""Exception hierarchy shared by all hub subsystems."""

from __future__ import annotations


class HubError(Exception):
    """Base class for every error the hub raises on purpose."""


class NotFoundError(HubError):
    """Referenced entity, location, rule, session or panel does not exist."""


class ValidationError(HubError):
    """Input rejected before any state was touched.

    ``problems`` lists every offending field/reference so callers can show
    all of them at once.
    """

    def __init__(self, message: str, problems: list[str] | None = None):
        super().__init__(message)
        self.problems = problems if problems is not None else [message]


class TypeMismatchError(ValidationError):
    """State variant does not match the entity kind."""


class RangeError(ValidationError):
    """Numeric input outside its allowed range."""


class AuthError(HubError):
    """Actor is not authenticated or not sufficiently authenticated."""


class CredentialExpiredError(AuthError):
    """Password is past its rotation deadline; rotation is required first."""


class ConfigurationError(HubError):
    """The hub or one of its endpoints is wired up wrong."""


class DegradedModeError(HubError):
    """Durable storage failed; privileged writes are refused until recovery."""
