"""Exception types shared across the package."""

from __future__ import annotations


class SpecError(ValueError):
    """Invalid JSON input; carries a JSON-pointer-style path to the offending field."""

    def __init__(self, path: str, message: str) -> None:
        self.path = path if path else "/"
        self.reason = message
        super().__init__(f"{self.path}: {message}")


class CapError(ValueError):
    """A configurable size cap was exceeded."""


class ConsistencyError(RuntimeError):
    """An identity or inequality that holds for every valid input failed.

    This means corrupted inputs or an implementation bug, never a legitimate
    outcome.  The payload carries enough data to replay the failing instance.
    """

    def __init__(self, message: str, payload: dict | None = None) -> None:
        super().__init__(message)
        self.payload = payload or {}
