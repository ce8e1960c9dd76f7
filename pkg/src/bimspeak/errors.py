"""Exception hierarchy shared across the engine."""

from __future__ import annotations


class BimspeakError(Exception):
    """Base class for all engine errors."""


# --- kernel ---------------------------------------------------------------


class KernelError(BimspeakError):
    pass


class InvalidSpecError(KernelError):
    """A wall detail violates a model invariant. `path` points at the field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.reason = message


class DuplicateNameError(KernelError):
    pass


class NotFoundError(KernelError):
    pass


class InUseError(KernelError):
    """Entity cannot be removed; `referrers` lists the blocking entity ids."""

    def __init__(self, message: str, referrers: list[str]):
        super().__init__(message)
        self.referrers = referrers


class InvalidGeometryError(KernelError):
    pass


class ProjectFileError(KernelError):
    pass


class SchemaVersionMismatchError(ProjectFileError):
    def __init__(self, found: object, expected: int):
        super().__init__(f"unsupported schema_version {found!r}, expected {expected}")
        self.found = found
        self.expected = expected


class CorruptFileError(ProjectFileError):
    """Project file is structurally broken. `location` names the bad spot."""

    def __init__(self, location: str, message: str):
        super().__init__(f"{location}: {message}")
        self.location = location


# --- gateway ---------------------------------------------------------------


class GatewayError(BimspeakError):
    pass


class BackendUnreachableError(GatewayError):
    pass


class RateLimitedError(GatewayError):
    def __init__(self, retry_after: float | None = None, message: str = "rate limited"):
        super().__init__(message if retry_after is None else f"{message} (retry after {retry_after}s)")
        self.retry_after = retry_after


class ResponseEmptyError(GatewayError):
    pass


class UnsupportedMediaError(GatewayError):
    pass


class InvalidScriptError(GatewayError):
    pass


# --- understanding ----------------------------------------------------------


class UnknownSlotError(BimspeakError):
    pass


class UnparseableAnswerError(BimspeakError):
    pass


# --- grounding / orchestration ----------------------------------------------


class RepairExhaustedError(BimspeakError):
    """Structured-output repair budget spent without a valid payload."""


class RetryExhaustedError(BimspeakError):
    """Execute/check loop ran out of attempts without a compliant result."""


class ProtocolError(BimspeakError):
    """Caller violated the session protocol (e.g. answer without a question)."""


class SessionClosedError(BimspeakError):
    pass
