"""Error codes shared by every tier.

Each service error carries a stable ``code`` that appears verbatim on the
wire (see the message table below), plus the HTTP status its envelope is
served with. ``InvalidField`` is domain-only: it shows up in seed-file
reject reports, never as a wire envelope.
"""

from __future__ import annotations

from typing import ClassVar


class ServiceError(Exception):
    """Base class for every error with a documented wire code."""

    code: ClassVar[str] = "ServiceError"
    http_status: ClassVar[int] = 400

    def __init__(self, detail: str = ""):
        super().__init__(detail or self.code)
        self.detail = detail

    @property
    def wire_message(self) -> str:
        return ERROR_TEXTS[self.code]


class InvalidPhone(ServiceError):
    code = "InvalidPhone"


class DuplicatePhone(ServiceError):
    code = "DuplicatePhone"
    http_status = 409


class WeakPassword(ServiceError):
    code = "WeakPassword"


class AuthFailed(ServiceError):
    code = "AuthFailed"
    http_status = 401


class InvalidToken(ServiceError):
    code = "InvalidToken"
    http_status = 401


class UnknownUser(ServiceError):
    code = "UnknownUser"
    http_status = 404


class UnknownZone(ServiceError):
    code = "UnknownZone"
    http_status = 404


class UnknownTag(ServiceError):
    code = "UnknownTag"
    http_status = 404


class NotCovered(ServiceError):
    code = "NotCovered"
    http_status = 404


class Underdetermined(ServiceError):
    code = "Underdetermined"


class DegenerateGeometry(ServiceError):
    code = "DegenerateGeometry"


class NotFound(ServiceError):
    code = "NotFound"
    http_status = 404


class NotAuthorized(ServiceError):
    code = "NotAuthorized"
    http_status = 403


class WrongZone(ServiceError):
    code = "WrongZone"


class CspUnreachable(ServiceError):
    code = "CspUnreachable"
    http_status = 502


class NoCuForZone(ServiceError):
    code = "NoCuForZone"
    http_status = 503


class ConfigError(ServiceError):
    code = "ConfigError"
    http_status = 500


class BindError(ServiceError):
    code = "BindError"
    http_status = 500


class ParseError(ServiceError):
    code = "ParseError"


class ZoneMismatch(ServiceError):
    code = "ZoneMismatch"


class StepFailed(ServiceError):
    code = "StepFailed"

    def __init__(self, step_index: int, detail: str = ""):
        super().__init__(detail)
        self.step_index = step_index


class InvalidField(ServiceError):
    # Domain-only: rejected seed records, never a wire envelope.
    code = "InvalidField"


# Wire text per code. Every code maps to itself except AuthFailed, whose
# documented login-failure text is "Authentication Failed".
WIRE_CODES = [
    "InvalidPhone", "DuplicatePhone", "WeakPassword", "AuthFailed",
    "InvalidToken", "UnknownUser", "UnknownZone", "UnknownTag", "NotCovered",
    "Underdetermined", "DegenerateGeometry", "NotFound", "NotAuthorized",
    "WrongZone", "CspUnreachable", "NoCuForZone", "PartialResult",
    "ConfigError", "BindError", "ParseError", "ZoneMismatch", "StepFailed",
]

ERROR_TEXTS: dict[str, str] = {code: code for code in WIRE_CODES}
ERROR_TEXTS["AuthFailed"] = "Authentication Failed"
ERROR_TEXTS["InvalidField"] = "InvalidField"  # domain-only, see above

#: message used on envelopes that carry a result with unreachable zones
PARTIAL_RESULT = "PartialResult"
