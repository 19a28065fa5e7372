"""Request bodies for every endpoint, plus the bearer-token dependency."""

from __future__ import annotations

from typing import Any, Literal

from fastapi import Header
from pydantic import BaseModel

from ..errors import InvalidToken


class RegisterRequest(BaseModel):
    phone: str
    password: str
    preferences: list[str] = []


class LoginRequest(BaseModel):
    user_id: str
    password: str


class IntrospectRequest(BaseModel):
    token: str


class SubscribeRequest(BaseModel):
    user_id: str
    category: str


class PresenceRequest(BaseModel):
    token: str
    zone_id: str


class ObservationIn(BaseModel):
    bx: float
    by: float
    d: float


class LocateRequest(BaseModel):
    method: Literal["gps", "rfid"]
    observations: list[ObservationIn] | None = None
    tag: str | None = None


class QueryRequest(BaseModel):
    category: str


class SearchRequest(BaseModel):
    category: str


class SeedRequest(BaseModel):
    records: list[dict[str, Any]]


class RegisterCuRequest(BaseModel):
    zone_id: str
    endpoint: str


class EscalateRequest(BaseModel):
    request_id: str
    user_id: str
    origin_zone: str
    category: str


def bearer_token(authorization: str | None = Header(default=None)) -> str:
    """Token from an ``Authorization: Bearer <token>`` header."""
    if not authorization or not authorization.startswith("Bearer "):
        raise InvalidToken("missing bearer token")
    token = authorization[len("Bearer "):].strip()
    if not token:
        raise InvalidToken("empty bearer token")
    return token
