"""HTTP clients: node-to-node seams (CU->LSP, CU->CSP, CSP->CU) and the
thin user client the CLI and scenario runner drive.

Internal clients turn error envelopes back into the matching ServiceError
and transport failures into the documented unreachability codes.
"""

from __future__ import annotations

from typing import Any

import httpx

from ..cloudunit import EscalationOutcome, EscalationRequest, TokenInfo
from ..domain import Restaurant
from ..errors import ConfigError, CspUnreachable, ServiceError
from .envelope import TEXT_TO_CODE

INTERNAL_TIMEOUT_SECONDS = 2.0

_ERROR_CLASSES: dict[str, type[ServiceError]] = {
    cls.code: cls for cls in ServiceError.__subclasses__()
}


def http_url(endpoint: str) -> str:
    """host:port or URL to a base URL."""
    if endpoint.startswith(("http://", "https://")):
        return endpoint.rstrip("/")
    return f"http://{endpoint}".rstrip("/")


def raise_for_envelope(envelope: dict[str, Any]) -> dict[str, Any]:
    """Return the envelope if ok, else raise the matching ServiceError."""
    if envelope.get("status") == "ok":
        return envelope
    code = TEXT_TO_CODE.get(envelope.get("message", ""), "ConfigError")
    raise _ERROR_CLASSES.get(code, ConfigError)(envelope.get("message", ""))


class LspHttpClient:
    """What CUs and the CSP need from the LSP."""

    def __init__(self, endpoint: str, timeout: float = INTERNAL_TIMEOUT_SECONDS):
        self._client = httpx.Client(base_url=http_url(endpoint), timeout=timeout)

    def introspect(self, token: str) -> TokenInfo:
        try:
            resp = self._client.post("/lsp/introspect", json={"token": token})
        except httpx.HTTPError as exc:
            raise ConfigError(f"LSP unreachable: {exc}") from None
        data = raise_for_envelope(resp.json())["data"]
        return TokenInfo(
            user_id=data["user_id"],
            subscriptions=frozenset(data["subscriptions"]),
            current_zone=data["current_zone"],
        )

    def subscribe(self, user_id: str, category: str) -> list[str]:
        try:
            resp = self._client.post(
                "/lsp/subscribe", json={"user_id": user_id, "category": category}
            )
        except httpx.HTTPError as exc:
            raise ConfigError(f"LSP unreachable: {exc}") from None
        return raise_for_envelope(resp.json())["data"]["subscriptions"]

    def close(self) -> None:
        self._client.close()


class CspHttpClient:
    """The CU side of escalation, plus boot-time registration."""

    def __init__(self, endpoint: str, timeout: float = INTERNAL_TIMEOUT_SECONDS):
        self._client = httpx.Client(base_url=http_url(endpoint), timeout=timeout)

    def escalate(self, request: EscalationRequest) -> EscalationOutcome:
        try:
            resp = self._client.post(
                "/csp/escalate",
                json={
                    "request_id": request.request_id,
                    "user_id": request.user_id,
                    "origin_zone": request.origin_zone,
                    "category": request.category,
                },
            )
        except httpx.HTTPError as exc:
            raise CspUnreachable(str(exc)) from None
        data = raise_for_envelope(resp.json())["data"]
        grouped = {
            zone_id: [Restaurant.from_wire(r) for r in rows]
            for zone_id, rows in data["grouped"].items()
        }
        return EscalationOutcome(
            grouped=grouped,
            granted_subscription=data["granted_subscription"],
            failed_zones=tuple(data.get("failed_zones", [])),
        )

    def register_cu(self, zone_id: str, endpoint: str) -> None:
        try:
            resp = self._client.post(
                "/csp/register_cu", json={"zone_id": zone_id, "endpoint": endpoint}
            )
        except httpx.HTTPError as exc:
            raise CspUnreachable(str(exc)) from None
        raise_for_envelope(resp.json())

    def close(self) -> None:
        self._client.close()


def cu_search_http(endpoint: str, category: str,
                   timeout: float = INTERNAL_TIMEOUT_SECONDS) -> list[Restaurant]:
    """The CSP's fan-out call to one CU; raises on any failure so the
    fan-out can mark the zone failed."""
    with httpx.Client(base_url=http_url(endpoint), timeout=timeout) as client:
        resp = client.post("/cu/search", json={"category": category})
        data = raise_for_envelope(resp.json())["data"]
        return [Restaurant.from_wire(r) for r in data["restaurants"]]


class UserClient:
    """Thin client over the documented endpoints; returns raw envelopes."""

    def __init__(self, lsp_endpoint: str | None = None, timeout: float = 10.0):
        self._lsp = http_url(lsp_endpoint) if lsp_endpoint else None
        self._client = httpx.Client(timeout=timeout)

    def close(self) -> None:
        self._client.close()

    def _post(self, base: str, path: str, body: dict, token: str | None = None) -> dict:
        headers = {"Authorization": f"Bearer {token}"} if token else {}
        return self._client.post(base + path, json=body, headers=headers).json()

    def _get(self, base: str, path: str, token: str | None = None) -> dict:
        headers = {"Authorization": f"Bearer {token}"} if token else {}
        return self._client.get(base + path, headers=headers).json()

    # -- LSP ---------------------------------------------------------------

    def register(self, phone: str, password: str, preferences: list[str]) -> dict:
        body = {"phone": phone, "password": password, "preferences": preferences}
        return self._post(self._lsp, "/lsp/register", body)

    def login(self, user_id: str, password: str) -> dict:
        return self._post(self._lsp, "/lsp/login", {"user_id": user_id, "password": password})

    def locate_rfid(self, tag: str) -> dict:
        return self._post(self._lsp, "/locate", {"method": "rfid", "tag": tag})

    def locate_gps(self, observations: list[tuple[float, float, float]]) -> dict:
        body = {
            "method": "gps",
            "observations": [{"bx": bx, "by": by, "d": d} for bx, by, d in observations],
        }
        return self._post(self._lsp, "/locate", body)

    def record_presence(self, token: str, zone_id: str) -> dict:
        return self._post(self._lsp, "/lsp/presence", {"token": token, "zone_id": zone_id})

    def presence_count(self, zone_id: str) -> dict:
        return self._get(self._lsp, f"/lsp/presence/{zone_id}")

    # -- CU ------------------------------------------------------------------

    def restaurants(self, cu_endpoint: str, token: str) -> dict:
        return self._get(http_url(cu_endpoint), "/cu/restaurants", token=token)

    def query(self, cu_endpoint: str, token: str, category: str) -> dict:
        return self._post(http_url(cu_endpoint), "/cu/query", {"category": category}, token=token)

    def restaurant_info(self, cu_endpoint: str, token: str, restaurant_id: str) -> dict:
        return self._get(http_url(cu_endpoint), f"/cu/restaurants/{restaurant_id}", token=token)

    def seed(self, cu_endpoint: str, records: list[dict]) -> dict:
        return self._post(http_url(cu_endpoint), "/cu/seed", {"records": records})

    def healthz(self, endpoint: str) -> dict:
        return self._get(http_url(endpoint), "/healthz")
