"""Cloud Service Provider: the CU directory, escalated-request routing, and
the cross-location category search that no single CU can perform.

CU queries and LSP grants are injected callables so the fan-out logic can
run against in-process stores in tests and against HTTP in production.
"""

from __future__ import annotations

import json
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable

from .cloudunit import EscalationOutcome, EscalationRequest
from .domain import Restaurant
from .errors import NoCuForZone, UnknownZone
from .geolocation import ZoneMap

HEARTBEAT_INTERVAL_SECONDS = 5.0
MISSED_BEATS_UNTIL_DEAD = 3
FANOUT_TIMEOUT_SECONDS = 2.0

#: queries one CU for a category: (endpoint, category) -> records
CuSearch = Callable[[str, str], list[Restaurant]]
#: grants a subscription at the LSP: (user_id, category) -> subscription list
LspGrant = Callable[[str, str], list[str]]


class CuDirectory:
    """Zone -> registered CU endpoints with heartbeat timestamps.

    An endpoint is live while its last heartbeat is younger than
    ``interval * missed_beats``. Round-robin selection is per zone and
    follows registration order.
    """

    def __init__(
        self,
        heartbeat_interval: float = HEARTBEAT_INTERVAL_SECONDS,
        missed_beats: int = MISSED_BEATS_UNTIL_DEAD,
    ):
        self._lock = threading.Lock()
        self._entries: dict[str, dict[str, float]] = {}  # zone -> endpoint -> last beat
        self._rr: dict[str, int] = {}
        self._ttl = heartbeat_interval * missed_beats

    def register(self, zone_id: str, endpoint: str, now: float | None = None) -> None:
        now = time.monotonic() if now is None else now
        with self._lock:
            self._entries.setdefault(zone_id, {})[endpoint] = now

    def live_endpoints(self, zone_id: str, now: float | None = None) -> list[str]:
        now = time.monotonic() if now is None else now
        with self._lock:
            entries = self._entries.get(zone_id, {})
            return [ep for ep, beat in entries.items() if now - beat <= self._ttl]

    def route(self, zone_id: str, now: float | None = None) -> str:
        live = self.live_endpoints(zone_id, now)
        if not live:
            raise NoCuForZone(zone_id)
        with self._lock:
            idx = self._rr.get(zone_id, 0)
            self._rr[zone_id] = idx + 1
        return live[idx % len(live)]

    def zones_with_endpoints(self, now: float | None = None) -> list[str]:
        now = time.monotonic() if now is None else now
        with self._lock:
            zones = list(self._entries)
        return sorted(z for z in zones if self.live_endpoints(z, now))


class AuditLog:
    """Line-delimited escalation log: one JSON record per escalation."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()

    def append(self, request: EscalationRequest) -> None:
        line = json.dumps(
            {
                "request_id": request.request_id,
                "user_id": request.user_id,
                "origin_zone": request.origin_zone,
                "category": request.category,
                "timestamp": time.time(),
            },
            sort_keys=True,
        )
        with self._lock:
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(line + "\n")

    def entries(self) -> list[dict]:
        if not self.path.exists():
            return []
        with self.path.open(encoding="utf-8") as fh:
            return [json.loads(line) for line in fh if line.strip()]


class CspNode:
    """The apex node: directory, escalation handling, cross-zone search."""

    def __init__(
        self,
        zone_map: ZoneMap,
        cu_search: CuSearch,
        lsp_grant: LspGrant,
        audit_path: str | Path = "csp-audit.jsonl",
        grant_on_escalation: bool = True,
        heartbeat_interval: float = HEARTBEAT_INTERVAL_SECONDS,
        fanout_timeout: float = FANOUT_TIMEOUT_SECONDS,
    ):
        self.zone_map = zone_map
        self.directory = CuDirectory(heartbeat_interval=heartbeat_interval)
        self.audit = AuditLog(audit_path)
        self.grant_on_escalation = grant_on_escalation
        self._cu_search = cu_search
        self._lsp_grant = lsp_grant
        self._fanout_timeout = fanout_timeout

    def register_cu(self, zone_id: str, endpoint: str) -> None:
        if not self.zone_map.has_zone(zone_id):
            raise UnknownZone(zone_id)
        self.directory.register(zone_id, endpoint)

    def cross_location_search(
        self, category: str
    ) -> tuple[dict[str, list[Restaurant]], list[str]]:
        """Fan out to one CU per zone, in parallel with per-call timeouts.

        Returns (grouped results keyed by zone, zones that failed). Empty
        groups are dropped so "category present nowhere" is an empty map.
        """
        zones = self.directory.zones_with_endpoints()
        grouped: dict[str, list[Restaurant]] = {}
        failed: list[str] = []
        if not zones:
            return grouped, failed

        def query(zone_id: str) -> list[Restaurant]:
            endpoint = self.directory.route(zone_id)
            return self._cu_search(endpoint, category)

        # parallel fan-out: the total wait is bounded by the timeout, not
        # by the sum over zones
        pool = ThreadPoolExecutor(max_workers=max(len(zones), 1))
        try:
            futures = {zone_id: pool.submit(query, zone_id) for zone_id in zones}
            deadline = time.monotonic() + self._fanout_timeout
            for zone_id in zones:
                try:
                    remaining = max(0.0, deadline - time.monotonic())
                    rows = futures[zone_id].result(timeout=remaining)
                except Exception:
                    failed.append(zone_id)
                    continue
                if rows:
                    grouped[zone_id] = sorted(rows, key=lambda r: r.restaurant_id)
        finally:
            pool.shutdown(wait=False, cancel_futures=True)
        return grouped, failed

    def handle_escalation(self, request: EscalationRequest) -> EscalationOutcome:
        """Serve the complex service: search every zone, grant the category
        so the next identical query is local, and audit the request."""
        grouped, failed = self.cross_location_search(request.category)
        granted = False
        if self.grant_on_escalation:
            self._lsp_grant(request.user_id, request.category)  # UnknownUser propagates
            granted = True
        self.audit.append(request)
        return EscalationOutcome(
            grouped=grouped,
            granted_subscription=granted,
            failed_zones=tuple(sorted(failed)),
        )
