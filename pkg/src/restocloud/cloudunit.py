"""Per-zone Cloud Unit: the local restaurant store, direct service of
subscribed categories, and escalation of everything else to the CSP.

The unit talks to the LSP only to validate tokens (introspection, cached
for a couple of seconds) and to the CSP only through an injected escalation
callable, so the core is testable without sockets.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Protocol

from .domain import Restaurant, validate_restaurant
from .errors import (
    CspUnreachable,
    NotAuthorized,
    NotFound,
    ParseError,
    ServiceError,
    WrongZone,
)
from .geolocation import Zone, ZoneMap

INTROSPECTION_CACHE_SECONDS = 2.0


@dataclass(frozen=True)
class TokenInfo:
    """What the LSP knows about a presented bearer token."""

    user_id: str
    subscriptions: frozenset[str]
    current_zone: str | None


@dataclass(frozen=True)
class EscalationRequest:
    request_id: str
    user_id: str
    origin_zone: str
    category: str


@dataclass(frozen=True)
class EscalationOutcome:
    """What the CSP sends back for an escalated category."""

    grouped: dict[str, list[Restaurant]]
    granted_subscription: bool
    failed_zones: tuple[str, ...] = ()


@dataclass(frozen=True)
class QueryResult:
    restaurants: list[Restaurant]
    served_by: str  # "local" | "escalated"
    source_zone: str
    failed_zones: tuple[str, ...] = ()


@dataclass(frozen=True)
class RejectedRecord:
    line: int
    code: str
    detail: str


@dataclass(frozen=True)
class IngestReport:
    loaded: int
    rejected: list[RejectedRecord] = field(default_factory=list)


class TokenChecker(Protocol):
    def __call__(self, token: str) -> TokenInfo: ...


class RestaurantStore:
    """Records by id plus the food-style inverted index.

    Read-mostly: lookups share the lock briefly; ingest swaps in whole
    records so readers never see a partial load.
    """

    def __init__(self):
        self._lock = threading.Lock()
        self._by_id: dict[str, Restaurant] = {}
        self._by_category: dict[str, set[str]] = {}

    def upsert(self, record: Restaurant) -> None:
        with self._lock:
            prior = self._by_id.get(record.restaurant_id)
            if prior is not None:
                self._by_category[prior.food_style].discard(prior.restaurant_id)
            self._by_id[record.restaurant_id] = record
            self._by_category.setdefault(record.food_style, set()).add(record.restaurant_id)

    def get(self, restaurant_id: str) -> Restaurant:
        with self._lock:
            try:
                return self._by_id[restaurant_id]
            except KeyError:
                raise NotFound(restaurant_id) from None

    def all_sorted(self) -> list[Restaurant]:
        with self._lock:
            return sorted(self._by_id.values(), key=lambda r: r.restaurant_id)

    def by_category(self, category: str) -> list[Restaurant]:
        with self._lock:
            ids = self._by_category.get(category, set())
            return sorted((self._by_id[i] for i in ids), key=lambda r: r.restaurant_id)

    def categories(self) -> set[str]:
        with self._lock:
            return {c for c, ids in self._by_category.items() if ids}

    def index_snapshot(self) -> dict[str, set[str]]:
        with self._lock:
            return {c: set(ids) for c, ids in self._by_category.items() if ids}

    def __len__(self) -> int:
        with self._lock:
            return len(self._by_id)


def parse_seed_line(line_no: int, line: str) -> Restaurant:
    """One seed-file line to a Restaurant; shape problems are ParseError."""
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {line_no}: invalid JSON ({exc.msg})") from None
    if not isinstance(obj, dict):
        raise ParseError(f"line {line_no}: expected an object")
    missing = [k for k in ("restaurant_id", "name", "address", "contact",
                           "food_style", "x", "y", "zone_id") if k not in obj]
    if missing:
        raise ParseError(f"line {line_no}: missing {', '.join(missing)}")
    try:
        return Restaurant.from_wire(obj)
    except (TypeError, ValueError) as exc:
        # pydantic shape errors; domain ServiceErrors pass through untouched
        raise ParseError(f"line {line_no}: {exc}") from None


def ingest_restaurants(seed_file: str | Path, zone: Zone, store: RestaurantStore) -> IngestReport:
    """Load one JSON-lines seed file into the store.

    Malformed lines abort with ParseError (line number included); records
    that fail validation for this zone are skipped and reported.
    """
    zones = ZoneMap(zones=(zone,))
    loaded = 0
    rejected: list[RejectedRecord] = []
    text = Path(seed_file).read_text(encoding="utf-8")
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = parse_seed_line(line_no, line)
        except ServiceError as exc:
            if exc.code == "ParseError":
                raise
            rejected.append(RejectedRecord(line_no, exc.code, exc.detail))
            continue
        if record.zone_id != zone.zone_id:
            rejected.append(
                RejectedRecord(line_no, "ZoneMismatch",
                               f"{record.restaurant_id} belongs to zone {record.zone_id}")
            )
            continue
        try:
            validate_restaurant(record, zones)
        except ServiceError as exc:
            rejected.append(RejectedRecord(line_no, exc.code, exc.detail))
            continue
        store.upsert(record)
        loaded += 1
    return IngestReport(loaded=loaded, rejected=rejected)


class CloudUnit:
    """One Cloud Unit node serving one zone."""

    def __init__(
        self,
        zone: Zone,
        store: RestaurantStore,
        token_checker: TokenChecker,
        escalate: Callable[[EscalationRequest], EscalationOutcome] | None = None,
        cache_seconds: float = INTROSPECTION_CACHE_SECONDS,
    ):
        self.zone = zone
        self.store = store
        self._check_token = token_checker
        self._escalate = escalate
        self._cache_seconds = cache_seconds
        self._cache_lock = threading.Lock()
        self._token_cache: dict[str, tuple[float, TokenInfo]] = {}

    @property
    def zone_id(self) -> str:
        return self.zone.zone_id

    # -- token validation via the LSP, with a short cache ------------------

    def token_info(self, token: str) -> TokenInfo:
        now = time.monotonic()
        with self._cache_lock:
            hit = self._token_cache.get(token)
            if hit is not None and now - hit[0] <= self._cache_seconds:
                return hit[1]
        info = self._check_token(token)  # InvalidToken propagates
        with self._cache_lock:
            self._token_cache[token] = (now, info)
        return info

    def _forget_token(self, token: str) -> None:
        with self._cache_lock:
            self._token_cache.pop(token, None)

    # -- Algorithm 3: enumerate the zone's restaurants ---------------------

    def list_restaurants(self, zone_id: str) -> list[Restaurant]:
        if zone_id != self.zone_id:
            raise WrongZone(f"this unit serves {self.zone_id}, not {zone_id}")
        return self.store.all_sorted()

    # -- Algorithm 1 lines 10-15: serve or escalate ------------------------

    def handle_query(self, token: str, category: str) -> QueryResult:
        info = self.token_info(token)
        if info.current_zone != self.zone_id:
            raise WrongZone(
                f"token is in zone {info.current_zone}, this unit serves {self.zone_id}"
            )
        if category in info.subscriptions:
            return QueryResult(
                restaurants=self.store.by_category(category),
                served_by="local",
                source_zone=self.zone_id,
            )
        if self._escalate is None:
            raise CspUnreachable("no escalation route configured")
        request = EscalationRequest(
            request_id=uuid.uuid4().hex,
            user_id=info.user_id,
            origin_zone=self.zone_id,
            category=category,
        )
        outcome = self._escalate(request)  # CspUnreachable propagates
        if outcome.granted_subscription:
            # the LSP-side grant makes the cached introspection stale
            self._forget_token(token)
        flat = [r for zone_id in sorted(outcome.grouped) for r in outcome.grouped[zone_id]]
        return QueryResult(
            restaurants=flat,
            served_by="escalated",
            source_zone=self.zone_id,
            failed_zones=outcome.failed_zones,
        )

    # -- Algorithm 4 via Algorithm 1 line 8: the detail read ----------------

    def get_restaurant_info(self, token: str, restaurant_id: str) -> Restaurant:
        info = self.token_info(token)
        record = self.store.get(restaurant_id)
        if record.food_style not in info.subscriptions:
            raise NotAuthorized(
                f"user {info.user_id} is not subscribed to {record.food_style}"
            )
        return record
