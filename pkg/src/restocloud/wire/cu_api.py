"""HTTP surface of a Cloud Unit.

User-facing routes take a bearer token; /cu/search and /cu/seed are
internal (CSP fan-out and operator seeding).
"""

from __future__ import annotations

import threading

from fastapi import Depends, FastAPI
from fastapi.middleware.cors import CORSMiddleware

from ..cloudunit import CloudUnit
from ..domain import Restaurant, canonicalize_category, validate_restaurant
from ..errors import PARTIAL_RESULT, ParseError, ServiceError, WrongZone
from ..geolocation import ZoneMap
from .envelope import install_envelope_handlers, ok_envelope
from .schemas import QueryRequest, SearchRequest, SeedRequest, bearer_token


class CuState:
    """Mutable node status: is this unit registered with the CSP?"""

    def __init__(self):
        self._lock = threading.Lock()
        self._registered = False

    @property
    def registered(self) -> bool:
        with self._lock:
            return self._registered

    @registered.setter
    def registered(self, value: bool) -> None:
        with self._lock:
            self._registered = value


def create_cu_app(unit: CloudUnit, state: CuState | None = None) -> FastAPI:
    state = state or CuState()
    app = FastAPI(title=f"restocloud-cu-{unit.zone_id}", docs_url=None, redoc_url=None)
    install_envelope_handlers(app)
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.get("/cu/restaurants")
    def list_restaurants(token: str = Depends(bearer_token)):
        info = unit.token_info(token)
        if info.current_zone != unit.zone_id:
            raise WrongZone(
                f"token is in zone {info.current_zone}, this unit serves {unit.zone_id}"
            )
        rows = unit.list_restaurants(unit.zone_id)
        return ok_envelope({"restaurants": [r.wire_dict() for r in rows]})

    @app.post("/cu/query")
    def query(body: QueryRequest, token: str = Depends(bearer_token)):
        category = canonicalize_category(body.category)
        result = unit.handle_query(token, category)
        message = PARTIAL_RESULT if result.failed_zones else "ok"
        return ok_envelope(
            {
                "restaurants": [r.wire_dict() for r in result.restaurants],
                "served_by": result.served_by,
                "source_zone": result.source_zone,
                "failed_zones": list(result.failed_zones),
            },
            message=message,
        )

    @app.get("/cu/restaurants/{restaurant_id}")
    def restaurant_info(restaurant_id: str, token: str = Depends(bearer_token)):
        record = unit.get_restaurant_info(token, restaurant_id)
        return ok_envelope({"restaurant": record.wire_dict()})

    @app.post("/cu/search")
    def search(body: SearchRequest):
        # CSP-internal: the fan-out side of cross-location search
        category = canonicalize_category(body.category)
        rows = unit.store.by_category(category)
        return ok_envelope({"restaurants": [r.wire_dict() for r in rows]})

    @app.post("/cu/seed")
    def seed(body: SeedRequest):
        # operator-internal: bulk ingest into a live unit
        zones = ZoneMap(zones=(unit.zone,))
        loaded = 0
        rejected = []
        for index, raw in enumerate(body.records):
            try:
                record = Restaurant.from_wire(raw)
            except ServiceError as exc:
                rejected.append({"index": index, "code": exc.code, "detail": exc.detail})
                continue
            except (KeyError, TypeError, ValueError) as exc:
                raise ParseError(f"record {index}: {exc}") from None
            try:
                if record.zone_id != unit.zone_id:
                    rejected.append(
                        {"index": index, "code": "ZoneMismatch",
                         "detail": f"record belongs to zone {record.zone_id}"}
                    )
                    continue
                validate_restaurant(record, zones)
            except ServiceError as exc:
                rejected.append({"index": index, "code": exc.code, "detail": exc.detail})
                continue
            unit.store.upsert(record)
            loaded += 1
        return ok_envelope({"loaded": loaded, "rejected": rejected})

    @app.get("/healthz")
    def healthz():
        return ok_envelope({"status": "ok" if state.registered else "degraded"})

    return app
