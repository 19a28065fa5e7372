"""HTTP surface of the Location Service Provider.

Owns identity, sessions, presence, and the /locate resolver (Algorithm 2's
coordinates are reported to the LSP, so the resolver lives here).
"""

from __future__ import annotations

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from ..errors import ParseError
from ..geolocation import BeaconObservation, GeoPoint
from ..lsp import AUTH_OK_MESSAGE, LspNode
from .envelope import install_envelope_handlers, ok_envelope
from .schemas import (
    IntrospectRequest,
    LocateRequest,
    LoginRequest,
    PresenceRequest,
    RegisterRequest,
    SubscribeRequest,
)


def create_lsp_app(node: LspNode) -> FastAPI:
    app = FastAPI(title="restocloud-lsp", docs_url=None, redoc_url=None)
    install_envelope_handlers(app)
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.post("/lsp/register")
    def register(body: RegisterRequest):
        user_id = node.register_user(body.phone, body.password, body.preferences)
        return ok_envelope({"user_id": user_id})

    @app.post("/lsp/login")
    def login(body: LoginRequest):
        token = node.authenticate(body.user_id, body.password)
        return ok_envelope({"token": token.token}, message=AUTH_OK_MESSAGE)

    @app.post("/lsp/introspect")
    def introspect(body: IntrospectRequest):
        record, subscriptions = node.introspect(body.token)
        return ok_envelope(
            {
                "user_id": record.user_id,
                "subscriptions": sorted(subscriptions),
                "current_zone": record.current_zone,
            }
        )

    @app.post("/lsp/subscribe")
    def subscribe(body: SubscribeRequest):
        subscriptions = node.subscribe(body.user_id, body.category)
        return ok_envelope({"subscriptions": sorted(subscriptions)})

    @app.post("/lsp/presence")
    def record_presence(body: PresenceRequest):
        node.record_presence(body.token, body.zone_id)
        return ok_envelope({})

    @app.get("/lsp/presence/{zone_id}")
    def count_users(zone_id: str):
        return ok_envelope({"count": node.count_users(zone_id)})

    @app.post("/locate")
    def locate(body: LocateRequest):
        if body.method == "gps":
            if not body.observations:
                raise ParseError("gps locate needs observations")
            observations = [
                BeaconObservation(GeoPoint(o.bx, o.by), o.d) for o in body.observations
            ]
            zone_id, point = node.locate_gps(observations)
        else:
            if body.tag is None:
                raise ParseError("rfid locate needs a tag")
            zone_id, point = node.locate_rfid(body.tag)
        return ok_envelope({"zone_id": zone_id, "x": point.x, "y": point.y})

    @app.get("/healthz")
    def healthz():
        return ok_envelope({"status": "ok"})

    return app
