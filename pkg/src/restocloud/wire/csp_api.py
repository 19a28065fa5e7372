"""HTTP surface of the Cloud Service Provider."""

from __future__ import annotations

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from ..cloudunit import EscalationRequest
from ..csp import CspNode
from ..errors import PARTIAL_RESULT
from .envelope import install_envelope_handlers, ok_envelope
from .schemas import EscalateRequest, RegisterCuRequest


def create_csp_app(node: CspNode) -> FastAPI:
    app = FastAPI(title="restocloud-csp", docs_url=None, redoc_url=None)
    install_envelope_handlers(app)
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.post("/csp/register_cu")
    def register_cu(body: RegisterCuRequest):
        node.register_cu(body.zone_id, body.endpoint)
        return ok_envelope({})

    @app.post("/csp/escalate")
    def escalate(body: EscalateRequest):
        outcome = node.handle_escalation(
            EscalationRequest(
                request_id=body.request_id,
                user_id=body.user_id,
                origin_zone=body.origin_zone,
                category=body.category,
            )
        )
        grouped = {
            zone_id: [r.wire_dict() for r in rows]
            for zone_id, rows in sorted(outcome.grouped.items())
        }
        message = PARTIAL_RESULT if outcome.failed_zones else "ok"
        return ok_envelope(
            {
                "grouped": grouped,
                "granted_subscription": outcome.granted_subscription,
                "failed_zones": list(outcome.failed_zones),
            },
            message=message,
        )

    @app.get("/healthz")
    def healthz():
        return ok_envelope({"status": "ok"})

    return app
