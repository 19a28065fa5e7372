"""The uniform wire wrapper: every response body is an Envelope.

Success: {"status": "ok", "message": ..., "data": {...}}.
Error:   {"status": "error", "message": <documented error text>} — no data.
"""

from __future__ import annotations

from typing import Any, Literal

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel
from starlette.exceptions import HTTPException as StarletteHTTPException

from ..errors import ERROR_TEXTS, InvalidField, ServiceError


class Envelope(BaseModel):
    status: Literal["ok", "error"]
    message: str
    data: dict[str, Any] | None = None


def ok_envelope(data: dict[str, Any], message: str = "ok") -> dict[str, Any]:
    return {"status": "ok", "message": message, "data": data}


def error_envelope(code: str) -> dict[str, Any]:
    return {"status": "error", "message": ERROR_TEXTS[code]}


def error_response(code: str, http_status: int) -> JSONResponse:
    return JSONResponse(status_code=http_status, content=error_envelope(code))


#: reverse lookup: wire text back to error code (texts are unique)
TEXT_TO_CODE = {text: code for code, text in ERROR_TEXTS.items() if code != "InvalidField"}


def install_envelope_handlers(app: FastAPI) -> None:
    """Force every error path through the documented envelope texts.

    InvalidField never crosses the wire: at this boundary it is malformed
    input, i.e. ParseError. FastAPI's own validation failures map to
    ParseError and its routing 404s to NotFound; anything unexpected is
    ConfigError.
    """

    @app.exception_handler(ServiceError)
    async def _service_error(request: Request, exc: ServiceError) -> JSONResponse:
        if isinstance(exc, InvalidField):
            return error_response("ParseError", 400)
        return error_response(exc.code, exc.http_status)

    @app.exception_handler(RequestValidationError)
    async def _validation_error(request: Request, exc: RequestValidationError) -> JSONResponse:
        return error_response("ParseError", 400)

    @app.exception_handler(StarletteHTTPException)
    async def _http_error(request: Request, exc: StarletteHTTPException) -> JSONResponse:
        return error_response("NotFound", exc.status_code if exc.status_code >= 400 else 404)

    @app.exception_handler(Exception)
    async def _unexpected(request: Request, exc: Exception) -> JSONResponse:
        return error_response("ConfigError", 500)
