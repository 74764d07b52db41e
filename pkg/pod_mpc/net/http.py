"""
HTTP plumbing shared by every service and client.

Services register the same exception handlers, so a ``PodMpcError`` raised
anywhere becomes an ``ErrorResponse`` body; clients turn that body back into
the same error class.
"""

import logging
from typing import TYPE_CHECKING, Mapping

import httpx
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import ValidationError

from ..api_models import ErrorResponse
from ..errors import PodMpcError, error_from_dict

if TYPE_CHECKING:
    from ..pod.auth import RequestVerifier

logger = logging.getLogger(__name__)


def add_exception_handlers(app: FastAPI) -> None:
    """Map domain errors, validation errors and anything else to ErrorResponse bodies."""

    @app.exception_handler(PodMpcError)
    async def domain_error_handler(request: Request, exc: PodMpcError):
        logger.info(f"{request.method} {request.url.path} -> {exc}")
        return JSONResponse(status_code=exc.http_status,
                            content=ErrorResponse.from_error(exc).model_dump())

    @app.exception_handler(RequestValidationError)
    async def request_validation_handler(request: Request, exc: RequestValidationError):
        message = "; ".join(f"{'.'.join(str(x) for x in e['loc'])}: {e['msg']}" for e in exc.errors())
        return JSONResponse(status_code=422, content=ErrorResponse.validation_error(message).model_dump())

    @app.exception_handler(ValidationError)
    async def validation_exception_handler(request: Request, exc: ValidationError):
        message = "; ".join(f"{'.'.join(str(x) for x in e['loc'])}: {e['msg']}" for e in exc.errors())
        return JSONResponse(status_code=422, content=ErrorResponse.validation_error(message).model_dump())

    @app.exception_handler(Exception)
    async def general_exception_handler(request: Request, exc: Exception):
        logger.error(f"Unhandled exception in {request.url}: {exc}")
        return JSONResponse(status_code=500,
                            content=ErrorResponse.service_error("Internal server error occurred").model_dump())


async def authenticate(request: Request, verifier: "RequestVerifier") -> str:
    """Identity URL behind a signed request."""
    body = await request.body()
    return verifier.verify(request.method, request.url.path, body, request.headers)


def raise_for_error(response: httpx.Response) -> None:
    """
    Raises:
        PodMpcError: The typed error carried by an ErrorResponse body
    """
    if response.is_success:
        return
    try:
        data: Mapping = response.json()
    except ValueError:
        raise PodMpcError(f"HTTP {response.status_code} from {response.request.url}")
    if not isinstance(data, dict) or "code" not in data:
        raise PodMpcError(f"HTTP {response.status_code} from {response.request.url}: {data}")
    raise error_from_dict(data)
