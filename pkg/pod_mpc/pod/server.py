"""
FastAPI HTTP server for a Pod.

Resources live under arbitrary container paths. Every request is signed
(see ``pod_mpc.pod.auth``); the identity behind the signature is what the
access-control checks of ``PodService`` run against.
"""

import json
import logging
from typing import Optional

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware

from ..api_models import ContainerListingResponse, HealthCheckResponse, PutResourceResponse
from ..errors import MalformedDescription
from ..net.http import add_exception_handlers, authenticate
from .auth import IdentityDirectory, RequestVerifier
from .models import ACL_SUFFIX, AccessControlList
from .service import PodService
from .storage import StorageInterface

logger = logging.getLogger(__name__)

VERSION_HEADER = "X-Resource-Version"


class PodAPI:
    """Main API class that holds the Pod service and its request verifier."""

    def __init__(self, service: PodService, verifier: RequestVerifier):
        self.service = service
        self.verifier = verifier
        self.app = self._create_app()

    def _create_app(self) -> FastAPI:
        app = FastAPI(
            title="Pod",
            description="Personal data store with per-resource access control",
            version="1.0.0",
        )

        app.add_middleware(
            CORSMiddleware,
            allow_origins=["*"],
            allow_credentials=True,
            allow_methods=["*"],
            allow_headers=["*"],
        )

        self._add_routes(app)
        self._add_exception_handlers(app)
        return app

    def _add_exception_handlers(self, app: FastAPI):
        add_exception_handlers(app)

    def _add_routes(self, app: FastAPI):
        """Add API routes to the app."""

        @app.get("/health", response_model=HealthCheckResponse)
        async def health_check():
            try:
                storage_status = f"healthy ({len(self.service.storage.paths())} resources)"
            except Exception as e:
                storage_status = f"unhealthy: {e}"
            overall = "healthy" if storage_status.startswith("healthy") else "unhealthy"
            return HealthCheckResponse(status=overall, services={"pod": "healthy", "storage": storage_status})

        @app.get("/{path:path}")
        async def get_resource(path: str, request: Request):
            identity = await authenticate(request, self.verifier)
            path = "/" + path
            if path.endswith("/"):
                members = self.service.list_container(identity, path)
                return ContainerListingResponse(container=path, members=members)
            stored = self.service.get_resource(identity, path)
            return Response(content=stored.body, media_type=stored.content_type,
                            headers={VERSION_HEADER: str(stored.version)})

        @app.put("/{path:path}", response_model=PutResourceResponse)
        async def put_resource(path: str, request: Request):
            identity = await authenticate(request, self.verifier)
            path = "/" + path
            body = await request.body()
            if path.endswith(ACL_SUFFIX):
                try:
                    acl = AccessControlList.model_validate(json.loads(body))
                except ValueError as e:
                    raise MalformedDescription(f"ACL body for {path} is not valid: {e}")
                version = self.service.set_acl(identity, path[: -len(ACL_SUFFIX)], acl)
            else:
                content_type = request.headers.get("content-type", "application/json")
                version = self.service.put_resource(identity, path, body, content_type)
            return PutResourceResponse(path=path, version=version)

        @app.delete("/{path:path}")
        async def delete_resource(path: str, request: Request):
            identity = await authenticate(request, self.verifier)
            self.service.delete_resource(identity, "/" + path)
            return {"deleted": "/" + path}


def create_pod_service(owner: str, storage: Optional[StorageInterface] = None) -> PodService:
    logger.info(f"Creating Pod owned by {owner}")
    return PodService(owner, storage)


def create_app(owner: str, directory: IdentityDirectory,
               storage: Optional[StorageInterface] = None,
               clock_skew: float = 300.0) -> FastAPI:
    """
    Create FastAPI application for one Pod.

    Args:
        owner: Identity URL of the Pod owner
        directory: Identities whose signatures the Pod accepts
        storage: Resource backend (in-memory when omitted)
        clock_skew: Accepted request timestamp window in seconds

    Returns:
        Configured FastAPI application
    """
    api = PodAPI(create_pod_service(owner, storage), RequestVerifier(directory, clock_skew))
    return api.app
