"""
In-process service mesh.

Routes httpx requests to ASGI apps by ``host:port`` so a whole deployment
(Pods, agents, dealer) can run inside one event loop with the same clients
that talk to real servers.
"""

import logging
from typing import Dict, Optional

import httpx
from fastapi import FastAPI

logger = logging.getLogger(__name__)


def _route_key(url: httpx.URL) -> str:
    port = url.port or (443 if url.scheme == "https" else 80)
    return f"{url.host}:{port}"


class ServiceMesh(httpx.AsyncBaseTransport):
    """httpx transport dispatching to mounted ASGI apps."""

    def __init__(self):
        self._routes: Dict[str, httpx.ASGITransport] = {}

    def mount(self, base_url: str, app: FastAPI) -> None:
        key = _route_key(httpx.URL(base_url))
        self._routes[key] = httpx.ASGITransport(app=app, raise_app_exceptions=False)
        logger.debug(f"Mounted {app.title} at {key}")

    def __contains__(self, base_url: str) -> bool:
        return _route_key(httpx.URL(base_url)) in self._routes

    async def handle_async_request(self, request: httpx.Request) -> httpx.Response:
        transport = self._routes.get(_route_key(request.url))
        if transport is None:
            raise httpx.ConnectError(f"No service mounted at {request.url.host}", request=request)
        return await transport.handle_async_request(request)

    def client(self, timeout: Optional[float] = 60.0) -> httpx.AsyncClient:
        return httpx.AsyncClient(transport=self, timeout=timeout)
