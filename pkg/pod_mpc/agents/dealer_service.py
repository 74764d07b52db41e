"""
Correlated-randomness service for computation agents.

The dealer knows every party's material, so it exists for tests and demos
only; its route name says so.
"""

import logging
from abc import ABC, abstractmethod
from typing import Optional

import httpx
from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware

from ..api_models import HealthCheckResponse
from ..core.dealer import InsecureTestDealer, PartyMaterial
from ..core.sharing import SharingScheme
from ..errors import PodUnreachable
from ..mpc.circuit import Circuit
from ..net.http import add_exception_handlers, authenticate, raise_for_error
from ..pod.auth import Identity, RequestVerifier, SignatureAuth
from .models import PreprocessRequest, PreprocessResponse

logger = logging.getLogger(__name__)

PREPROCESS_ROUTE = "/insecure-test-only/preprocess"


def preprocess_request(job_id: str, party_id: int, scheme: SharingScheme, circuit: Circuit) -> PreprocessRequest:
    return PreprocessRequest(
        job_id=job_id,
        party_id=party_id,
        scheme=scheme.to_dict(),
        demand=circuit.demand(scheme),
        modulus=circuit.modulus,
        fixed_point=circuit.fixed_point,
        magnitude_bits=circuit.magnitude_bits(),
    )


def serve_preprocess(dealer: InsecureTestDealer, request: PreprocessRequest) -> PartyMaterial:
    return dealer.party_material(
        request.job_id, request.party_id, SharingScheme.from_dict(request.scheme), request.demand,
        request.modulus, request.fixed_point, request.magnitude_bits,
    )


class MaterialSource(ABC):
    """Where a computation agent gets its slice of a job's correlated randomness"""

    @abstractmethod
    async def party_material(self, job_id: str, party_id: int, scheme: SharingScheme,
                             circuit: Circuit) -> PartyMaterial:
        """This party's material for ``job_id``"""


class LocalMaterialSource(MaterialSource):
    """In-process dealer shared by every agent of a deployment"""

    def __init__(self, dealer: Optional[InsecureTestDealer] = None):
        self.dealer = dealer or InsecureTestDealer(seed=0)

    async def party_material(self, job_id: str, party_id: int, scheme: SharingScheme,
                             circuit: Circuit) -> PartyMaterial:
        return serve_preprocess(self.dealer, preprocess_request(job_id, party_id, scheme, circuit))


class HttpMaterialSource(MaterialSource):
    """
    Dealer reached over HTTP.

    Args:
        endpoint: Dealer base URL
        http: Async HTTP client
        identity: Signs requests when the dealer checks signatures
    """

    def __init__(self, endpoint: str, http: httpx.AsyncClient, identity: Optional[Identity] = None):
        self.endpoint = endpoint.rstrip("/")
        self.http = http
        self.auth = SignatureAuth(identity) if identity is not None else None

    async def party_material(self, job_id: str, party_id: int, scheme: SharingScheme,
                             circuit: Circuit) -> PartyMaterial:
        body = preprocess_request(job_id, party_id, scheme, circuit).model_dump_json().encode()
        try:
            response = await self.http.post(self.endpoint + PREPROCESS_ROUTE, content=body,
                                            headers={"content-type": "application/json"}, auth=self.auth)
        except httpx.TransportError as e:
            raise PodUnreachable(f"Dealer at {self.endpoint} unreachable: {e}", stage="preprocessing")
        raise_for_error(response)
        return PreprocessResponse.model_validate_json(response.content).material


class DealerAPI:
    """
    Args:
        dealer: Deals the material
        verifier: When given, only signed requests from known identities are served
    """

    def __init__(self, dealer: InsecureTestDealer, verifier: Optional[RequestVerifier] = None):
        self.dealer = dealer
        self.verifier = verifier
        self.app = self._create_app()

    def _create_app(self) -> FastAPI:
        app = FastAPI(title="Insecure test dealer", description="Correlated randomness for test deployments",
                      version="1.0.0")
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

        @app.get("/health", response_model=HealthCheckResponse)
        async def health_check():
            return HealthCheckResponse(status="healthy", services={"dealer": "insecure-test-only"})

        @app.post(PREPROCESS_ROUTE, response_model=PreprocessResponse)
        async def preprocess(request: Request):
            if self.verifier is not None:
                await authenticate(request, self.verifier)
            body = PreprocessRequest.model_validate_json(await request.body())
            logger.info(f"Serving material for job {body.job_id} party {body.party_id}")
            return PreprocessResponse(material=serve_preprocess(self.dealer, body))


def create_app(seed: int = 0, verifier: Optional[RequestVerifier] = None) -> FastAPI:
    api = DealerAPI(InsecureTestDealer(seed), verifier)
    return api.app
