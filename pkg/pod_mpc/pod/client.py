"""Signed HTTP client for Pods"""

import json
import logging
from typing import List, Optional, Tuple, Type, TypeVar

import httpx
from pydantic import BaseModel

from ..errors import MalformedDescription, PodMpcError, PodUnreachable
from ..net.http import raise_for_error
from .auth import Identity, SignatureAuth
from .models import ACL_SUFFIX, AccessControlList, DescriptionResource, TrustedActors, description_url

logger = logging.getLogger(__name__)

ModelT = TypeVar("ModelT", bound=BaseModel)


class PodClient:
    """
    Talks to any Pod as ``identity``. Resources are addressed by absolute URL,
    so one client follows references across Pods.

    Args:
        identity: Identity every request is signed as
        http: Shared async HTTP client (real network or an in-process mesh)
    """

    def __init__(self, identity: Identity, http: httpx.AsyncClient):
        self.identity = identity
        self.http = http
        self.auth = SignatureAuth(identity)

    async def _request(self, method: str, url: str, content: Optional[bytes] = None,
                       headers: Optional[dict] = None) -> httpx.Response:
        try:
            response = await self.http.request(method, url, content=content, headers=headers, auth=self.auth)
        except httpx.TransportError as e:
            raise PodUnreachable(f"Cannot reach {url}: {e}")
        raise_for_error(response)
        return response

    async def get_resource(self, url: str) -> bytes:
        response = await self._request("GET", url)
        return response.content

    async def get_json(self, url: str, model: Type[ModelT]) -> ModelT:
        body = await self.get_resource(url)
        try:
            return model.model_validate(json.loads(body))
        except ValueError as e:
            raise MalformedDescription(f"{url} is not a valid {model.__name__}: {e}")

    async def put_resource(self, url: str, body: bytes, content_type: str = "application/json",
                           acl: Optional[AccessControlList] = None) -> int:
        """
        Store ``body`` and, when given, replace the resource's ACL.

        Returns:
            Version of the stored resource
        """
        response = await self._request("PUT", url, content=body, headers={"content-type": content_type})
        if acl is not None:
            await self.set_acl(url, acl)
        return response.json()["version"]

    async def put_json(self, url: str, record: BaseModel,
                       acl: Optional[AccessControlList] = None) -> int:
        body = record.model_dump_json(by_alias=True, exclude_none=True).encode()
        return await self.put_resource(url, body, acl=acl)

    async def set_acl(self, url: str, acl: AccessControlList) -> int:
        response = await self._request("PUT", url + ACL_SUFFIX, content=acl.model_dump_json().encode(),
                                       headers={"content-type": "application/json"})
        return response.json()["version"]

    async def get_acl(self, url: str) -> AccessControlList:
        try:
            return await self.get_json(url + ACL_SUFFIX, AccessControlList)
        except PodMpcError as e:
            if e.code == "NotFound":
                return AccessControlList()
            raise

    async def revoke(self, url: str, agent: str) -> int:
        acl = await self.get_acl(url)
        return await self.set_acl(url, acl.revoke(agent))

    async def delete(self, url: str) -> None:
        await self._request("DELETE", url)

    async def list_container(self, url: str) -> List[str]:
        if not url.endswith("/"):
            url += "/"
        response = await self._request("GET", url)
        return response.json()["members"]


async def resolve_description(data_url: str, client: PodClient) -> Tuple[DescriptionResource, TrustedActors]:
    """
    Follow a data resource's description to the owner's trusted actors.

    The trusted-actors link may point into another Pod.

    Raises:
        NotFound: Description or trusted-actors resource missing
        MalformedDescription: Either document fails to parse
    """
    description = DescriptionResource.parse(await client.get_resource(description_url(data_url)))
    logger.debug(f"Description of {data_url} links trusted actors at {description.trusted_actors}")
    actors = await client.get_json(description.trusted_actors, TrustedActors)
    return description, actors
