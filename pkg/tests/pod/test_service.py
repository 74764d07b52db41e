import json

import pytest

from pod_mpc.errors import InvalidParameters, MalformedDescription, NotFound, Unauthorized
from pod_mpc.pod.models import (
    AccessControlList,
    AccessMode,
    AclEntry,
    DescriptionResource,
    PreferenceFile,
    container_of,
    description_url,
)
from pod_mpc.pod.service import PodService
from pod_mpc.pod.storage import DirectoryStorage, create_storage

OWNER = "https://alice.example/profile/card#me"
READER = "https://ea.example/#me"
STRANGER = "https://mallory.example/#me"


@pytest.fixture
def pod():
    service = PodService(OWNER)
    service.put_resource(OWNER, "/data/income.json", b'{"values": [10]}',
                         acl=AccessControlList.read_only(READER))
    return service


class TestAccessControl:
    def test_owner_reads_everything(self, pod):
        assert pod.get_resource(OWNER, "/data/income.json").body == b'{"values": [10]}'

    def test_granted_reader(self, pod):
        assert json.loads(pod.get_resource(READER, "/data/income.json").body) == {"values": [10]}

    def test_stranger_denied(self, pod):
        with pytest.raises(Unauthorized):
            pod.get_resource(STRANGER, "/data/income.json")

    def test_unauthorized_before_not_found(self, pod):
        with pytest.raises(Unauthorized):
            pod.get_resource(STRANGER, "/data/missing.json")
        with pytest.raises(NotFound):
            pod.get_resource(OWNER, "/data/missing.json")

    def test_read_grant_is_not_write(self, pod):
        with pytest.raises(Unauthorized):
            pod.put_resource(READER, "/data/income.json", b"{}")

    def test_write_grant(self, pod):
        pod.set_acl(OWNER, "/data/notes.json",
                    AccessControlList(entries=[AclEntry(agent=READER, modes=[AccessMode.WRITE])]))
        assert pod.put_resource(READER, "/data/notes.json", b"{}") == 1

    def test_only_owner_sets_acls(self, pod):
        with pytest.raises(Unauthorized):
            pod.set_acl(READER, "/data/income.json", AccessControlList.read_only(STRANGER))
        with pytest.raises(Unauthorized):
            pod.get_resource(READER, "/data/income.json.acl.json")

    def test_revocation(self, pod):
        pod.revoke(OWNER, "/data/income.json", READER)
        with pytest.raises(Unauthorized):
            pod.get_resource(READER, "/data/income.json")

    def test_versions_increase(self, pod):
        assert pod.put_resource(OWNER, "/data/income.json", b'{"values": [11]}') == 2

    def test_malformed_paths(self, pod):
        with pytest.raises(InvalidParameters):
            pod.get_resource(OWNER, "/data/../secret")
        with pytest.raises(InvalidParameters):
            pod.put_resource(OWNER, "/data/", b"{}")


class TestContainers:
    def test_listing_needs_container_grant(self, pod):
        with pytest.raises(Unauthorized):
            pod.list_container(READER, "/data/")
        pod.set_acl(OWNER, "/data/", AccessControlList.read_only(READER))
        assert pod.list_container(READER, "/data/") == ["income.json"]

    def test_acl_sidecars_hidden(self, pod):
        assert pod.list_container(OWNER, "/data") == ["income.json"]

    def test_delete(self, pod):
        pod.delete_resource(OWNER, "/data/income.json")
        with pytest.raises(NotFound):
            pod.get_resource(OWNER, "/data/income.json")
        with pytest.raises(Unauthorized):
            pod.delete_resource(READER, "/data/other.json")

    def test_container_of(self):
        assert container_of("/data/income.json") == "/data/"


class TestStorage:
    def test_directory_backend_persists(self, tmp_path):
        first = PodService(OWNER, create_storage(tmp_path))
        first.put_resource(OWNER, "/data/a.json", b"[1]", acl=AccessControlList.read_only(READER))
        second = PodService(OWNER, DirectoryStorage(tmp_path))
        assert second.get_resource(READER, "/data/a.json").body == b"[1]"
        assert second.get_resource(OWNER, "/data/a.json").version == 1

    def test_meta_suffixed_names_are_ordinary_resources(self, tmp_path):
        storage = DirectoryStorage(tmp_path)
        storage.put("/data/report.meta", b"owner data", "text/plain")
        storage.put("/data/report", b"other", "text/plain")
        assert storage.get("/data/report.meta").body == b"owner data"
        assert storage.get("/data/report").body == b"other"
        assert sorted(storage.paths()) == ["/data/report", "/data/report.meta"]
        assert storage.list_container("/data/") == ["report", "report.meta"]


class TestTrustDocuments:
    def test_description_parse(self):
        body = b'{"data": "https://alice.example/data/income.json", "trustedActors": "https://alice.example/trust.json"}'
        description = DescriptionResource.parse(body)
        assert description.trusted_actors == "https://alice.example/trust.json"

    @pytest.mark.parametrize("body", [b"not json", b'{"data": "x"}', b'{"data": "x", "trustedActors": ""}'])
    def test_malformed_description(self, body):
        with pytest.raises(MalformedDescription):
            DescriptionResource.parse(body)

    def test_description_url(self):
        assert description_url("https://a/data/x.json") == "https://a/data/x.json.description.json"

    def test_preferences_wire_form(self):
        prefs = PreferenceFile(webid=OWNER, trusted_computation_agents=["https://ca0/#me"])
        data = json.loads(prefs.to_json_bytes())
        assert data["trustedComputationAgents"] == ["https://ca0/#me"]
        assert "allowedProtocols" not in data
        assert PreferenceFile.model_validate(data) == prefs
