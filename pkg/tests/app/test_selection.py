import itertools
import math
from collections import Counter

import pytest
from pydantic import ValidationError
from scipy import stats

from pod_mpc.app.models import DescriptionEntry, ResourceDescription, SelectionPolicy
from pod_mpc.app.selection import select_agents
from pod_mpc.errors import EmptyIntersection, InsufficientUnion, InvalidParameters
from pod_mpc.mpc.protocols import ProtocolClass
from pod_mpc.pod.models import PreferenceFile
from pod_mpc.workloads import CircuitSpec, WorkloadKind


def prefs(provider: str, cas, ea: str = "ea0") -> tuple:
    return provider, PreferenceFile(webid=provider, trusted_encryption_agents=[ea],
                                    trusted_computation_agents=list(cas))


PREFERENCES = [prefs("p1", ["A", "B", "C"]), prefs("p2", ["B", "C", "D"], ea="ea1")]


class TestSubsetPolicy:
    def test_lexicographically_smallest_common_agents(self):
        selection = select_agents(PREFERENCES, SelectionPolicy.SUBSET, m=2)
        assert selection.computation_agents == ["B", "C"]
        assert selection.protocol == ProtocolClass.HONEST_MAJORITY_SEMI_HONEST
        assert selection.encryption_agents == {"p1": "ea0", "p2": "ea1"}

    def test_intersection_too_small(self):
        with pytest.raises(EmptyIntersection):
            select_agents(PREFERENCES, SelectionPolicy.SUBSET, m=3)

    def test_requested_protocol_wins(self):
        selection = select_agents(PREFERENCES, SelectionPolicy.SUBSET, m=2,
                                  requested_protocol=ProtocolClass.DISHONEST_MAJORITY_SEMI_HONEST)
        assert selection.protocol == ProtocolClass.DISHONEST_MAJORITY_SEMI_HONEST


class TestUnionRandomPolicy:
    def test_draw_is_deterministic_per_seed(self):
        first = select_agents(PREFERENCES, SelectionPolicy.UNION_RANDOM, m=3, seed=5)
        again = select_agents(PREFERENCES, SelectionPolicy.UNION_RANDOM, m=3, seed=5)
        assert first == again
        assert set(first.computation_agents) <= {"A", "B", "C", "D"}
        assert len(set(first.computation_agents)) == 3
        assert first.protocol == ProtocolClass.DISHONEST_MAJORITY_SEMI_HONEST

    def test_union_too_small(self):
        with pytest.raises(InsufficientUnion):
            select_agents(PREFERENCES, SelectionPolicy.UNION_RANDOM, m=5)

    @pytest.mark.slow
    def test_draws_uniform_over_subsets(self):
        draws = 100_000
        union = ["A", "B", "C", "D"]
        subsets = list(itertools.combinations(union, 3))
        counts = Counter(
            tuple(select_agents(PREFERENCES, SelectionPolicy.UNION_RANDOM, m=3, seed=seed).computation_agents)
            for seed in range(draws)
        )
        assert set(counts) == set(subsets)
        observed = [counts[s] for s in subsets]
        expected = [draws / math.comb(len(union), 3)] * len(subsets)
        assert stats.chisquare(observed, expected).pvalue > 0.01


class TestPreferenceValidation:
    def test_no_trusted_encryption_agent(self):
        provider, pref = prefs("p1", ["A"])
        pref.trusted_encryption_agents = []
        with pytest.raises(InvalidParameters):
            select_agents([(provider, pref)], SelectionPolicy.SUBSET, m=1)

    def test_no_providers(self):
        with pytest.raises(InvalidParameters):
            select_agents([], SelectionPolicy.SUBSET, m=2)


class TestResourceDescription:
    def _entry(self, provider: str) -> DescriptionEntry:
        return DescriptionEntry(data_url=f"{provider}/data.json", preference_url=f"{provider}/prefs.json",
                                provider=provider)

    def test_camel_case_wire_form(self, tmp_path):
        description = ResourceDescription(entries=[self._entry("p1")], circuit=CircuitSpec(kind=WorkloadKind.SUM))
        description.save(tmp_path / "description.json")
        text = (tmp_path / "description.json").read_text()
        assert "dataUrl" in text
        assert ResourceDescription.load(tmp_path / "description.json") == description

    def test_hash_depends_on_content(self):
        a = ResourceDescription(entries=[self._entry("p1")], circuit=CircuitSpec(kind=WorkloadKind.SUM))
        b = ResourceDescription(entries=[self._entry("p2")], circuit=CircuitSpec(kind=WorkloadKind.SUM))
        assert a.description_hash() != b.description_hash()

    def test_duplicate_providers(self):
        with pytest.raises(ValidationError):
            ResourceDescription(entries=[self._entry("p1"), self._entry("p1")],
                                circuit=CircuitSpec(kind=WorkloadKind.SUM))

    def test_needs_entries(self):
        with pytest.raises(ValidationError):
            ResourceDescription(entries=[], circuit=CircuitSpec(kind=WorkloadKind.SUM))
