import pytest

from pod_mpc.errors import EmptyFixture
from pod_mpc.fixtures import INCOME_RANGE, DataModel, ProviderFixture, generate_values
from pod_mpc.workloads import CircuitSpec, MwemWorkload, WorkloadKind


class TestGenerateValues:
    def test_needs_providers(self):
        with pytest.raises(EmptyFixture):
            generate_values(0, DataModel.UNIFORM_INCOME, CircuitSpec(kind=WorkloadKind.AVERAGE_WAGE), 0)

    def test_incomes(self):
        values = generate_values(5, DataModel.UNIFORM_INCOME, CircuitSpec(kind=WorkloadKind.AVERAGE_WAGE), 3)
        assert sorted(values) == [0, 1, 2, 3, 4]
        assert all(len(v) == 1 and INCOME_RANGE[0] <= v[0] < INCOME_RANGE[1] for v in values.values())
        assert values == generate_values(5, DataModel.UNIFORM_INCOME, CircuitSpec(kind=WorkloadKind.AVERAGE_WAGE), 3)

    def test_arrays_follow_width(self):
        values = generate_values(3, DataModel.INTEGER_DATASET, CircuitSpec(kind=WorkloadKind.SUM, width=5), 0)
        assert [len(v) for v in values.values()] == [5, 5, 5]

    def test_mwem_points(self):
        spec = CircuitSpec(kind=WorkloadKind.MWEM, mwem=MwemWorkload(setting=3, points_per_provider=100))
        values = generate_values(64, DataModel.INTEGER_DATASET, spec, 0)
        points = [x for v in values.values() for x in v]
        assert len(points) == 6400
        assert all(0 <= x < 100 for x in points)

    def test_mwem_fixed_total(self):
        spec = CircuitSpec(kind=WorkloadKind.MWEM, mwem=MwemWorkload(setting=1, total_points=10))
        values = generate_values(3, DataModel.INTEGER_DATASET, spec, 0)
        assert [len(v) for v in values.values()] == [4, 3, 3]


class TestProviderFixture:
    def test_layout(self):
        fixture = ProviderFixture.for_pod("http://pod0.local/")
        assert fixture.provider == "http://pod0.local/profile/card#me"
        assert fixture.data_url == "http://pod0.local/data/values.json"
        assert fixture.preference_url == "http://pod0.local/settings/preferences.json"
