import pytest

from pod_mpc.core.dealer import (
    InsecureTestDealer,
    PreprocessingDemand,
    deal_triples,
    deal_trunc_pairs,
)
from pod_mpc.core.field import M61, M127, FixedPointParams
from pod_mpc.core.sharing import ShareVector, reconstruct, reconstruct_vector
from pod_mpc.errors import InvalidParameters, PoolExhausted


class TestBeaverTriples:
    def test_defining_property(self, rng, scheme3):
        [t] = deal_triples(1, scheme3, rng)
        a, b, c = reconstruct(t.a).value, reconstruct(t.b).value, reconstruct(t.c).value
        assert c == a * b % M61

    def test_none_requested(self, rng, scheme3):
        assert deal_triples(0, scheme3, rng) == []

    def test_thousand_triples(self, rng, shamir3):
        for t in deal_triples(1000, shamir3, rng):
            assert reconstruct(t.c).value == reconstruct(t.a).value * reconstruct(t.b).value % M61


class TestTruncPairs:
    PARAMS = FixedPointParams(f=20, k=40, s=40)

    def test_pairs_consistent(self, rng, scheme3):
        pairs = deal_trunc_pairs(1000, self.PARAMS, scheme3, rng, M127)
        for r, hi in pairs:
            value = reconstruct(r).value
            assert value < 1 << 100
            assert reconstruct(hi).value == value >> 20

    def test_none_requested(self, rng, scheme3):
        assert deal_trunc_pairs(0, self.PARAMS, scheme3, rng) == []


class TestInsecureTestDealer:
    DEMAND = PreprocessingDemand(triples=4, trunc_pairs=2)

    def _reconstruct(self, material, scheme, field):
        return reconstruct_vector([ShareVector(m.party_id, scheme, getattr(m, field), M127) for m in material])

    def test_slices_reconstruct_triples(self, shamir3):
        material = InsecureTestDealer(seed=3).material_for_job("job", shamir3, self.DEMAND, M127)
        a = self._reconstruct(material, shamir3, "triples_a")
        b = self._reconstruct(material, shamir3, "triples_b")
        c = self._reconstruct(material, shamir3, "triples_c")
        assert c == [x * y % M127 for x, y in zip(a, b)]

    def test_deterministic_per_job(self, additive3):
        first = InsecureTestDealer(seed=5).party_material("job-a", 1, additive3, self.DEMAND, M127)
        again = InsecureTestDealer(seed=5).party_material("job-a", 1, additive3, self.DEMAND, M127)
        other = InsecureTestDealer(seed=5).party_material("job-b", 1, additive3, self.DEMAND, M127)
        assert first.triples_a == again.triples_a
        assert first.triples_a != other.triples_a

    def test_pool_exhaustion(self, shamir3):
        material = InsecureTestDealer().party_material("job", 0, shamir3, self.DEMAND, M127)
        material.take_triples(4)
        with pytest.raises(PoolExhausted):
            material.take_triples(1)

    def test_demand_merge(self):
        merged = PreprocessingDemand(triples=1, bit_masks={8: 2}).merge(
            PreprocessingDemand(squares=3, bit_masks={8: 1, 4: 1}))
        assert merged.triples == 1
        assert merged.squares == 3
        assert merged.bit_masks == {8: 3, 4: 1}
        assert PreprocessingDemand().empty


class TestDealerCache:
    DEMAND = PreprocessingDemand(triples=4, trunc_pairs=2)

    def test_job_dropped_once_every_party_fetched(self, shamir3):
        dealer = InsecureTestDealer(seed=1)
        slices = [dealer.party_material("job", p, shamir3, self.DEMAND, M127) for p in range(2)]
        assert dealer.cached_jobs() == ["job"]
        slices.append(dealer.party_material("job", 2, shamir3, self.DEMAND, M127))
        assert dealer.cached_jobs() == []
        a = reconstruct_vector([ShareVector(m.party_id, shamir3, m.triples_a, M127) for m in slices])
        b = reconstruct_vector([ShareVector(m.party_id, shamir3, m.triples_b, M127) for m in slices])
        c = reconstruct_vector([ShareVector(m.party_id, shamir3, m.triples_c, M127) for m in slices])
        assert c == [x * y % M127 for x, y in zip(a, b)]

    def test_refetch_after_drop_is_identical(self, additive3):
        dealer = InsecureTestDealer(seed=2)
        first = [dealer.party_material("job", p, additive3, self.DEMAND, M127) for p in range(3)]
        again = dealer.party_material("job", 1, additive3, self.DEMAND, M127)
        assert again.triples_a == first[1].triples_a

    def test_cache_is_bounded(self, shamir3):
        dealer = InsecureTestDealer(seed=3, max_cached_jobs=2)
        for job in ("a", "b", "c"):
            dealer.party_material(job, 0, shamir3, self.DEMAND, M127)
        assert dealer.cached_jobs() == ["b", "c"]

    def test_same_job_id_with_new_demand_gets_fresh_material(self, shamir3):
        dealer = InsecureTestDealer(seed=4)
        dealer.party_material("job", 0, shamir3, self.DEMAND, M127)
        bigger = dealer.party_material("job", 0, shamir3, PreprocessingDemand(triples=9), M127)
        assert len(bigger.triples_a) == 9
        assert bigger.trunc_r == []

    def test_forget(self, shamir3):
        dealer = InsecureTestDealer(seed=5)
        dealer.party_material("job", 0, shamir3, self.DEMAND, M127)
        dealer.forget("job")
        assert dealer.cached_jobs() == []

    def test_no_room_for_square_masks(self, shamir3):
        with pytest.raises(InvalidParameters):
            InsecureTestDealer().party_material("job", 0, shamir3, PreprocessingDemand(squares=1), M61,
                                                magnitude_bits=60)
