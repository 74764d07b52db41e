import random
from itertools import combinations

import numpy as np
import pytest
from scipy.stats import chi2_contingency, chisquare

from pod_mpc.core.field import M61, FieldElement
from pod_mpc.core.sharing import (
    SchemeKind,
    SharingScheme,
    ShareVector,
    decode_share_vector,
    encode_share_vector,
    reconstruct,
    reconstruct_vector,
    share,
    share_vector,
)
from pod_mpc.errors import InconsistentShares, InsufficientShares, InvalidScheme


def buckets(values, count=20):
    return np.bincount([v * count // M61 for v in values], minlength=count)


class TestSchemes:
    def test_shamir_threshold_bounds(self):
        SharingScheme.shamir(1, 3)
        SharingScheme.shamir(2, 5)
        with pytest.raises(InvalidScheme):
            SharingScheme.shamir(2, 4)
        with pytest.raises(InvalidScheme):
            SharingScheme.shamir(0, 3)

    def test_additive_needs_two_parties(self):
        with pytest.raises(InvalidScheme):
            SharingScheme.additive(1)

    def test_maximal_threshold(self):
        assert SharingScheme.for_parties(SchemeKind.SHAMIR, 7).threshold == 3
        assert SharingScheme.for_parties(SchemeKind.ADDITIVE, 4).reconstruction_size == 4

    def test_dict_form(self):
        scheme = SharingScheme.shamir(2, 5)
        assert SharingScheme.from_dict(scheme.to_dict()) == scheme


class TestShareReconstruct:
    def test_any_two_of_three_shamir_shares(self, rng, shamir3):
        shares = share(FieldElement(5), shamir3, rng)
        for pair in combinations(shares, 2):
            assert reconstruct(list(pair)).value == 5

    def test_additive_zero(self, rng):
        s0, s1 = share(0, SharingScheme.additive(2), rng)
        assert (s0.values[0] + s1.values[0]) % M61 == 0

    def test_reconstruct_42(self, rng, scheme3):
        assert reconstruct(share(42, scheme3, rng)).value == 42

    def test_too_few_shamir_shares(self, rng, shamir3):
        shares = share(42, shamir3, rng)
        with pytest.raises(InsufficientShares):
            reconstruct(shares[:1])

    def test_additive_needs_every_share(self, rng, additive3):
        shares = share(42, additive3, rng)
        with pytest.raises(InsufficientShares):
            reconstruct(shares[:2])

    def test_corrupted_share_detected(self, rng, shamir3):
        shares = share(42, shamir3, rng)
        shares[2].values[0] = (shares[2].values[0] + 1) % M61
        assert reconstruct(shares).value == 42
        with pytest.raises(InconsistentShares):
            reconstruct(shares, check=True)

    def test_mixed_schemes_rejected(self, rng, shamir3):
        shares = share(1, shamir3, rng)
        other = ShareVector(1, SharingScheme.shamir(2, 5), shares[1].values)
        with pytest.raises(InconsistentShares):
            reconstruct([shares[0], other])

    def test_linearity(self, rng, scheme3):
        xs = share_vector([10, 20, 30], scheme3, rng)
        ys = share_vector([1, 2, M61 - 3], scheme3, rng)
        sums = [x + y for x, y in zip(xs, ys)]
        assert reconstruct_vector(sums) == [11, 22, 27]

    def test_public_scaling(self, rng, scheme3):
        shares = [s.scale(7) for s in share(6, scheme3, rng)]
        assert reconstruct(shares).value == 42


class TestShareCodec:
    def test_header_layout(self, rng, shamir3):
        encoded = encode_share_vector(share_vector([1, 2], shamir3, rng)[2])
        assert encoded[:2] == (2).to_bytes(2, "little")
        assert encoded[2] == 1
        assert len(encoded) == 2 + 1 + 2 + 2 + 4 + 2 * 8

    def test_decode_keeps_scheme(self, rng, additive3):
        original = share_vector([7, 8, 9], additive3, rng)[0]
        decoded = decode_share_vector(encode_share_vector(original))
        assert decoded.scheme == additive3
        assert decoded.values == original.values

    def test_unknown_tag(self, rng, shamir3):
        encoded = bytearray(encode_share_vector(share(1, shamir3, rng)[0]))
        encoded[2] = 9
        with pytest.raises(InvalidScheme):
            decode_share_vector(bytes(encoded))


@pytest.mark.slow
class TestHiding:
    TRIALS = 100_000

    def test_single_share_marginal_is_uniform(self, shamir3):
        shares = share_vector([123456] * self.TRIALS, shamir3, random.Random(7))
        counts = buckets(shares[0].values)
        assert chisquare(counts).pvalue > 0.01

    def test_t_shares_independent_of_secret(self, shamir3):
        first = share_vector([0] * self.TRIALS, shamir3, random.Random(11))
        second = share_vector([M61 // 3] * self.TRIALS, shamir3, random.Random(12))
        table = np.vstack([buckets(first[1].values), buckets(second[1].values)])
        assert chi2_contingency(table).pvalue > 0.01
