import pytest

from pod_mpc.core.field import M61, M127, FixedPointParams
from pod_mpc.core.sharing import SharingScheme
from pod_mpc.errors import InvalidParameters, InvalidScheme, ProtocolNotExecutable
from pod_mpc.mpc.circuit import Circuit, CircuitBuilder, CompareMode, GateOp
from pod_mpc.mpc.circuits import (
    ElementwiseOp,
    average_wage_circuit,
    elementwise_op_sum_circuit,
    mean_from_aggregate,
    pooled_op_sum_circuit,
    product_circuit,
    split_evenly,
    sum_circuit,
)
from pod_mpc.mpc.plaintext import evaluate_plaintext
from pod_mpc.mpc.protocols import ProtocolClass, allowed_protocols


class TestCircuitStructure:
    def test_output_follows_open(self):
        b = CircuitBuilder()
        b.output(b.input(0))
        circuit = b.build()
        assert [g.op for g in circuit.gates] == [GateOp.INPUT, GateOp.OPEN, GateOp.OUTPUT]
        assert circuit.output_gates() == [2]

    def test_width_mismatch_rejected(self):
        b = CircuitBuilder()
        b.add(b.input(0, 2), b.input(1, 3))
        with pytest.raises(InvalidParameters):
            b.build()

    def test_forward_reference_rejected(self):
        b = CircuitBuilder()
        b.input(0)
        b._add(GateOp.ADD, [0, 5])
        with pytest.raises(InvalidParameters):
            b.build()

    def test_truncation_needs_room_in_field(self):
        b = CircuitBuilder("trunc", M61, FixedPointParams(f=20, k=40, s=40))
        b.output(b.trunc(b.input(0)))
        with pytest.raises(InvalidParameters):
            b.build()

    def test_input_widths_accumulate_per_source(self):
        b = CircuitBuilder()
        b.output(b.concat(b.input(0, 3), b.input(1, 2), b.input(0, 1)))
        assert b.build().input_widths() == {0: 4, 1: 2}

    def test_hash_is_content_addressed(self):
        assert sum_circuit([0, 1]).circuit_hash() == sum_circuit([0, 1]).circuit_hash()
        assert sum_circuit([0, 1]).circuit_hash() != sum_circuit([0, 1], width=2).circuit_hash()

    def test_json_round_trip_keeps_hash(self):
        circuit = product_circuit([0, 1, 2], width=4)
        assert Circuit.from_json(circuit.canonical_json()).circuit_hash() == circuit.circuit_hash()


class TestCostProfile:
    def test_product_chain(self):
        circuit = product_circuit([0, 1, 2, 3], width=10)
        profile = circuit.cost_profile()
        assert profile.secure_multiplications == 30
        assert profile.input_elements == 40
        assert circuit.multiplicative_depth() == 4

    def test_sum_is_free_until_open(self):
        profile = sum_circuit([0, 1, 2], width=100).cost_profile()
        assert profile.secure_multiplications == 0
        assert profile.opened_elements == 1
        assert profile.player_side_gates == 1

    def test_pooled_depends_only_on_total_width(self):
        few = pooled_op_sum_circuit({0: 50, 1: 50}, ElementwiseOp.MUL).cost_profile()
        many = pooled_op_sum_circuit({c: 10 for c in range(10)}, ElementwiseOp.MUL).cost_profile()
        assert few.player_side_gates == many.player_side_gates

    def test_additive_demand_counts_triples(self):
        circuit = product_circuit([0, 1, 2], width=5)
        assert circuit.demand(SharingScheme.additive(3)).triples == 10
        assert circuit.demand(SharingScheme.shamir(1, 3)).triples == 0

    def test_comparison_demand(self):
        b = CircuitBuilder("cmp", M127)
        x = b.input(0, 4)
        b.output(b.compare_gt_zero(x))
        b.output(b.compare_gt_zero(x, CompareMode.BITWISE, 8))
        demand = b.build().demand(SharingScheme.shamir(1, 3))
        assert demand.squares == 4
        assert demand.bit_masks == {7: 4}


class TestTemplates:
    def test_split_evenly(self):
        assert split_evenly(10, 3) == [4, 3, 3]
        with pytest.raises(InvalidParameters):
            split_evenly(2, 3)

    def test_elementwise_plaintext(self):
        circuit = elementwise_op_sum_circuit([0, 1], 3, ElementwiseOp.MUL)
        assert evaluate_plaintext(circuit, {0: [1, 2, 3], 1: [4, 5, 6]}) == [[32]]

    def test_average_wage_plaintext(self):
        circuit = average_wage_circuit([0, 1, 2])
        opened = evaluate_plaintext(circuit, {0: [10, 1], 1: [20, 1], 2: [30, 1]})[0]
        assert opened == [60, 3]
        assert mean_from_aggregate(opened) == 20

    def test_mean_of_nobody(self):
        with pytest.raises(InvalidParameters):
            mean_from_aggregate([0, 0])

    def test_empty_sources_rejected(self):
        with pytest.raises(InvalidParameters):
            product_circuit([])


class TestProtocolClasses:
    def test_honest_majority_uses_shamir(self):
        scheme = ProtocolClass.HONEST_MAJORITY_SEMI_HONEST.scheme(5)
        assert scheme.is_shamir
        assert scheme.threshold == 2

    def test_honest_majority_needs_three(self):
        with pytest.raises(InvalidScheme):
            ProtocolClass.HONEST_MAJORITY_SEMI_HONEST.scheme(2)

    def test_dishonest_majority_is_additive(self):
        assert ProtocolClass.DISHONEST_MAJORITY_SEMI_HONEST.scheme(2) == SharingScheme.additive(2)

    @pytest.mark.parametrize("protocol", [ProtocolClass.COVERT_PLACEHOLDER, ProtocolClass.MALICIOUS_PLACEHOLDER])
    def test_placeholders_not_executable(self, protocol):
        with pytest.raises(ProtocolNotExecutable):
            protocol.scheme(3)

    def test_all_trusted_allows_everything(self):
        assert ProtocolClass.HONEST_MAJORITY_SEMI_HONEST in allowed_protocols(3, 3)

    def test_some_trusted_requires_dishonest_majority(self):
        allowed = allowed_protocols(1, 3)
        assert ProtocolClass.HONEST_MAJORITY_SEMI_HONEST not in allowed
        assert allowed[0] == ProtocolClass.DISHONEST_MAJORITY_SEMI_HONEST

    def test_none_trusted(self):
        assert allowed_protocols(0, 3) == []
        assert allowed_protocols(0, 3, accept_untrusted=True)[0] == ProtocolClass.DISHONEST_MAJORITY_SEMI_HONEST

    def test_preferred_list_intersects(self):
        preferred = [ProtocolClass.MALICIOUS_PLACEHOLDER]
        assert allowed_protocols(3, 3, preferred=preferred) == preferred
