import asyncio
import random

import pytest

from pod_mpc.core.field import M61, M127, FixedPointParams, decode_fixed_int, encode_fixed_int, to_signed
from pod_mpc.core.sharing import SharingScheme
from pod_mpc.dp.secure import encode_scores, noisy_max_circuit
from pod_mpc.errors import ProtocolNotExecutable
from pod_mpc.mpc.circuit import Circuit, CircuitBuilder, CompareMode
from pod_mpc.mpc.circuits import (
    ElementwiseOp,
    average_wage_circuit,
    average_wage_fixed_point_circuit,
    elementwise_op_sum_circuit,
    mean_from_aggregate,
    product_circuit,
    sum_circuit,
)
from pod_mpc.mpc.plaintext import evaluate_plaintext
from pod_mpc.mpc.protocols import ProtocolClass
from pod_mpc.mpc.runner import reconstruct_noise, run_delegated, run_direct

FP = FixedPointParams(f=20, k=40, s=40)


def delegated(circuit, clients, scheme=None, players=3, seed=0):
    return asyncio.run(run_delegated(circuit, players, clients, scheme, transport="memory", seed=seed))


def direct(circuit, inputs, scheme=None, seed=0):
    return asyncio.run(run_direct(circuit, list(inputs.items()), scheme, transport="memory", seed=seed))


def two_input_circuit(op: str, width: int = 1, modulus: int = M61) -> Circuit:
    b = CircuitBuilder(op, modulus)
    x, y = b.input(0, width), b.input(1, width)
    b.output(b.mul(x, y) if op == "mul" else b.add(x, y))
    return b.build()


class TestEvaluate:
    def test_sum_shamir(self, shamir3):
        result = direct(sum_circuit([0, 1, 2]), {0: [3], 1: [4], 2: [5]}, shamir3)
        assert result.flat == [12]

    def test_product_additive(self, additive3):
        result = direct(product_circuit([0, 1, 2]), {0: [2], 1: [3], 2: [4]}, additive3)
        assert result.flat == [24]

    def test_average_wage(self, scheme3):
        result = delegated(average_wage_circuit([0, 1, 2]), {0: [10, 1], 1: [20, 1], 2: [30, 1]}, scheme3)
        assert mean_from_aggregate(result.flat) == 20

    def test_average_wage_inside_circuit(self, scheme3):
        circuit = average_wage_fixed_point_circuit([0, 1, 2], FP)
        clients = {s: [encode_fixed_int(w, FP)] for s, w in enumerate([10.5, 20.0, 30.25])}
        mean = decode_fixed_int(delegated(circuit, clients, scheme3).flat[0], M127, FP)
        assert mean == pytest.approx(20.25, abs=1e-4)

    def test_every_player_opens_the_same_outputs(self, scheme3):
        result = delegated(sum_circuit([0, 1], width=4), {0: [1, 2, 3, 4], 1: [5, 6, 7, 8]}, scheme3)
        assert result.flat == [36]
        assert len(result.party_metrics) == 3

    def test_placeholder_protocol_not_executable(self):
        with pytest.raises(ProtocolNotExecutable):
            delegated(sum_circuit([0]), {0: [1]}, ProtocolClass.MALICIOUS_PLACEHOLDER)

    def test_deterministic_given_seed(self, shamir3):
        circuit = sum_circuit([0, 1], width=3)
        data = {0: [1, 2, 3], 1: [4, 5, 6]}
        first = delegated(circuit, data, shamir3, seed=9)
        again = delegated(circuit, data, shamir3, seed=9)
        assert first.outputs == again.outputs
        assert first.metrics.bytes_global == again.metrics.bytes_global


class TestSecureMultiplication:
    def test_zero_times_y(self, scheme3):
        assert delegated(two_input_circuit("mul"), {0: [0], 1: [123]}, scheme3).flat == [0]

    def test_seven_times_six(self, scheme3):
        assert delegated(two_input_circuit("mul"), {0: [7], 1: [6]}, scheme3).flat == [42]

    def test_batched_in_one_round(self, scheme3):
        rng = random.Random(5)
        xs = [rng.randrange(1000) for _ in range(128)]
        ys = [rng.randrange(1000) for _ in range(128)]
        wide = delegated(two_input_circuit("mul", 128), {0: xs, 1: ys}, scheme3)
        narrow = delegated(two_input_circuit("mul", 1), {0: xs[:1], 1: ys[:1]}, scheme3)
        assert wide.flat == [x * y for x, y in zip(xs, ys)]
        assert wide.metrics.rounds == narrow.metrics.rounds

    def test_random_oracle_instances(self, scheme3):
        rng = random.Random(17)
        for _ in range(5):
            width = rng.randint(1, 16)
            data = {s: [rng.randrange(100) for _ in range(width)] for s in range(3)}
            circuit = elementwise_op_sum_circuit([0, 1, 2], width, ElementwiseOp.MUL)
            expected = evaluate_plaintext(circuit, data)
            assert delegated(circuit, data, scheme3).outputs == expected


class TestTruncation:
    def _circuit(self) -> Circuit:
        b = CircuitBuilder("trunc", M127, FP)
        b.output(b.trunc(b.input(0)))
        return b.build()

    def test_power_of_two(self, shamir3):
        assert delegated(self._circuit(), {0: [2 << 20]}, shamir3).flat == [2]

    def test_zero(self, shamir3):
        assert to_signed(delegated(self._circuit(), {0: [0]}, shamir3).flat[0], M127) in (0, 1)

    def test_within_one_unit(self, scheme3):
        rng = random.Random(3)
        b = CircuitBuilder("trunc_many", M127, FP)
        b.output(b.trunc(b.input(0, 200)))
        circuit = b.build()
        xs = [rng.randrange(-(1 << 39), 1 << 39) for _ in range(200)]
        out = delegated(circuit, {0: xs}, scheme3).flat
        for x, y in zip(xs, out):
            assert abs(to_signed(y, M127) - (x >> 20)) <= 1


class TestComparison:
    @pytest.mark.parametrize("mode", [CompareMode.MASKED_SIGN, CompareMode.BITWISE])
    def test_sign_oracle(self, scheme3, mode):
        rng = random.Random(23)
        xs = [1, -1, 0] + [rng.randrange(-(1 << 20), 1 << 20) for _ in range(100)]
        b = CircuitBuilder("cmp", M127, FP)
        b.output(b.compare_gt_zero(b.input(0, len(xs)), mode, 22 if mode == CompareMode.BITWISE else None))
        out = delegated(b.build(), {0: xs}, scheme3).flat
        assert out == [1 if x > 0 else 0 for x in xs]


class TestJointNoise:
    def test_noise_matches_replayed_seeds(self, scheme3):
        b = CircuitBuilder("noisy", M127, FP)
        b.output(b.add(b.input(0, 4), b.noise(60.0, 4)))
        circuit = b.build()
        data = {0: [5 << 20, 6 << 20, 7 << 20, 8 << 20]}
        result = delegated(circuit, data, scheme3, seed=4)
        noise = reconstruct_noise(circuit, result)
        expected = evaluate_plaintext(circuit, data, noise=noise)
        assert result.outputs == expected

    def test_noise_differs_across_seeds(self, shamir3):
        b = CircuitBuilder("noisy", M127, FP)
        b.output(b.add(b.input(0, 2), b.noise(10.0, 2)))
        circuit = b.build()
        first = delegated(circuit, {0: [0, 0]}, shamir3, seed=1)
        second = delegated(circuit, {0: [0, 0]}, shamir3, seed=2)
        assert first.outputs != second.outputs
        assert circuit.noise_gates() == [1]


class TestMetrics:
    def test_totals_consistent(self, scheme3):
        result = delegated(sum_circuit([0, 1, 2], width=8), {s: list(range(8)) for s in range(3)}, scheme3)
        metrics = result.metrics
        assert metrics.comp_time <= metrics.full_time
        assert metrics.bytes_global == sum(metrics.bytes_sent_per_party)
        assert metrics.client_bytes > 0
        assert metrics.open_count >= 1

    def test_player_rounds_independent_of_clients(self, shamir3):
        rounds = set()
        for clients in (1, 4, 8):
            circuit = sum_circuit(list(range(clients)))
            rounds.add(delegated(circuit, {c: [c] for c in range(clients)}, shamir3).metrics.rounds)
        assert len(rounds) == 1

    def test_delegated_rounds_match_depth(self, scheme3):
        cases = [
            (product_circuit([0, 1, 2, 3]), {s: [s + 2] for s in range(4)}),
            (sum_circuit([0, 1, 2]), {s: [s] for s in range(3)}),
            (noisy_max_circuit(4, 0.01, params=FP), {0: encode_scores([0.0, 3.0, 1.0, 2.0], FP)}),
            (noisy_max_circuit(5, 0.01, params=FP), {0: encode_scores([0.0, 3.0, 1.0, 2.0, 4.0], FP)}),
        ]
        for circuit, clients in cases:
            assert delegated(circuit, clients, scheme3).metrics.rounds == circuit.multiplicative_depth()

    def test_noisy_max_depth(self):
        assert noisy_max_circuit(4, 1.0).multiplicative_depth() == 5
        assert noisy_max_circuit(1, 1.0).multiplicative_depth() == 1

    @pytest.mark.parametrize("bits", [2, 8, 22])
    def test_bitwise_compare_rounds(self, scheme3, bits):
        b = CircuitBuilder("cmp", M127, FP)
        b.output(b.compare_gt_zero(b.input(0, 3), CompareMode.BITWISE, bits))
        circuit = b.build()
        result = delegated(circuit, {0: [1, -1, 0]}, scheme3)
        assert result.metrics.rounds == circuit.multiplicative_depth()

    def test_direct_rounds_include_input_sharing(self, scheme3):
        circuit = product_circuit([0, 1, 2])
        result = direct(circuit, {0: [2], 1: [3], 2: [4]}, scheme3)
        assert result.metrics.rounds == circuit.multiplicative_depth(include_inputs=True)
        assert circuit.multiplicative_depth(include_inputs=True) == circuit.multiplicative_depth() + 1

    def test_tcp_matches_memory(self, shamir3):
        circuit = elementwise_op_sum_circuit([0, 1, 2], 4, ElementwiseOp.MUL)
        data = {s: [s + 1, s + 2, s + 3, s + 4] for s in range(3)}
        memory = delegated(circuit, data, shamir3, seed=2)
        tcp = asyncio.run(run_delegated(circuit, 3, data, shamir3, transport="tcp", seed=2))
        assert tcp.outputs == memory.outputs
        assert tcp.metrics.rounds == memory.metrics.rounds

    def test_direct_model_five_players(self):
        circuit = elementwise_op_sum_circuit(list(range(5)), 4, ElementwiseOp.MUL)
        data = {s: [s + 1, 2, 3, s] for s in range(5)}
        scheme = SharingScheme.shamir(2, 5)
        assert direct(circuit, data, scheme).outputs == evaluate_plaintext(circuit, data)


@pytest.mark.slow
class TestRandomCircuitOracle:
    def _random_circuit(self, rng: random.Random, clients: int) -> Circuit:
        b = CircuitBuilder("random")
        width = rng.randint(1, 8)
        wires = [b.input(c, width) for c in range(clients)]
        for _ in range(rng.randint(1, 6)):
            x, y = rng.choice(wires), rng.choice(wires)
            op = rng.choice(["add", "sub", "mul", "mul_public"])
            if op == "mul_public":
                wires.append(b.mul_public(x, rng.randrange(1, 100)))
            else:
                wires.append(getattr(b, op)(x, y))
        b.output(wires[-1])
        b.output(b.sum(wires[-1]))
        return b.build()

    def test_two_hundred_instances(self):
        rng = random.Random(2024)
        for i in range(200):
            clients = rng.randint(1, 4)
            circuit = self._random_circuit(rng, clients)
            widths = circuit.input_widths()
            data = {c: [rng.randrange(M61) for _ in range(widths[c])] for c in range(clients)}
            scheme = SharingScheme.shamir(1, 3) if i % 2 else SharingScheme.additive(3)
            assert delegated(circuit, data, scheme, seed=i).outputs == evaluate_plaintext(circuit, data)

    @pytest.mark.parametrize("scheme", [SharingScheme.shamir(1, 3), SharingScheme.additive(3)], ids=["shamir", "additive"])
    @pytest.mark.parametrize("workload", ["sum", "product", "elementwise", "average_wage"])
    def test_workload_instances(self, workload, scheme):
        rng = random.Random(workload)
        for i in range(200):
            sources = list(range(rng.randint(1, 4)))
            width = rng.randint(1, 128)
            if workload == "sum":
                circuit = sum_circuit(sources, width)
            elif workload == "product":
                circuit = product_circuit(sources, width)
            elif workload == "elementwise":
                circuit = elementwise_op_sum_circuit(sources, width, rng.choice(list(ElementwiseOp)))
            else:
                circuit = average_wage_circuit(sources)
            if workload == "average_wage":
                data = {s: [rng.randrange(10, 100), 1] for s in sources}
            else:
                data = {s: [rng.randrange(M61) for _ in range(width)] for s in sources}
            assert delegated(circuit, data, scheme, seed=i).outputs == evaluate_plaintext(circuit, data)
