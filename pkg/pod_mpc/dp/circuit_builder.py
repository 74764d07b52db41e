"""
MWEM as an MPC circuit.

Only the data-dependent values stay secret: the histogram H and the true
query answers q(D). Each iteration opens the noisy-max winner and the noisy
measurement; the multiplicative-weights update on A is replayed in public
by a registered PUBLIC_MAP gate from those opened values.
"""

import logging
import math
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, List, Sequence, Tuple, Union

from ..core.field import M127, FixedPointParams, to_signed
from ..errors import InvalidParameters, UnsupportedMode
from ..mpc.circuit import Circuit, CircuitBuilder, CompareMode
from ..mpc.public_maps import register_public_map
from .histogram import Histogram, bin_data
from .mwem import (
    MwemConfig,
    MwemMode,
    NoisyMaxRelease,
    SyntheticDistribution,
    quantized_answers,
    replay_mwem,
)
from .queries import LinearQuery

logger = logging.getLogger(__name__)

QUERY_ANSWERS_MAP = "mwem.query_answers"
MWEM_FIXED_POINT = FixedPointParams(f=20, k=40, s=40)


class MwemSetting(str, Enum):
    """Where the histogram is built: by the players from raw points, or by each client."""
    IN_MPC_BINNING = "in_mpc_binning"
    CLIENT_BINNING = "client_binning"

    @classmethod
    def from_number(cls, setting: int) -> "MwemSetting":
        """Settings 1 and 2 bin inside MPC (fixed total vs fixed per provider); 3 bins at the client."""
        if setting in (1, 2):
            return cls.IN_MPC_BINNING
        if setting == 3:
            return cls.CLIENT_BINNING
        raise InvalidParameters(f"Unknown MWEM setting {setting}")


def bin_thresholds(bins: int, domain: Tuple[float, float]) -> List[int]:
    """Integer t_j with x > t_j iff x >= lower edge of bin j, for integer x."""
    lo, hi = Fraction(domain[0]), Fraction(domain[1])
    width = (hi - lo) / bins
    return [math.ceil(lo + j * width) - 1 for j in range(bins)]


def compare_bits(domain: Tuple[float, float]) -> int:
    span = math.ceil(domain[1]) - math.floor(domain[0])
    return span.bit_length() + 1


def _difference_matrix(bins: int) -> List[List[int]]:
    # H_j = S_j - S_{j+1}, S_B = 0
    matrix = []
    for j in range(bins):
        row = [0] * bins
        row[j] = 1
        if j + 1 < bins:
            row[j + 1] = -1
        matrix.append(row)
    return matrix


def build_mwem_circuit(cfg: MwemConfig, providers: Union[int, Sequence[int]],
                       setting: MwemSetting = MwemSetting.CLIENT_BINNING,
                       points_per_client: Union[int, Sequence[int]] = 100,
                       domain: Tuple[float, float] = (0, 100),
                       params: FixedPointParams = MWEM_FIXED_POINT) -> Circuit:
    """
    Build the delegated MWEM circuit.

    Args:
        cfg: MWEM configuration; must be in noisy-max mode
        providers: Number of providers (sources 0..n-1) or explicit source ids
        setting: Binning inside MPC or at the clients
        points_per_client: Raw points each provider injects (in-MPC binning only)
        domain: Integer data domain [lo, hi)
        params: Fixed-point layout; the circuit runs in M127

    Returns:
        Circuit whose outputs are, per iteration, the winning candidate index
        and the noisy measurement (signed fixed point)

    Raises:
        UnsupportedMode: Exponential-mechanism mode requested
    """
    if cfg.mode != MwemMode.NOISY_MAX:
        raise UnsupportedMode("The exponential mechanism only runs in plaintext; use noisy_max for MPC")
    sources = list(range(providers)) if isinstance(providers, int) else list(providers)
    if not sources:
        raise InvalidParameters("MWEM circuit needs at least one provider")
    setting = MwemSetting(setting)
    B = cfg.bins
    Q = len(cfg.queries)

    b = CircuitBuilder(f"mwem_{setting.value}", M127, params)
    b.context["mwem"] = {
        "queries": [q.weights for q in cfg.queries],
        "n": cfg.n,
        "bins": B,
    }
    b.context["magnitude_bits"] = max(cfg.n, 1).bit_length() + params.f + 18

    if setting == MwemSetting.CLIENT_BINNING:
        H = b.input(sources[0], B)
        for src in sources[1:]:
            H = b.add(H, b.input(src, B))
    else:
        counts = ([points_per_client] * len(sources) if isinstance(points_per_client, int)
                  else list(points_per_client))
        if len(counts) != len(sources):
            raise InvalidParameters(f"{len(counts)} point counts for {len(sources)} providers")
        points = [b.input(src, c) for src, c in zip(sources, counts)]
        pooled = b.concat(*points) if len(points) > 1 else points[0]
        N = sum(counts)
        thresholds = bin_thresholds(B, domain)
        tiled = b.concat(*([pooled] * B)) if B > 1 else pooled
        shifted = b.sub(tiled, b.const([t for t in thresholds for _ in range(N)]))
        above = b.compare_gt_zero(shifted, CompareMode.BITWISE, compare_bits(domain))
        at_least = [b.sum(b.slice(above, j * N, (j + 1) * N)) for j in range(B)]
        S = b.concat(*at_least) if B > 1 else at_least[0]
        H = b.matvec_public(S, _difference_matrix(B))

    W = [q.quantized(params) for q in cfg.queries]
    qD = b.matvec_public(H, W)
    released: List[int] = []
    for i in range(cfg.iterations):
        qA = b.public_map(QUERY_ANSWERS_MAP, list(released), Q, iteration=i)
        d = b.sub(qA, qD)
        candidates = b.concat(d, b.mul_public(d, -1))
        noisy = b.add(candidates, b.noise(cfg.selection_scale, 2 * Q))
        idx = b.argmax(noisy)
        m = b.open(b.add(b.select_public(qD, idx), b.noise(cfg.measurement_scale, 1)))
        b.output(idx)
        b.output(m)
        released += [idx, m]
    circuit = b.build()
    logger.debug(f"Built {circuit.name}: {len(circuit.gates)} gates, {len(sources)} providers")
    return circuit


def _queries_from_context(circuit: Circuit) -> Tuple[List[LinearQuery], Dict[str, Any]]:
    ctx = circuit.context.get("mwem")
    if ctx is None:
        raise InvalidParameters(f"Circuit {circuit.name} carries no MWEM context")
    return [LinearQuery(weights=w) for w in ctx["queries"]], ctx


@register_public_map(QUERY_ANSWERS_MAP)
def query_answers(circuit: Circuit, operands: List[List[int]], params: Dict[str, Any]) -> List[int]:
    """Fixed-point q(A_{i-1}) for every query, replayed from the opened (index, measurement) pairs."""
    queries, ctx = _queries_from_context(circuit)
    fp = circuit.fixed_point
    stream = [(to_signed(operands[j][0], circuit.modulus),
               to_signed(operands[j + 1][0], circuit.modulus) / fp.scale)
              for j in range(0, len(operands), 2)]
    A = replay_mwem(stream, queries, int(ctx["n"]), int(ctx["bins"])).as_array()
    return quantized_answers(A, [q.quantized(fp) for q in queries], fp)


def decode_releases(circuit: Circuit, outputs: Sequence[Sequence[int]]) -> List[NoisyMaxRelease]:
    """Pair the opened outputs back into per-iteration releases."""
    if len(outputs) % 2:
        raise InvalidParameters("MWEM outputs come in (index, measurement) pairs")
    P = circuit.modulus
    return [NoisyMaxRelease(index=to_signed(outputs[j][0], P), measurement=to_signed(outputs[j + 1][0], P))
            for j in range(0, len(outputs), 2)]


def synthetic_from_outputs(circuit: Circuit, outputs: Sequence[Sequence[int]],
                           average_output: bool = False) -> SyntheticDistribution:
    """A_T rebuilt from a finished MWEM job's opened outputs."""
    queries, ctx = _queries_from_context(circuit)
    scale = circuit.fixed_point.scale
    stream = [(r.index, r.measurement / scale) for r in decode_releases(circuit, outputs)]
    return replay_mwem(stream, queries, int(ctx["n"]), int(ctx["bins"]), average_output)


def client_inputs(setting: MwemSetting, points: Sequence[int], bins: int,
                  domain: Tuple[float, float]) -> List[int]:
    """What one provider injects: its binned counts, or its raw points."""
    if MwemSetting(setting) == MwemSetting.CLIENT_BINNING:
        return list(bin_data(points, bins, domain).counts)
    bin_data(points, bins, domain)
    return [int(x) for x in points]


def pooled_histogram(data: Dict[int, Sequence[int]], bins: int, domain: Tuple[float, float]) -> Histogram:
    """Plaintext histogram of every provider's points together."""
    return bin_data([x for src in sorted(data) for x in data[src]], bins, domain)
