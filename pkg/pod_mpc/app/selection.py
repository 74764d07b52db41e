"""Choosing encryption and computation agents from the providers' preferences."""

import logging
import random
from typing import List, Optional, Sequence, Tuple

from ..errors import EmptyIntersection, InsufficientUnion, InvalidParameters
from ..mpc.protocols import ProtocolClass
from ..pod.models import PreferenceFile
from .models import AgentSelection, SelectionPolicy

logger = logging.getLogger(__name__)


def select_agents(preferences: Sequence[Tuple[str, PreferenceFile]], policy: SelectionPolicy, m: int,
                  seed: int = 0, requested_protocol: Optional[ProtocolClass] = None) -> AgentSelection:
    """
    Pick one encryption agent per provider and m computation agents.

    Args:
        preferences: (provider identity, preference file) in description order
        policy: SUBSET takes the lexicographically smallest m agents every
            provider trusts; UNION_RANDOM draws m agents uniformly from the
            union of the trusted lists
        m: Number of computation agents
        seed: Randomness of the UNION_RANDOM draw
        requested_protocol: Overrides the policy's default protocol

    Returns:
        The selection; the protocol defaults to honest majority for SUBSET
        and dishonest majority for UNION_RANDOM

    Raises:
        EmptyIntersection: SUBSET and fewer than m agents trusted by everyone
        InsufficientUnion: UNION_RANDOM and fewer than m agents in the union
    """
    if not preferences:
        raise InvalidParameters("No providers to select agents for")
    encryption_agents = {}
    for provider, prefs in preferences:
        if not prefs.trusted_encryption_agents:
            raise InvalidParameters(f"{provider} trusts no encryption agent", provider=provider)
        if not prefs.trusted_computation_agents:
            raise InvalidParameters(f"{provider} trusts no computation agent", provider=provider)
        encryption_agents[provider] = prefs.trusted_encryption_agents[0]

    lists = [set(prefs.trusted_computation_agents) for _, prefs in preferences]
    policy = SelectionPolicy(policy)
    if policy == SelectionPolicy.SUBSET:
        common = sorted(set.intersection(*lists))
        if len(common) < m:
            raise EmptyIntersection(f"Providers share {len(common)} trusted CAs, {m} needed")
        chosen: List[str] = common[:m]
        protocol = ProtocolClass.HONEST_MAJORITY_SEMI_HONEST
    else:
        union = sorted(set.union(*lists))
        if len(union) < m:
            raise InsufficientUnion(f"Providers trust {len(union)} CAs in total, {m} needed")
        chosen = sorted(random.Random(seed).sample(union, m))
        protocol = ProtocolClass.DISHONEST_MAJORITY_SEMI_HONEST

    protocol = requested_protocol or protocol
    logger.info(f"Selected CAs {chosen} under {policy.value}, protocol {protocol.value}")
    return AgentSelection(encryption_agents=encryption_agents, computation_agents=chosen, protocol=protocol)
