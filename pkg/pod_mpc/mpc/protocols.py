"""Protocol classes negotiated between data providers, the App and agents."""

from enum import Enum
from typing import Iterable, List, Optional

from ..core.sharing import SchemeKind, SharingScheme
from ..errors import InvalidScheme, ProtocolNotExecutable


class ProtocolClass(str, Enum):
    HONEST_MAJORITY_SEMI_HONEST = "HonestMajoritySemiHonest"
    DISHONEST_MAJORITY_SEMI_HONEST = "DishonestMajoritySemiHonest"
    COVERT_PLACEHOLDER = "CovertPlaceholder"
    MALICIOUS_PLACEHOLDER = "MaliciousPlaceholder"

    @property
    def executable(self) -> bool:
        return self in (ProtocolClass.HONEST_MAJORITY_SEMI_HONEST,
                        ProtocolClass.DISHONEST_MAJORITY_SEMI_HONEST)

    @property
    def strength(self) -> int:
        """Position on the escalation ladder; higher tolerates more corruption."""
        return _STRENGTH[self]

    def scheme(self, parties: int) -> SharingScheme:
        """
        Sharing scheme this protocol runs with ``parties`` players.

        Raises:
            ProtocolNotExecutable: For placeholder classes
            InvalidScheme: If the party count cannot support the protocol
        """
        if not self.executable:
            raise ProtocolNotExecutable(f"{self.value} is negotiation metadata only")
        if self == ProtocolClass.HONEST_MAJORITY_SEMI_HONEST:
            if parties < 3:
                raise InvalidScheme(f"{self.value} needs at least 3 players, got {parties}")
            return SharingScheme.for_parties(SchemeKind.SHAMIR, parties)
        return SharingScheme.additive(parties)


_STRENGTH = {
    ProtocolClass.HONEST_MAJORITY_SEMI_HONEST: 0,
    ProtocolClass.DISHONEST_MAJORITY_SEMI_HONEST: 1,
    ProtocolClass.COVERT_PLACEHOLDER: 2,
    ProtocolClass.MALICIOUS_PLACEHOLDER: 3,
}

ALL_PROTOCOLS: List[ProtocolClass] = sorted(ProtocolClass, key=lambda p: p.strength)


def protocols_at_least(minimum: ProtocolClass) -> List[ProtocolClass]:
    return [p for p in ALL_PROTOCOLS if p.strength >= minimum.strength]


def allowed_protocols(trusted_count: int, chosen_count: int,
                      accept_untrusted: bool = False,
                      preferred: Optional[Iterable[ProtocolClass]] = None) -> List[ProtocolClass]:
    """
    Protocol classes a provider accepts for a given CA selection.

    All chosen CAs trusted allows every class; some trusted requires
    dishonest-majority security or stronger; none trusted yields an empty
    list unless the provider opted into the acceptable-risk mode, where a
    dishonest-majority protocol is still required. The result is
    intersected with the provider's own allowed list when one is given.
    """
    if chosen_count > 0 and trusted_count >= chosen_count:
        allowed = list(ALL_PROTOCOLS)
    elif trusted_count >= 1 or accept_untrusted:
        allowed = protocols_at_least(ProtocolClass.DISHONEST_MAJORITY_SEMI_HONEST)
    else:
        allowed = []
    if preferred is not None:
        wanted = set(preferred)
        allowed = [p for p in allowed if p in wanted]
    return allowed
