"""pod-mpc - delegated MPC over personal data stores"""

__version__ = "0.1.0"
__description__ = "Privacy-preserving collaborative computation over personal data stores"

# Main exports
from .config import AppConfig, create_app_config
from .errors import PodMpcError, exit_code_for
from .workloads import CircuitSpec, WorkloadKind, build_circuit

__all__ = [
    'AppConfig',
    'create_app_config',
    'PodMpcError',
    'exit_code_for',
    'CircuitSpec',
    'WorkloadKind',
    'build_circuit',
]
