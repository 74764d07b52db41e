"""MPC engine exports"""

from .circuit import Circuit, CircuitBuilder, CompareMode, CostProfile, Gate, GateOp
from .protocols import ProtocolClass, allowed_protocols
from .metrics import PartyMetrics, RunMetrics
from .session import PlayerSession, secure_mul, trunc, compare_gt_zero, joint_noise_input
from .node import PlayerNode, ClientInjector, JobSpec, JobOutcome
from .runner import LocalCluster, JobResult, run_direct, run_delegated, make_job_id
from .plaintext import evaluate_plaintext

__all__ = ['Circuit', 'CircuitBuilder', 'CompareMode', 'CostProfile', 'Gate', 'GateOp', 'ProtocolClass',
           'allowed_protocols', 'PartyMetrics', 'RunMetrics', 'PlayerSession', 'secure_mul', 'trunc',
           'compare_gt_zero', 'joint_noise_input', 'PlayerNode', 'ClientInjector', 'JobSpec', 'JobOutcome',
           'LocalCluster', 'JobResult', 'run_direct', 'run_delegated', 'make_job_id', 'evaluate_plaintext']
