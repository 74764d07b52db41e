"""Differential privacy exports"""

from .histogram import Histogram, bin_data, bin_edges
from .queries import LinearQuery, eval_query, random_queries, load_queries, save_queries
from .mechanisms import laplace_mechanism, exponential_mechanism, report_noisy_max
from .mwem import (MwemConfig, MwemMode, SyntheticDistribution, mw_update, mwem_plaintext,
                   mwem_noisy_max_oracle, replay_mwem, sample_synthetic)
from .circuit_builder import MwemSetting, build_mwem_circuit, synthetic_from_outputs, client_inputs
from .secure import noisy_max_select
from .audit import AuditResult, empirical_dp_check, laplace_count_mechanism

__all__ = ['Histogram', 'bin_data', 'bin_edges', 'LinearQuery', 'eval_query', 'random_queries', 'load_queries',
           'save_queries', 'laplace_mechanism', 'exponential_mechanism', 'report_noisy_max', 'MwemConfig',
           'MwemMode', 'SyntheticDistribution', 'mw_update', 'mwem_plaintext', 'mwem_noisy_max_oracle',
           'replay_mwem', 'sample_synthetic', 'MwemSetting', 'build_mwem_circuit', 'synthetic_from_outputs',
           'client_inputs', 'noisy_max_select', 'AuditResult', 'empirical_dp_check', 'laplace_count_mechanism']
