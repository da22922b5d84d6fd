"""Reconstruction and actuation error of two binary Markov sources sampled over an MPR channel."""

from .access import (
    Budget,
    MprChannel,
    SamplingPolicy,
    TdmaSchedule,
    UpdateProbs,
    effective_update_probs,
    tdma_update_probs,
    validate_budget,
)
from .core import (
    JointChainAnalysis,
    SourceParams,
    build_joint_chain,
    cae_closed_form,
    cae_weight_transform,
    rte_closed_form,
    rte_closed_form_limit,
    stationary_source_dist,
    weighted_objective,
)
from .errors import ConfigError, DegenerateChainError, InvalidParameterError
from .optimizer import (
    Certificate,
    ObjectiveKind,
    PolicySolution,
    Scenario,
    baseline_greedy,
    baseline_random,
    baseline_tdma,
    solve,
    solve_grid,
    solve_vertex_enum,
    vertex_set,
)
from .simulator import SimConfig, SimResult, simulate, simulate_tdma

__version__ = "0.1.0"
