"""Sampling-constrained weighted-RTE minimization and the baseline policies.

Each sensor's feasible set is the triangle ``{a_1, a_2 >= 0, a_1 + a_2 <= Gamma_k}``
with corners ``(1,0,0)``, ``(1-G,G,0)``, ``(1-G,0,G)``. When both sources have
``lambda = 1 - alpha - beta <= 0`` every per-source RTE is concave in its
update probability, the objective is concave in each policy block, and the
best of the nine corner pairs is a global minimizer. Outside that regime the
grid solver only reports the best point it found.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .access import (
    Budget,
    MprChannel,
    SamplingPolicy,
    TdmaSchedule,
    UpdateProbs,
    effective_update_probs,
    tdma_prob_matrices,
    tdma_update_probs,
    update_prob_matrices,
)
from .core import SourceParams, cae_weight_transform, rte_value, weighted_objective
from .errors import InvalidParameterError

log = logging.getLogger(__name__)

REFINE_FACTOR = 0.25
DEFAULT_RESOLUTION = 101
DEFAULT_REFINE_ROUNDS = 3


class ObjectiveKind(str, enum.Enum):
    RTE = "rte"
    CAE = "cae"


class Certificate(str, enum.Enum):
    GLOBAL_BY_THEOREM = "global-vertex"
    BEST_FOUND = "best-found"


@dataclass(frozen=True)
class Scenario:
    source_1: SourceParams
    source_2: SourceParams
    channel: MprChannel
    budget: Budget
    objective_kind: ObjectiveKind = ObjectiveKind.RTE

    def __post_init__(self):
        object.__setattr__(self, "objective_kind", ObjectiveKind(self.objective_kind))

    @property
    def sources(self) -> tuple[SourceParams, SourceParams]:
        return self.source_1, self.source_2

    @property
    def weights(self) -> tuple[float, float]:
        """Weights actually used on the RTE terms (CAE folds its costs in here)."""
        if self.objective_kind is ObjectiveKind.CAE:
            return cae_weight_transform(self.source_1), cae_weight_transform(self.source_2)
        return self.source_1.weight, self.source_2.weight

    @property
    def vertex_regime(self) -> bool:
        """True when both sources have lambda <= 0 (corner optimality holds)."""
        return self.source_1.lam <= 0.0 and self.source_2.lam <= 0.0

    def with_budget(self, gamma_1: float, gamma_2: float | None = None) -> Scenario:
        return replace(self, budget=Budget(gamma_1, gamma_1 if gamma_2 is None else gamma_2))

    def with_weights(self, w1: float, w2: float) -> Scenario:
        return replace(
            self,
            source_1=replace(self.source_1, weight=w1),
            source_2=replace(self.source_2, weight=w2),
        )

    def kernel_params(self) -> np.ndarray:
        w1, w2 = self.weights
        s1, s2 = self.sources
        return np.array([s1.alpha, s1.beta, s2.alpha, s2.beta, w1, w2])


@dataclass(frozen=True)
class PolicySolution:
    policy_1: SamplingPolicy
    policy_2: SamplingPolicy
    update_probs: UpdateProbs
    objective_value: float
    method: str
    optimality_certificate: Certificate = Certificate.BEST_FOUND
    schedule: TdmaSchedule | None = None
    per_source: tuple[float, float] = field(default=(0.0, 0.0))


def objective_from_q(s: Scenario, q: UpdateProbs) -> tuple[float, tuple[float, float]]:
    """Weighted objective and the two per-source RTEs; ``q_i = 0`` gives the limit RTE."""
    e = tuple(float(rte_value(src.alpha, src.beta, qi)) for src, qi in zip(s.sources, q))
    return weighted_objective(e, s.weights), e


def evaluate_policies(s: Scenario, a1: SamplingPolicy, a2: SamplingPolicy, method: str, cert=Certificate.BEST_FOUND) -> PolicySolution:
    for k, a in enumerate((a1, a2)):
        if a.rate > s.budget[k] + 1e-12:
            raise InvalidParameterError(f"policy of sensor {k + 1} exceeds its budget")
    q = effective_update_probs(a1, a2, s.channel)
    val, e = objective_from_q(s, q)
    return PolicySolution(a1, a2, q, val, method, cert, per_source=e)


def evaluate_schedule(s: Scenario, sched: TdmaSchedule, method: str = "tdma") -> PolicySolution:
    sched.check_budget(s.budget)
    q = tdma_update_probs(sched, s.channel)
    val, e = objective_from_q(s, q)
    p1, p2 = sched.marginal_policies()
    return PolicySolution(p1, p2, q, val, method, Certificate.BEST_FOUND, schedule=sched, per_source=e)


def recompute_objective(s: Scenario, sol: PolicySolution) -> float:
    """Objective rebuilt from the reported policies (or schedule) alone."""
    if sol.schedule is not None:
        q = tdma_update_probs(sol.schedule, s.channel)
    else:
        q = effective_update_probs(sol.policy_1, sol.policy_2, s.channel)
    return objective_from_q(s, q)[0]


def vertex_set(gamma: float) -> list[SamplingPolicy]:
    if not (0.0 < gamma <= 1.0):
        raise InvalidParameterError(f"gamma={gamma!r} must lie in (0, 1]")
    return [
        SamplingPolicy(1.0, 0.0, 0.0),
        SamplingPolicy(1.0 - gamma, gamma, 0.0),
        SamplingPolicy(1.0 - gamma, 0.0, gamma),
    ]


def vertex_candidates(s: Scenario) -> list[PolicySolution]:
    """All nine corner pairs, sensor 1 corner in the outer loop."""
    return [
        evaluate_policies(s, v1, v2, "vertex-enum")
        for v1 in vertex_set(s.budget.gamma_1)
        for v2 in vertex_set(s.budget.gamma_2)
    ]


def solve_vertex_enum(s: Scenario) -> PolicySolution:
    cands = vertex_candidates(s)
    best = 0
    for idx, c in enumerate(cands):
        log.debug("vertex pair %d: q=(%.6g, %.6g) objective=%.12g", idx, c.update_probs.q_1, c.update_probs.q_2, c.objective_value)
        if c.objective_value < cands[best].objective_value:
            best = idx
    cert = Certificate.GLOBAL_BY_THEOREM if s.vertex_regime else Certificate.BEST_FOUND
    return replace(cands[best], optimality_certificate=cert)


def triangle_grid(gamma: float, resolution: int) -> np.ndarray:
    """Policy rows ``(silent, s1, s2)`` on the lattice ``s1, s2 in gamma * {0, 1/(n-1), ..., 1}``, ``s1 + s2 <= gamma``."""
    if resolution < 2:
        raise InvalidParameterError("resolution must be at least 2")
    n = resolution - 1
    i, j = np.meshgrid(np.arange(n + 1), np.arange(n + 1), indexing="ij")
    keep = (i + j) <= n
    x = gamma * (i[keep] / n)
    y = gamma * (j[keep] / n)
    return _rows(x, y)


def _rows(x, y):
    x = np.where(np.abs(x) < 1e-15, 0.0, x)
    y = np.where(np.abs(y) < 1e-15, 0.0, y)
    return np.column_stack([np.maximum(0.0, 1.0 - x - y), x, y])


def _local_grid(center, half_width, gamma, resolution):
    """Square lattice around ``center`` clipped to the feasible triangle, incumbent included."""
    ticks = np.linspace(-half_width, half_width, resolution)
    dx, dy = np.meshgrid(ticks, ticks, indexing="ij")
    x = center[1] + dx.ravel()
    y = center[2] + dy.ravel()
    keep = (x >= 0.0) & (y >= 0.0) & (x + y <= gamma + 1e-12)
    pts = _rows(x[keep], y[keep])
    return np.vstack([center[None, :], pts])


def _policy(row) -> SamplingPolicy:
    return SamplingPolicy.from_rates(float(row[1]), float(row[2]))


def _grid_search(s, m1, m2, resolution, refine_rounds, airtime_cap):
    params = s.kernel_params()
    g1, g2 = s.budget.gamma_1, s.budget.gamma_2
    A = triangle_grid(g1, resolution)
    B = triangle_grid(g2, resolution)
    i, j, val = kernels.grid_argmin(A, B, m1, m2, params, airtime_cap)
    a, b = A[i], B[j]
    for r in range(1, refine_rounds + 1):
        cand = _local_grid(a, g1 * REFINE_FACTOR**r, g1, resolution)
        i, _, v = kernels.grid_argmin(cand, b[None, :], m1, m2, params, airtime_cap)
        if v < val:
            a, val = cand[i], v
        cand = _local_grid(b, g2 * REFINE_FACTOR**r, g2, resolution)
        _, j, v = kernels.grid_argmin(a[None, :], cand, m1, m2, params, airtime_cap)
        if v < val:
            b, val = cand[j], v
    return a, b


def solve_grid(s: Scenario, resolution: int = DEFAULT_RESOLUTION, refine_rounds: int = DEFAULT_REFINE_ROUNDS) -> PolicySolution:
    m1, m2 = update_prob_matrices(s.channel)
    a, b = _grid_search(s, m1, m2, resolution, refine_rounds, np.inf)
    return evaluate_policies(s, _policy(a), _policy(b), "grid-search")


def solve(s: Scenario, resolution: int = DEFAULT_RESOLUTION, refine_rounds: int = DEFAULT_REFINE_ROUNDS) -> PolicySolution:
    """Corner enumeration when it is provably optimal, grid search otherwise."""
    if s.vertex_regime:
        return solve_vertex_enum(s)
    return solve_grid(s, resolution, refine_rounds)


def baseline_random(s: Scenario) -> PolicySolution:
    g1, g2 = s.budget.gamma_1, s.budget.gamma_2
    return evaluate_policies(
        s,
        SamplingPolicy(1.0 - g1, g1 * 0.5, g1 * 0.5),
        SamplingPolicy(1.0 - g2, g2 * 0.5, g2 * 0.5),
        "random",
    )


def baseline_greedy(s: Scenario, target: int) -> PolicySolution:
    if target not in (1, 2):
        raise InvalidParameterError("target must be 1 or 2")
    corners = [vertex_set(g)[target] for g in (s.budget.gamma_1, s.budget.gamma_2)]
    return evaluate_policies(s, corners[0], corners[1], f"greedy{target}")


def baseline_tdma(s: Scenario, resolution: int = DEFAULT_RESOLUTION, refine_rounds: int = DEFAULT_REFINE_ROUNDS) -> PolicySolution:
    """Best time-orthogonal schedule: per-sensor budgets plus total airtime <= 1."""
    m1, m2 = tdma_prob_matrices(s.channel)
    a, b = _grid_search(s, m1, m2, resolution, refine_rounds, 1.0)
    sched = TdmaSchedule(float(a[1]), float(a[2]), float(b[1]), float(b[2]))
    return evaluate_schedule(s, sched)
