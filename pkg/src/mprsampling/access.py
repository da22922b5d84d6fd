"""Access layer: sampling policies, budgets, the MPR channel and TDMA schedules.

Sensor ``k`` picks action 0 (silent), 1 (sample source 1) or 2 (sample source 2)
independently in every slot. When both transmit, the two decodings are
independent Bernoulli trials with the joint success probabilities.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError

SIMPLEX_TOL = 1e-12
BUDGET_TOL = 1e-12


def _check_prob(name, v):
    if not (0.0 <= v <= 1.0):
        raise InvalidParameterError(f"{name}={v!r} must lie in [0, 1]")


@dataclass(frozen=True)
class MprChannel:
    """Decoding success probabilities.

    ``p_solo_k``: sensor k transmits alone. ``p_joint_k``: sensor k's packet
    when both sensors transmit in the same slot.
    """

    p_solo_1: float
    p_solo_2: float
    p_joint_1: float
    p_joint_2: float

    def __post_init__(self):
        for name in ("p_solo_1", "p_solo_2", "p_joint_1", "p_joint_2"):
            _check_prob(name, getattr(self, name))
        if self.p_joint_1 > self.p_solo_1 or self.p_joint_2 > self.p_solo_2:
            raise InvalidParameterError("joint success probability cannot exceed the solo one")

    @property
    def p_any_joint(self) -> float:
        """At least one of two simultaneous packets decoded."""
        return 1.0 - (1.0 - self.p_joint_1) * (1.0 - self.p_joint_2)


@dataclass(frozen=True)
class SamplingPolicy:
    silent: float
    sample_1: float
    sample_2: float

    def __post_init__(self):
        vals = (self.silent, self.sample_1, self.sample_2)
        if min(vals) < 0.0 or abs(sum(vals) - 1.0) > SIMPLEX_TOL:
            raise InvalidParameterError(f"policy {vals} is not a probability vector")

    @classmethod
    def from_rates(cls, sample_1: float, sample_2: float) -> SamplingPolicy:
        return cls(max(0.0, 1.0 - sample_1 - sample_2), sample_1, sample_2)

    @property
    def rate(self) -> float:
        """Per-slot transmission probability."""
        return self.sample_1 + self.sample_2

    def as_array(self) -> np.ndarray:
        return np.array([self.silent, self.sample_1, self.sample_2])


@dataclass(frozen=True)
class Budget:
    gamma_1: float
    gamma_2: float

    def __post_init__(self):
        for name in ("gamma_1", "gamma_2"):
            v = getattr(self, name)
            if not (0.0 < v <= 1.0):
                raise InvalidParameterError(f"{name}={v!r} must lie in (0, 1]")

    def __getitem__(self, k: int) -> float:
        return (self.gamma_1, self.gamma_2)[k]


@dataclass(frozen=True)
class TdmaSchedule:
    """Long-run fraction of slots in which sensor k sends source i (``tau_ki``)."""

    tau_11: float = 0.0
    tau_12: float = 0.0
    tau_21: float = 0.0
    tau_22: float = 0.0

    def __post_init__(self):
        for name in ("tau_11", "tau_12", "tau_21", "tau_22"):
            _check_prob(name, getattr(self, name))
        if self.total > 1.0 + BUDGET_TOL:
            raise InvalidParameterError(f"TDMA airtime {self.total} exceeds 1")

    @property
    def total(self) -> float:
        return self.tau_11 + self.tau_12 + self.tau_21 + self.tau_22

    def check_budget(self, budget: Budget) -> None:
        if self.tau_11 + self.tau_12 > budget.gamma_1 + BUDGET_TOL:
            raise InvalidParameterError("sensor 1 airtime exceeds its budget")
        if self.tau_21 + self.tau_22 > budget.gamma_2 + BUDGET_TOL:
            raise InvalidParameterError("sensor 2 airtime exceeds its budget")

    def marginal_policies(self) -> tuple[SamplingPolicy, SamplingPolicy]:
        return (
            SamplingPolicy.from_rates(self.tau_11, self.tau_12),
            SamplingPolicy.from_rates(self.tau_21, self.tau_22),
        )


@dataclass(frozen=True)
class UpdateProbs:
    q_1: float
    q_2: float

    def __iter__(self):
        return iter((self.q_1, self.q_2))


def effective_update_probs(a1: SamplingPolicy, a2: SamplingPolicy, ch: MprChannel) -> UpdateProbs:
    a = (a1.silent, a1.sample_1, a1.sample_2)
    b = (a2.silent, a2.sample_1, a2.sample_2)
    q = []
    for i in (1, 2):
        j = 1 + (i % 2)
        q.append(
            a[i] * b[0] * ch.p_solo_1
            + a[0] * b[i] * ch.p_solo_2
            + a[i] * b[i] * ch.p_any_joint
            + a[i] * b[j] * ch.p_joint_1
            + a[j] * b[i] * ch.p_joint_2
        )
    return UpdateProbs(*q)


def update_prob_matrices(ch: MprChannel) -> tuple[np.ndarray, np.ndarray]:
    """Bilinear forms ``M_i`` with ``q_i = a1 @ M_i @ a2`` for MPR access."""
    m1 = np.zeros((3, 3))
    m2 = np.zeros((3, 3))
    m1[1, 0] = ch.p_solo_1
    m1[0, 1] = ch.p_solo_2
    m1[1, 1] = ch.p_any_joint
    m1[1, 2] = ch.p_joint_1
    m1[2, 1] = ch.p_joint_2
    m2[2, 0] = ch.p_solo_1
    m2[0, 2] = ch.p_solo_2
    m2[2, 2] = ch.p_any_joint
    m2[2, 1] = ch.p_joint_1
    m2[1, 2] = ch.p_joint_2
    return m1, m2


def tdma_prob_matrices(ch: MprChannel) -> tuple[np.ndarray, np.ndarray]:
    """TDMA update probabilities in the same bilinear shape as the MPR case.

    The TDMA map is linear in the airtime fractions; since each policy vector
    sums to one, ``tau_1i * p_solo_1 + tau_2i * p_solo_2`` equals ``a1 @ M_i @ a2``
    with these matrices.
    """
    m1 = np.zeros((3, 3))
    m2 = np.zeros((3, 3))
    m1[1, :] += ch.p_solo_1
    m1[:, 1] += ch.p_solo_2
    m2[2, :] += ch.p_solo_1
    m2[:, 2] += ch.p_solo_2
    return m1, m2


def tdma_update_probs(sched: TdmaSchedule, ch: MprChannel) -> UpdateProbs:
    return UpdateProbs(
        sched.tau_11 * ch.p_solo_1 + sched.tau_21 * ch.p_solo_2,
        sched.tau_12 * ch.p_solo_1 + sched.tau_22 * ch.p_solo_2,
    )


def validate_budget(a: SamplingPolicy, gamma: float) -> bool:
    return a.sample_1 + a.sample_2 <= gamma + BUDGET_TOL
