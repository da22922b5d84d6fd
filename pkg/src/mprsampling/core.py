"""Binary Markov source, the joint (source, estimate) chain and its error metrics.

The receiver runs a synchronize-or-hold estimator: in every slot the source
moves first, then a successfully decoded update (probability ``q``) copies the
current source state into the estimate. The pair ``(X, X_hat)`` is a 4-state
Markov chain ordered ``(0,0), (0,1), (1,0), (1,1)``.

At ``q = 0`` the chain is reducible (the estimate never moves), so the
stationary solve is refused there. The only value exposed for that case is the
``q -> 0+`` limit, i.e. the disagreement probability of two independent
stationary samples; what happens at exactly ``q = 0`` depends on the initial
estimate and is not modelled.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateChainError, InvalidParameterError

#: α and β must lie in [PARAM_EPS, 1 - PARAM_EPS].
PARAM_EPS = 1e-9

STATES = ((0, 0), (0, 1), (1, 0), (1, 1))


@dataclass(frozen=True)
class SourceParams:
    """One binary Markov source with its semantic weight and actuation costs.

    ``alpha`` is the 0->1 and ``beta`` the 1->0 transition probability per slot.
    ``cost_01`` is charged while the source is 0 and the estimate 1,
    ``cost_10`` in the opposite mismatch.
    """

    alpha: float
    beta: float
    weight: float = 1.0
    cost_01: float = 1.0
    cost_10: float = 1.0

    def __post_init__(self):
        for name in ("alpha", "beta"):
            v = getattr(self, name)
            if not (PARAM_EPS <= v <= 1.0 - PARAM_EPS):
                raise InvalidParameterError(f"{name}={v!r} must lie strictly inside (0, 1)")
        for name in ("weight", "cost_01", "cost_10"):
            v = getattr(self, name)
            if not (v >= 0.0 and np.isfinite(v)):
                raise InvalidParameterError(f"{name}={v!r} must be a finite nonnegative number")

    @property
    def lam(self) -> float:
        """Correlation parameter ``1 - alpha - beta``."""
        return 1.0 - self.alpha - self.beta

    @property
    def cost_sum(self) -> float:
        return self.cost_01 + self.cost_10


@dataclass(frozen=True)
class JointChainAnalysis:
    transition: np.ndarray
    stationary: np.ndarray
    mismatch_prob_01: float
    mismatch_prob_10: float
    rte: float
    zeta: float


def _check_q(q: float, allow_zero: bool) -> float:
    q = float(q)
    lo_ok = q >= 0.0 if allow_zero else q > 0.0
    if not (lo_ok and q <= 1.0):
        bound = "[0, 1]" if allow_zero else "(0, 1]"
        raise InvalidParameterError(f"update probability q={q!r} outside {bound}")
    return q


def stationary_source_dist(src: SourceParams) -> tuple[float, float]:
    s = src.alpha + src.beta
    return src.beta / s, src.alpha / s


def joint_transition_matrix(src: SourceParams, q: float) -> np.ndarray:
    """4x4 row-stochastic matrix of ``(X, X_hat)`` for update probability ``q``."""
    q = _check_q(q, allow_zero=True)
    a, b = src.alpha, src.beta
    return np.array(
        [
            [1 - a, 0.0, a * (1 - q), a * q],
            [q * (1 - a), (1 - a) * (1 - q), 0.0, a],
            [b, 0.0, (1 - b) * (1 - q), q * (1 - b)],
            [b * q, b * (1 - q), 0.0, 1 - b],
        ]
    )


def solve_stationary(transition: np.ndarray) -> np.ndarray:
    """Stationary row vector via ``(I - T^T) pi = 0`` with a normalization row."""
    n = transition.shape[0]
    lhs = np.vstack([np.eye(n) - transition.T, np.ones((1, n))])
    rhs = np.zeros(n + 1)
    rhs[-1] = 1.0
    pi, *_ = np.linalg.lstsq(lhs, rhs, rcond=None)
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def stationary_power_iteration(transition: np.ndarray, tol: float = 1e-15, max_iter: int = 1_000_000) -> np.ndarray:
    """Stationary vector by repeated left-multiplication from the uniform vector.

    Kept separate from :func:`solve_stationary` so the two can check each other.
    Uses the lazy chain ``(I + T)/2`` so periodic chains still converge.
    """
    n = transition.shape[0]
    lazy = 0.5 * (np.eye(n) + transition)
    pi = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        nxt = pi @ lazy
        nxt /= nxt.sum()
        if np.max(np.abs(nxt - pi)) < tol:
            return nxt
        pi = nxt
    return pi


def build_joint_chain(src: SourceParams, q: float) -> JointChainAnalysis:
    q = _check_q(q, allow_zero=True)
    if q == 0.0:
        raise DegenerateChainError(
            "joint chain is reducible at q=0; use rte_closed_form_limit for the q->0 value"
        )
    T = joint_transition_matrix(src, q)
    pi = solve_stationary(T)
    p01, p10 = float(pi[1]), float(pi[2])
    rte = p01 + p10
    return JointChainAnalysis(
        transition=T,
        stationary=pi,
        mismatch_prob_01=p01,
        mismatch_prob_10=p10,
        rte=rte,
        zeta=rte / 2.0,
    )


def rte_value(alpha, beta, q):
    """Closed-form RTE on ``q in [0, 1]``, vectorized, no validation.

    At ``q = 0`` this evaluates to the ``q -> 0+`` limit. Used internally where
    a sensor serves a source with probability zero (greedy baselines).
    """
    s = alpha + beta
    return 2.0 * alpha * beta * (1.0 - q) / (s * (s - q * (s - 1.0)))


def rte_closed_form(src: SourceParams, q: float) -> float:
    q = _check_q(q, allow_zero=False)
    return float(rte_value(src.alpha, src.beta, q))


def rte_closed_form_limit(src: SourceParams) -> float:
    s = src.alpha + src.beta
    return 2.0 * src.alpha * src.beta / (s * s)


def cae_closed_form(src: SourceParams, q: float) -> float:
    return src.cost_sum * rte_closed_form(src, q) / 2.0


def weighted_objective(values, weights) -> float:
    (v1, v2), (w1, w2) = values, weights
    return w1 * v1 + w2 * v2


def cae_weight_transform(src: SourceParams) -> float:
    """Weight under which weighted RTE minimization equals weighted CAE minimization."""
    return src.weight * src.cost_sum / 2.0
