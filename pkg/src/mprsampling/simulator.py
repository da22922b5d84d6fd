"""Slot-level Monte Carlo of the two-sensor, two-source system.

Per slot: both sources move, each sensor draws its action, transmitted packets
are decoded (independent Bernoulli trials, solo or joint probability), the
estimates synchronize on decoded updates, and then the error indicators are
recorded. Measuring after the update is what the closed forms assume.

Randomness comes from ``numpy.random.Generator(Philox(seed))``. Draw order is
fixed: two uniforms for the initial source states, then per chunk a
``(n, 6)`` block with columns ``src1, src2, act1, act2, dec1, dec2`` (TDMA uses
``act1`` for the schedule draw and ``dec1`` for decoding). Both kernel
backends read the same block, so their results are bit-identical.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from . import kernels
from .access import SamplingPolicy, TdmaSchedule
from .core import stationary_source_dist
from .errors import InvalidParameterError
from .optimizer import Scenario

DEFAULT_HORIZON = 1_000_000
DEFAULT_WARMUP = 10_000
N_BATCHES = 100
CHUNK = 1 << 18


@dataclass(frozen=True)
class SimConfig:
    scenario: Scenario
    policy: tuple[SamplingPolicy, SamplingPolicy] | TdmaSchedule
    horizon: int = DEFAULT_HORIZON
    seed: int = 0
    warmup: int = DEFAULT_WARMUP

    def __post_init__(self):
        if self.warmup < 0 or self.horizon <= self.warmup:
            raise InvalidParameterError("need horizon > warmup >= 0")
        if self.horizon - self.warmup < N_BATCHES:
            raise InvalidParameterError(f"need at least {N_BATCHES} measured slots")
        if not (0 <= self.seed < 2**64):
            raise InvalidParameterError("seed must be an unsigned 64-bit integer")
        budget = self.scenario.budget
        if isinstance(self.policy, TdmaSchedule):
            self.policy.check_budget(budget)
        else:
            for k, a in enumerate(self.policy):
                if a.rate > budget[k] + 1e-12:
                    raise InvalidParameterError(f"policy of sensor {k + 1} exceeds its budget")

    @property
    def is_tdma(self) -> bool:
        return isinstance(self.policy, TdmaSchedule)


@dataclass(frozen=True)
class SimResult:
    empirical_rte_1: float
    empirical_rte_2: float
    empirical_cae_1: float
    empirical_cae_2: float
    empirical_q_1: float
    empirical_q_2: float
    std_err_rte_1: float
    std_err_rte_2: float
    slots_measured: int
    std_err_cae_1: float = 0.0
    std_err_cae_2: float = 0.0
    std_err_q_1: float = 0.0
    std_err_q_2: float = 0.0
    mismatch_01_1: float = 0.0
    mismatch_01_2: float = 0.0
    mismatch_10_1: float = 0.0
    mismatch_10_2: float = 0.0
    std_err_mismatch_gap_1: float = 0.0
    std_err_mismatch_gap_2: float = 0.0

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def source(self, i: int) -> dict:
        """Estimates for source ``i`` keyed without the index suffix."""
        suffix = f"_{i}"
        return {k[: -len(suffix)]: v for k, v in self.as_dict().items() if k.endswith(suffix)}


def _mpr_updates(u, cfg):
    a1, a2 = cfg.policy
    ch = cfg.scenario.channel
    act1 = np.where(u[:, 2] < a1.silent, 0, np.where(u[:, 2] < 1.0 - a1.sample_2, 1, 2))
    act2 = np.where(u[:, 3] < a2.silent, 0, np.where(u[:, 3] < 1.0 - a2.sample_2, 1, 2))
    both = (act1 > 0) & (act2 > 0)
    z1 = (act1 > 0) & (u[:, 4] < np.where(both, ch.p_joint_1, ch.p_solo_1))
    z2 = (act2 > 0) & (u[:, 5] < np.where(both, ch.p_joint_2, ch.p_solo_2))
    return [((act1 == i) & z1) | ((act2 == i) & z2) for i in (1, 2)]


def _tdma_updates(u, cfg):
    s = cfg.policy
    ch = cfg.scenario.channel
    edges = np.cumsum([s.tau_11, s.tau_12, s.tau_21, s.tau_22])
    slot = np.searchsorted(edges, u[:, 2], side="right")  # 0..3 transmit, 4 silent
    sensor_1 = slot < 2
    p = np.where(sensor_1, ch.p_solo_1, ch.p_solo_2)
    z = (slot < 4) & (u[:, 4] < p)
    return [z & ((slot == 0) | (slot == 2)), z & ((slot == 1) | (slot == 3))]


def _batch_stats(sums, counts):
    means = sums / counts
    return float(np.std(means, ddof=1) / np.sqrt(len(means)))


def simulate(cfg: SimConfig) -> SimResult:
    srcs = cfg.scenario.sources
    rng = np.random.Generator(np.random.Philox(cfg.seed))
    u0 = rng.random(2)
    x = [int(u0[i] >= stationary_source_dist(srcs[i])[0]) for i in range(2)]
    xhat = list(x)
    draw_updates = _tdma_updates if cfg.is_tdma else _mpr_updates

    measured = cfg.horizon - cfg.warmup
    bsize = measured // N_BATCHES
    names = ("err", "cost", "upd", "m01", "m10")
    totals = {(n, i): 0.0 for n in names for i in range(2)}
    batches = {(n, i): np.zeros(N_BATCHES) for n in names for i in range(2)}
    batch_counts = np.zeros(N_BATCHES)

    t0 = 1  # slot index of the first row in the current chunk
    while t0 <= cfg.horizon:
        n = min(CHUNK, cfg.horizon - t0 + 1)
        u = rng.random((n, 6))
        upd = draw_updates(u, cfg)
        first = max(0, cfg.warmup + 1 - t0)
        bidx = (np.arange(t0 + first, t0 + n) - cfg.warmup - 1) // bsize
        in_batch = bidx < N_BATCHES
        bidx = bidx[in_batch]
        batch_counts += np.bincount(bidx, minlength=N_BATCHES)[:N_BATCHES]
        for i, src in enumerate(srcs):
            xs = kernels.propagate_source(u[:, i], src.alpha, src.beta, x[i])
            xh = kernels.hold_estimate(xs, upd[i], xhat[i])
            x[i], xhat[i] = int(xs[-1]), int(xh[-1])
            if first >= n:
                continue
            xs, xh = xs[first:], xh[first:]
            m01 = (xs == 0) & (xh == 1)
            m10 = (xs == 1) & (xh == 0)
            series = {
                "err": m01 | m10,
                "cost": src.cost_01 * m01 + src.cost_10 * m10,
                "upd": upd[i][first:],
                "m01": m01,
                "m10": m10,
            }
            for name, v in series.items():
                v = v.astype(np.float64)
                totals[name, i] += float(v.sum())
                batches[name, i] += np.bincount(bidx, weights=v[in_batch], minlength=N_BATCHES)[:N_BATCHES]
        t0 += n

    def mean(name, i):
        return totals[name, i] / measured

    def se(name, i):
        return _batch_stats(batches[name, i], batch_counts)

    def se_diff(i):
        return _batch_stats(batches["m01", i] - batches["m10", i], batch_counts)

    return SimResult(
        empirical_rte_1=mean("err", 0),
        empirical_rte_2=mean("err", 1),
        empirical_cae_1=mean("cost", 0),
        empirical_cae_2=mean("cost", 1),
        empirical_q_1=mean("upd", 0),
        empirical_q_2=mean("upd", 1),
        std_err_rte_1=se("err", 0),
        std_err_rte_2=se("err", 1),
        slots_measured=measured,
        std_err_cae_1=se("cost", 0),
        std_err_cae_2=se("cost", 1),
        std_err_q_1=se("upd", 0),
        std_err_q_2=se("upd", 1),
        mismatch_01_1=mean("m01", 0),
        mismatch_01_2=mean("m01", 1),
        mismatch_10_1=mean("m10", 0),
        mismatch_10_2=mean("m10", 1),
        std_err_mismatch_gap_1=se_diff(0),
        std_err_mismatch_gap_2=se_diff(1),
    )


def simulate_tdma(cfg: SimConfig) -> SimResult:
    if not cfg.is_tdma:
        raise InvalidParameterError("simulate_tdma needs a TdmaSchedule policy")
    return simulate(cfg)
