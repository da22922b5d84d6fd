"""Experiment runners, the TOML configuration schema and CSV output.

Every runner returns ``(header, rows)``; :func:`write_csv` formats numbers with
12 significant digits so that outputs are byte-stable for a fixed config.

Configuration (all keys optional; defaults reproduce the budget-sweep setup)::

    [scenario]
    objective = "rte"            # or "cae"
    [scenario.source_1]
    alpha = 0.8
    beta = 0.6
    weight = 0.5
    cost_01 = 1.0
    cost_10 = 1.0
    [scenario.source_2]
    alpha = 0.3
    beta = 0.2
    weight = 0.5
    [scenario.channel]
    p_solo_1 = 0.9
    p_solo_2 = 0.85
    p_joint_1 = 0.6
    p_joint_2 = 0.55
    [scenario.budget]
    gamma_1 = 1.0
    gamma_2 = 1.0

    [optimizer]
    resolution = 101
    refine_rounds = 3
    tdma_resolution = 101

    [sim]
    horizon = 1000000
    warmup = 10000
    seed = 0

    [rte_curves]
    pairs = [[0.1, 0.1], [0.3, 0.2], [0.5, 0.5], [0.8, 0.6], [0.9, 0.9]]
    q_grid = [0.01, 0.02, ..., 1.0]
    [gamma_sweep]
    grid = [0.01, 0.05, 0.10, ..., 0.95]
    [weight_sweep]
    grid = [0.0, 0.05, ..., 1.0]
    [validate]
    policies = ["greedy1", "random", "optimized", "tdma"]
"""

from __future__ import annotations

import csv
import enum
import io
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .access import Budget, MprChannel
from .core import SourceParams, rte_closed_form, rte_closed_form_limit
from .errors import ConfigError
from .optimizer import (
    DEFAULT_REFINE_ROUNDS,
    DEFAULT_RESOLUTION,
    Scenario,
    baseline_greedy,
    baseline_random,
    baseline_tdma,
    solve,
    solve_vertex_enum,
    vertex_candidates,
)
from .simulator import DEFAULT_HORIZON, DEFAULT_WARMUP, SimConfig, simulate

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

SIG_DIGITS = 12
Z_FAIL = 4.0


def _grid(start_k, stop_k, step):
    return [round(k * step, 10) for k in range(start_k, stop_k + 1)]


DEFAULT_CURVE_PAIRS = [(0.1, 0.1), (0.3, 0.2), (0.5, 0.5), (0.8, 0.6), (0.9, 0.9)]
DEFAULT_Q_GRID = _grid(1, 100, 0.01)
DEFAULT_GAMMA_GRID = [0.01] + _grid(1, 19, 0.05)
DEFAULT_WEIGHT_GRID = _grid(0, 20, 0.05)
DEFAULT_VALIDATE_POLICIES = ["greedy1", "random", "optimized", "tdma"]

DEFAULTS = {
    "scenario": {
        "objective": "rte",
        "source_1": {"alpha": 0.8, "beta": 0.6, "weight": 0.5, "cost_01": 1.0, "cost_10": 1.0},
        "source_2": {"alpha": 0.3, "beta": 0.2, "weight": 0.5, "cost_01": 1.0, "cost_10": 1.0},
        "channel": {"p_solo_1": 0.9, "p_solo_2": 0.85, "p_joint_1": 0.6, "p_joint_2": 0.55},
        "budget": {"gamma_1": 1.0, "gamma_2": 1.0},
    },
    "optimizer": {
        "resolution": DEFAULT_RESOLUTION,
        "refine_rounds": DEFAULT_REFINE_ROUNDS,
        "tdma_resolution": DEFAULT_RESOLUTION,
    },
    "sim": {"horizon": DEFAULT_HORIZON, "warmup": DEFAULT_WARMUP, "seed": 0},
    "rte_curves": {"pairs": DEFAULT_CURVE_PAIRS, "q_grid": DEFAULT_Q_GRID},
    "gamma_sweep": {"grid": DEFAULT_GAMMA_GRID},
    "weight_sweep": {"grid": DEFAULT_WEIGHT_GRID},
    "validate": {"policies": DEFAULT_VALIDATE_POLICIES},
}


class ExperimentKind(str, enum.Enum):
    RTE_CURVES = "rte-curves"
    GAMMA_SWEEP = "gamma-sweep"
    WEIGHT_SWEEP = "weight-sweep"
    VALIDATE = "validate"
    SOLVE = "solve"


@dataclass
class ExperimentSpec:
    kind: ExperimentKind
    scenario: Scenario
    sweep_grid: list = field(default_factory=list)
    solvers: list = field(default_factory=list)
    sim: dict = field(default_factory=dict)
    output_path: Path | None = None
    resolution: int = DEFAULT_RESOLUTION
    refine_rounds: int = DEFAULT_REFINE_ROUNDS
    tdma_resolution: int = DEFAULT_RESOLUTION
    curve_pairs: list = field(default_factory=lambda: list(DEFAULT_CURVE_PAIRS))

    def __post_init__(self):
        self.kind = ExperimentKind(self.kind)
        g = list(self.sweep_grid)
        if self.kind in (ExperimentKind.RTE_CURVES, ExperimentKind.GAMMA_SWEEP, ExperimentKind.WEIGHT_SWEEP):
            if not g:
                raise ConfigError("sweep grid is empty")
            if any(b <= a for a, b in zip(g, g[1:])):
                raise ConfigError("sweep grid must be strictly increasing")
            lo_open = self.kind is not ExperimentKind.WEIGHT_SWEEP
            if (g[0] <= 0.0 if lo_open else g[0] < 0.0) or g[-1] > 1.0:
                rng = "[0, 1]" if not lo_open else "(0, 1]"
                raise ConfigError(f"{self.kind.value} grid must lie in {rng}")


# ---------------------------------------------------------------------------
# config


def _merge(base, over, path=""):
    out = dict(base)
    for k, v in over.items():
        if k not in base:
            raise ConfigError(f"unknown config key {path}{k}")
        if isinstance(base[k], dict):
            if not isinstance(v, dict):
                raise ConfigError(f"{path}{k} must be a table")
            out[k] = _merge(base[k], v, f"{path}{k}.")
        else:
            out[k] = v
    return out


def load_config(path: str | Path | None) -> dict:
    """Parsed config merged over :data:`DEFAULTS`; unknown keys are rejected."""
    if path is None:
        return _merge(DEFAULTS, {})
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}") from exc
    return _merge(DEFAULTS, raw)


def scenario_from_config(cfg: dict) -> Scenario:
    sc = cfg["scenario"]
    try:
        return Scenario(
            SourceParams(**sc["source_1"]),
            SourceParams(**sc["source_2"]),
            MprChannel(**sc["channel"]),
            Budget(**sc["budget"]),
            sc["objective"],
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid scenario: {exc}") from exc


def spec_from_config(kind, cfg: dict, output_path=None, seed=None) -> ExperimentSpec:
    kind = ExperimentKind(kind)
    sim = dict(cfg["sim"])
    if seed is not None:
        sim["seed"] = seed
    grid = {
        ExperimentKind.RTE_CURVES: cfg["rte_curves"]["q_grid"],
        ExperimentKind.GAMMA_SWEEP: cfg["gamma_sweep"]["grid"],
        ExperimentKind.WEIGHT_SWEEP: cfg["weight_sweep"]["grid"],
    }.get(kind, [])
    opt = cfg["optimizer"]
    return ExperimentSpec(
        kind=kind,
        scenario=scenario_from_config(cfg),
        sweep_grid=[float(v) for v in grid],
        solvers=list(cfg["validate"]["policies"]),
        sim=sim,
        output_path=None if output_path is None else Path(output_path),
        resolution=int(opt["resolution"]),
        refine_rounds=int(opt["refine_rounds"]),
        tdma_resolution=int(opt["tdma_resolution"]),
        curve_pairs=[tuple(map(float, p)) for p in cfg["rte_curves"]["pairs"]],
    )


# ---------------------------------------------------------------------------
# CSV


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        if not math.isfinite(v):
            raise ValueError(f"non-finite value {v!r} in output")
        out = f"{float(v):.{SIG_DIGITS}g}"
        return "0" if out == "-0" else out
    return str(v)


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


def write_csv(header, rows, path) -> None:
    Path(path).write_text(to_csv(header, rows), encoding="utf-8")


# ---------------------------------------------------------------------------
# runners

SWEEP_HEADER = ["E_optimized", "E_random", "E_greedy1", "E_greedy2", "E_tdma"]


def _policy_row(spec, s: Scenario):
    return [
        solve(s, spec.resolution, spec.refine_rounds).objective_value,
        baseline_random(s).objective_value,
        baseline_greedy(s, 1).objective_value,
        baseline_greedy(s, 2).objective_value,
        baseline_tdma(s, spec.tdma_resolution, spec.refine_rounds).objective_value,
    ]


def run_rte_curves(spec: ExperimentSpec):
    """Closed-form RTE against q for each (alpha, beta) pair.

    Each curve starts with a ``q = 0`` row flagged ``is_limit = 1`` that holds
    the ``q -> 0+`` limit value.
    """
    rows = []
    for a, b in spec.curve_pairs:
        src = SourceParams(a, b)
        rows.append([a, b, 0.0, rte_closed_form_limit(src), 1])
        for q in spec.sweep_grid:
            rows.append([a, b, q, rte_closed_form(src, q), 0])
    return ["alpha", "beta", "q", "rte", "is_limit"], rows


def run_gamma_sweep(spec: ExperimentSpec):
    rows = [[g] + _policy_row(spec, spec.scenario.with_budget(g)) for g in spec.sweep_grid]
    return ["gamma"] + SWEEP_HEADER, rows


def run_weight_sweep(spec: ExperimentSpec):
    rows = [[w2] + _policy_row(spec, spec.scenario.with_weights(1.0 - w2, w2)) for w2 in spec.sweep_grid]
    return ["w2"] + SWEEP_HEADER, rows


def run_solve(spec: ExperimentSpec):
    """All nine corner candidates; ``best`` marks the enumeration winner."""
    s = spec.scenario
    cands = vertex_candidates(s)
    best = solve_vertex_enum(s)
    rows = []
    for idx, c in enumerate(cands):
        rows.append(
            [idx, idx // 3, idx % 3, c.policy_1.silent, c.policy_1.sample_1, c.policy_1.sample_2,
             c.policy_2.silent, c.policy_2.sample_1, c.policy_2.sample_2,
             c.update_probs.q_1, c.update_probs.q_2, c.per_source[0], c.per_source[1],
             c.objective_value, int(c.policy_1 == best.policy_1 and c.policy_2 == best.policy_2)]
        )
    header = ["candidate", "v1", "v2", "a1_silent", "a1_sample1", "a1_sample2",
              "a2_silent", "a2_sample1", "a2_sample2", "q1", "q2", "E1", "E2", "objective", "best"]
    return header, rows, best


VALIDATE_POLICIES = ("optimized", "random", "greedy1", "greedy2", "tdma", "silent")


def policy_by_name(spec: ExperimentSpec, name: str):
    s = spec.scenario
    if name == "optimized":
        return solve(s, spec.resolution, spec.refine_rounds)
    if name == "random":
        return baseline_random(s)
    if name in ("greedy1", "greedy2"):
        return baseline_greedy(s, int(name[-1]))
    if name == "tdma":
        return baseline_tdma(s, spec.tdma_resolution, spec.refine_rounds)
    if name == "silent":
        return None
    raise ConfigError(f"unknown policy {name!r}; expected one of {VALIDATE_POLICIES}")


@dataclass
class ValidationReport:
    header: list
    rows: list
    rejected: list
    max_abs_z: float

    @property
    def passed(self) -> bool:
        return self.max_abs_z <= Z_FAIL


def run_validate(spec: ExperimentSpec) -> ValidationReport:
    """Closed forms against simulation, one z-score per (policy, source, metric).

    RTE and CAE rows are produced only for sources with ``q > 0``; a policy
    with no updating source at all (e.g. ``silent``) is rejected outright.
    """
    s = spec.scenario
    sim = spec.sim
    seeds = np.random.SeedSequence(int(sim["seed"])).generate_state(max(1, len(spec.solvers)), dtype=np.uint64)
    rows, rejected = [], []
    max_z = 0.0
    for name, seed in zip(spec.solvers, seeds):
        sol = policy_by_name(spec, name)
        if sol is None or max(sol.update_probs) == 0.0:
            rejected.append(name)
            continue
        policy = sol.schedule if sol.schedule is not None else (sol.policy_1, sol.policy_2)
        res = simulate(SimConfig(s, policy, int(sim["horizon"]), int(seed), int(sim["warmup"])))
        m = res.slots_measured
        for i, src in enumerate(s.sources, start=1):
            emp = res.source(i)
            q = sol.update_probs.q_1 if i == 1 else sol.update_probs.q_2
            checks = [("q", q, emp["empirical_q"], math.sqrt(q * (1.0 - q) / m))]
            if q > 0.0:
                e = sol.per_source[i - 1]
                checks.append(("rte", e, emp["empirical_rte"], emp["std_err_rte"]))
                checks.append(("cae", src.cost_sum * e / 2.0, emp["empirical_cae"], emp["std_err_cae"]))
            for metric, closed, empirical, se in checks:
                diff = empirical - closed
                z = diff / se if se > 0 else (0.0 if diff == 0 else math.copysign(math.inf, diff))
                max_z = max(max_z, abs(z))
                rows.append([name, i, metric, closed, empirical, se, z])
    header = ["policy", "source", "metric", "closed_form", "empirical", "std_err", "z"]
    return ValidationReport(header, rows, rejected, max_z)
