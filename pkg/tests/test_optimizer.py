from dataclasses import replace

import numpy as np
import pytest

from mprsampling import (
    Budget,
    Certificate,
    MprChannel,
    SamplingPolicy,
    Scenario,
    SourceParams,
    baseline_greedy,
    baseline_random,
    baseline_tdma,
    rte_closed_form_limit,
    solve,
    solve_grid,
    solve_vertex_enum,
    vertex_set,
)
from mprsampling.errors import InvalidParameterError
from mprsampling.optimizer import ObjectiveKind, recompute_objective, triangle_grid, vertex_candidates


def random_scenario(rng, nonpositive_lambda=None, kind=ObjectiveKind.RTE):
    def src():
        while True:
            a, b = rng.uniform(0.02, 0.98, 2)
            lam = 1 - a - b
            if nonpositive_lambda is None or (lam <= 0) == nonpositive_lambda:
                return SourceParams(a, b, rng.uniform(0, 1), rng.uniform(0, 3), rng.uniform(0, 3))

    ps = rng.uniform(0.1, 1.0, 2)
    ch = MprChannel(ps[0], ps[1], ps[0] * rng.random(), ps[1] * rng.random())
    return Scenario(src(), src(), ch, Budget(*rng.uniform(0.05, 1.0, 2)), kind)


class TestVertexSet:
    def test_full_budget(self):
        assert vertex_set(1.0) == [SamplingPolicy(1, 0, 0), SamplingPolicy(0, 1, 0), SamplingPolicy(0, 0, 1)]

    @pytest.mark.parametrize("g", [0.9, 0.5])
    def test_partial(self, g):
        got = [(p.silent, p.sample_1, p.sample_2) for p in vertex_set(g)]
        np.testing.assert_allclose(got, [(1, 0, 0), (1 - g, g, 0), (1 - g, 0, g)], atol=1e-15)

    @pytest.mark.parametrize("g", [0.0, 1.1])
    def test_domain(self, g):
        with pytest.raises(InvalidParameterError):
            vertex_set(g)


class TestVertexEnum:
    def test_nine_candidates_and_minimum(self):
        s = Scenario(SourceParams(0.7, 0.6, 0.5), SourceParams(0.5, 0.9, 0.5), MprChannel(0.95, 0.3, 0.2, 0.1), Budget(1, 1))
        cands = vertex_candidates(s)
        assert len(cands) == 9
        best = solve_vertex_enum(s)
        assert best.optimality_certificate is Certificate.GLOBAL_BY_THEOREM
        assert (best.policy_1, best.policy_2) in [(c.policy_1, c.policy_2) for c in cands]
        assert best.objective_value == min(c.objective_value for c in cands)

    def test_certificate_outside_regime(self, scenario_a):
        assert solve_vertex_enum(scenario_a).optimality_certificate is Certificate.BEST_FOUND

    def test_ties_resolve_to_first_candidate(self):
        # zero weights: every candidate ties
        s = Scenario(SourceParams(0.7, 0.6, 0.0), SourceParams(0.5, 0.9, 0.0), MprChannel(0.9, 0.8, 0.5, 0.5), Budget(1, 1))
        best = solve_vertex_enum(s)
        assert best.policy_1 == SamplingPolicy(1, 0, 0) and best.policy_2 == SamplingPolicy(1, 0, 0)

    def test_beats_mpr_baselines(self, scenario_a):
        v = solve_vertex_enum(scenario_a).objective_value
        assert v <= baseline_random(scenario_a).objective_value
        assert v <= baseline_greedy(scenario_a, 1).objective_value
        assert v <= baseline_greedy(scenario_a, 2).objective_value

    def test_vanishing_budget(self, scenario_a):
        s = scenario_a.with_budget(1e-6)
        limit = 0.5 * rte_closed_form_limit(s.source_1) + 0.5 * rte_closed_form_limit(s.source_2)
        assert solve_vertex_enum(s).objective_value == pytest.approx(limit, abs=1e-5)


class TestGrid:
    def test_triangle_grid_contains_vertices(self):
        g = triangle_grid(0.37, 11)
        for v in vertex_set(0.37):
            assert np.any(np.all(np.isclose(g, v.as_array(), atol=0, rtol=0), axis=1))
        assert len(g) == 66
        assert np.all(g[:, 1] + g[:, 2] <= 0.37 + 1e-15)

    def test_resolution_two_is_vertex_grid(self, scenario_a):
        assert len(triangle_grid(0.5, 2)) == 3
        assert solve_grid(scenario_a, 2, 0).objective_value <= solve_vertex_enum(scenario_a).objective_value + 1e-12

    def test_rejects_resolution_one(self, scenario_a):
        with pytest.raises(InvalidParameterError):
            solve_grid(scenario_a, 1)

    def test_matches_vertices_when_lambda_nonpositive(self):
        rng = np.random.default_rng(5)
        for _ in range(30):
            s = random_scenario(rng, nonpositive_lambda=True)
            g = solve_grid(s, 21, 0).objective_value
            v = solve_vertex_enum(s).objective_value
            assert v <= g + 1e-9
            assert g <= v + 1e-12

    def test_interior_policy_beats_vertices(self):
        # slow sources and a nearly useless sensor 2: splitting sensor 1 wins
        s = Scenario(SourceParams(0.05, 0.05, 0.5), SourceParams(0.05, 0.05, 0.5), MprChannel(0.9, 0.1, 0.05, 0.05), Budget(1, 1))
        g = solve_grid(s, 201, 0)
        v = solve_vertex_enum(s)
        assert g.policy_1.sample_1 == pytest.approx(0.5) and g.policy_1.sample_2 == pytest.approx(0.5)
        assert v.objective_value - g.objective_value == pytest.approx(0.1982918072, abs=1e-9)

    def test_refinement_never_hurts(self, scenario_b):
        s = scenario_b.with_weights(0.3, 0.7)
        coarse = solve_grid(s, 21, 0).objective_value
        fine = solve_grid(s, 21, 3).objective_value
        assert fine <= coarse

    def test_deterministic(self, scenario_b, backend):
        a = solve_grid(scenario_b.with_weights(0.3, 0.7), 41, 2)
        b = solve_grid(scenario_b.with_weights(0.3, 0.7), 41, 2)
        assert a == b


class TestBaselines:
    def test_random(self, scenario_a):
        sol = baseline_random(scenario_a.with_budget(0.9))
        assert sol.policy_1 == SamplingPolicy(0.09999999999999998, 0.45, 0.45)
        assert sol.policy_1.sample_1 == sol.policy_1.sample_2 == 0.45

    def test_greedy_source_1(self, scenario_a):
        sol = baseline_greedy(scenario_a.with_budget(1.0), 1)
        assert sol.update_probs.q_1 == pytest.approx(0.82, abs=1e-12)
        assert sol.update_probs.q_2 == 0.0
        assert sol.per_source[1] == pytest.approx(rte_closed_form_limit(scenario_a.source_2), abs=1e-15)

    def test_greedy_unserved_weight(self, scenario_a):
        s = scenario_a.with_weights(0.5, 0.0)
        assert baseline_greedy(s, 2).objective_value == pytest.approx(0.5 * rte_closed_form_limit(s.source_1), abs=1e-15)

    def test_greedy_worst_case_limit(self, scenario_a):
        s = scenario_a.with_weights(1e-9, 1.0 - 1e-9)
        assert baseline_greedy(s, 1).objective_value == pytest.approx(rte_closed_form_limit(s.source_2), abs=1e-8)

    def test_greedy_target_domain(self, scenario_a):
        with pytest.raises(InvalidParameterError):
            baseline_greedy(scenario_a, 3)

    def test_tdma_splits_airtime(self, scenario_a):
        sol = baseline_tdma(scenario_a)
        assert sol.schedule is not None
        assert sol.update_probs.q_1 > 0 and sol.update_probs.q_2 > 0
        assert sol.schedule.total <= 1.0 + 1e-12

    def test_tdma_single_source_prefers_better_sensor(self, scenario_a):
        s = scenario_a.with_budget(0.7).with_weights(1.0, 0.0)
        sched = baseline_tdma(s).schedule
        assert sched.tau_11 == pytest.approx(0.7, abs=1e-9)
        # 0.3 is off the sensor-2 lattice (step 0.007); refinement closes most of the gap
        assert sched.tau_21 == pytest.approx(0.3, abs=1e-3)
        assert sched.tau_12 == 0.0 and sched.tau_22 == 0.0

    def test_tdma_vanishing_budget(self, scenario_a):
        s = scenario_a.with_budget(1e-7)
        limit = 0.5 * rte_closed_form_limit(s.source_1) + 0.5 * rte_closed_form_limit(s.source_2)
        assert baseline_tdma(s, 11, 0).objective_value == pytest.approx(limit, abs=1e-6)


class TestInvariants:
    def test_reported_objective_recomputes(self):
        rng = np.random.default_rng(6)
        for _ in range(10):
            s = random_scenario(rng)
            sols = [solve_vertex_enum(s), solve_grid(s, 21, 1), baseline_random(s), baseline_greedy(s, 1),
                    baseline_greedy(s, 2), baseline_tdma(s, 21, 1)]
            for sol in sols:
                assert abs(recompute_objective(s, sol) - sol.objective_value) <= 1e-12
                assert sol.policy_1.rate <= s.budget.gamma_1 + 1e-12
                assert sol.policy_2.rate <= s.budget.gamma_2 + 1e-12

    def test_optimized_dominates_mpr_baselines(self):
        rng = np.random.default_rng(7)
        for _ in range(15):
            s = random_scenario(rng)
            opt = solve(s, 21, 1).objective_value
            for base in (baseline_random(s), baseline_greedy(s, 1), baseline_greedy(s, 2)):
                assert opt <= base.objective_value + 1e-12

    @pytest.mark.parametrize("solver", [solve_vertex_enum, lambda s: solve_grid(s, 41, 2), lambda s: baseline_tdma(s, 41, 2)])
    def test_nonincreasing_in_budget(self, scenario_a, solver):
        vals = [solver(scenario_a.with_budget(g)).objective_value for g in np.linspace(0.05, 1.0, 12)]
        assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))

    def test_cae_equals_rte_with_transformed_weights(self):
        rng = np.random.default_rng(8)
        for _ in range(50):
            s_cae = random_scenario(rng, kind=ObjectiveKind.CAE)
            w = s_cae.weights
            s_rte = replace(s_cae, objective_kind=ObjectiveKind.RTE).with_weights(*w)
            a, b = solve_vertex_enum(s_cae), solve_vertex_enum(s_rte)
            assert (a.policy_1, a.policy_2) == (b.policy_1, b.policy_2)
