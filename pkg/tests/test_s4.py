import dataclasses

import numpy as np
import pytest

from scvn.config import RunConfig, SolverConfig
from scvn.errors import InfeasiblePairing, NoFeasibleSolution
from scvn.experiments import make_even
from scvn.instance import generate_instance
from scvn.scenario import NeighborGraph
from scvn.solver.oracle import exhaustive_oracle, tiny_instance
from scvn.solver.p1 import PairSolver
from scvn.solver.problem import evaluate_solution
from scvn.solver.s4 import build_omega_matrix, run_s4

EXACT = SolverConfig(p1_mode="exhaustive", M=15)


@pytest.fixture(scope="module")
def medium():
    cfg = RunConfig()
    cfg = dataclasses.replace(cfg, scenario=dataclasses.replace(cfg.scenario, n_vues=16))
    inst, _ = make_even(generate_instance(cfg, 3))
    return inst, run_s4(inst, dataclasses.replace(cfg.solver, M=8), 0.5, 0.1)


def test_two_vehicles_forced_pairing():
    inst = tiny_instance(2, n_vues=2)
    res = run_s4(inst, dataclasses.replace(EXACT, M=1), 0.5, 0.1)
    assert res.matching.pairs() == [(0, 1)]
    sol = PairSolver(inst, 0.5, mode="exhaustive").solve_pair(0, 1, 0.1, 0.1)
    assert np.array_equal(res.alpha[0], sol.alpha_i) and np.array_equal(res.alpha[1], sol.alpha_j)


def test_objective_recomputes(medium):
    inst, res = medium
    rep = evaluate_solution(inst, res.alpha, res.matching, 0.5, 0.1)
    assert rep.objective == pytest.approx(res.objective, rel=1e-9, abs=1e-12)


def test_matching_valid_and_multipliers_nonnegative(medium):
    inst, res = medium
    assert res.matching.is_valid(inst.graph.adjacency)
    assert np.all(res.tau >= 0)
    assert len(res.history) == 8


def test_subproblem_count(medium):
    inst, res = medium
    assert res.n_subproblems == inst.graph.degree().sum() // 2


def test_feasible_incumbent_respects_mismatch_cap(medium):
    inst, res = medium
    if res.feasible:
        assert all(e.theta <= 0.1 + 1e-12 for e in res.report.evals.values())


def test_cache_skips_unchanged_pairs():
    inst = tiny_instance(8)
    solver = PairSolver(inst, 0.5)
    from scvn.solver.s4 import _P1Cache

    cache = _P1Cache(solver, inst.graph.edges())
    tau = np.full(4, 0.1)
    build_omega_matrix(inst, tau, solver, cache)
    n0 = cache.solves
    build_omega_matrix(inst, tau, solver, cache)
    assert cache.solves == n0
    tau[0] = 0.2
    build_omega_matrix(inst, tau, solver, cache)
    assert cache.solves == n0 + int(inst.graph.degree()[0])


def test_tiny_instances_against_oracle():
    gaps, checked = [], 0
    for seed in range(40):
        inst = tiny_instance(seed)
        try:
            p0 = exhaustive_oracle(inst, 0.5, 0.1).p0
        except NoFeasibleSolution:
            continue
        if p0 is None:
            continue
        res = run_s4(inst, EXACT, 0.5, 0.1)
        checked += 1
        # weak duality on every iteration
        assert max(res.dual_values) <= p0.value + 1e-12
        inc = [h.incumbent for h in res.history]
        assert all(b <= a for a, b in zip(inc, inc[1:]))
        if res.feasible:
            assert res.objective >= p0.value - 1e-12
            gaps.append(res.objective / p0.value - 1 if p0.value > 0 else res.objective)
    assert checked >= 10
    assert np.mean(np.asarray(gaps) <= 0.05) >= 0.9


def test_last_iterate_mode():
    inst = tiny_instance(3)
    res = run_s4(inst, dataclasses.replace(EXACT, recovery_mode="last", M=4), 0.5, 0.1)
    assert res.objective == pytest.approx(res.history[-1].primal)


def test_odd_graph_propagates():
    inst = tiny_instance(1)
    tri = dataclasses.replace(inst.subset([0, 1, 2]))
    tri.graph = NeighborGraph.from_edges(3, [(0, 1), (1, 2), (0, 2)])
    with pytest.raises(InfeasiblePairing):
        run_s4(tri, EXACT, 0.5, 0.1)


def test_greedy_backend_runs():
    inst = tiny_instance(6)
    res = run_s4(inst, dataclasses.replace(EXACT, p2_backend="greedy", M=3), 0.5, 0.1)
    assert res.matching.is_valid(inst.graph.adjacency)
