import numpy as np
import pytest

from scvn.errors import NoFeasibleSolution, OracleTooLarge
from scvn.instance import Instance
from scvn.knowledge import KbLibrary, PreferenceProfile, VueProfile
from scvn.scenario import NeighborGraph
from scvn.solver.oracle import exhaustive_oracle, perfect_matchings, tiny_instance


def _pair(n_kbs=1, capacity=1.0, lam=50.0, mu=100.0, ranks=None):
    ranks = [np.arange(1, n_kbs + 1)] * 2 if ranks is None else ranks
    profs = [VueProfile(k, capacity, lam, np.full(n_kbs, mu), PreferenceProfile(np.asarray(ranks[k]), 1.0))
             for k in range(2)]
    return Instance(KbLibrary(np.ones(n_kbs)), profs, NeighborGraph.from_edges(2, [(0, 1)]))


def test_single_kb_pair():
    inst = _pair()
    rep = exhaustive_oracle(inst, 0.0, 0.0, tau=[1.0, 1.0])
    # empty constructions cost nothing; the mismatch cap forbids one-sided ones
    assert rep.p0.value == 0.0
    assert rep.p0.alpha.sum() == 0
    assert rep.inner.value == 0.0


def test_single_kb_pair_forced():
    rep = exhaustive_oracle(_pair(), 1.0, 0.0)
    # eta0 = 1 forces both to build the KB: two M/M/1 queues at 0.01 s each
    assert rep.p0.value == pytest.approx(0.02, rel=1e-12)
    assert rep.p0.alpha.tolist() == [[1], [1]]


def test_mismatch_cap_everywhere_infeasible():
    # each vehicle must hold its own favourite KB, which the other cannot
    # also store, so every direction mismatches
    inst = _pair(n_kbs=2, ranks=[[1, 2], [2, 1]])
    rep = exhaustive_oracle(inst, 0.6, 0.1, tau=[0.5, 0.5])
    assert rep.p0 is None and rep.inner is not None
    with pytest.raises(NoFeasibleSolution):
        exhaustive_oracle(inst, 0.6, 0.1)


def test_too_large():
    with pytest.raises(OracleTooLarge):
        exhaustive_oracle(tiny_instance(0, n_vues=6), 0.5, 0.1)
    with pytest.raises(OracleTooLarge):
        exhaustive_oracle(tiny_instance(0, n_kbs=5), 0.5, 0.1)


def test_perfect_matchings_of_k4():
    adj = ~np.eye(4, dtype=bool)
    assert len(perfect_matchings(list(range(4)), adj)) == 3
    path = NeighborGraph.from_edges(4, [(0, 1), (1, 2), (2, 3)]).adjacency
    assert perfect_matchings(list(range(4)), path) == [[(0, 1), (2, 3)]]


def test_inner_below_p0_for_any_tau():
    for seed in range(10):
        inst = tiny_instance(seed)
        try:
            rep = exhaustive_oracle(inst, 0.5, 0.1, tau=np.full(4, 0.5))
        except NoFeasibleSolution:
            continue
        if rep.p0 is not None:
            assert rep.inner.value - 0.5 * 0.1 * 4 <= rep.p0.value + 1e-12


def test_tiny_instance_has_perfect_pairing():
    for seed in range(20):
        inst = tiny_instance(seed)
        assert perfect_matchings(list(range(4)), inst.graph.adjacency)
    with pytest.raises(ValueError):
        tiny_instance(0, n_vues=3)
