import dataclasses

import numpy as np

from scvn.config import RunConfig
from scvn.instance import generate_instance


def _cfg(**kw):
    cfg = RunConfig()
    return dataclasses.replace(cfg, knowledge=dataclasses.replace(cfg.knowledge, **kw))


def test_default_instance_shape():
    inst = generate_instance(RunConfig(), 1)
    assert inst.n_vues == 60 and inst.n_kbs == 12
    assert inst.popularity.shape == (60, 12)
    assert np.allclose(inst.popularity.sum(axis=1), 1.0)
    assert np.all((inst.interp >= 100.0) & (inst.interp <= 200.0))
    assert np.all(inst.capacity == 24.0)


def test_seeded_and_reproducible():
    a = generate_instance(RunConfig(), 5)
    b = generate_instance(RunConfig(), 5)
    assert np.array_equal(a.graph.adjacency, b.graph.adjacency)
    assert np.array_equal(a.popularity, b.popularity)
    c = generate_instance(RunConfig(), 6)
    assert not np.array_equal(a.positions, c.positions)


def test_kb_count_does_not_move_vehicles():
    a = generate_instance(_cfg(n_kbs=8), 2)
    b = generate_instance(_cfg(n_kbs=16), 2)
    assert np.array_equal(a.positions, b.positions)
    assert np.array_equal(a.graph.adjacency, b.graph.adjacency)


def test_shared_interpretation_rates():
    inst = generate_instance(RunConfig(), 3)
    assert np.all(inst.interp == inst.interp[0])
    own = generate_instance(_cfg(shared_interp=False), 3)
    assert not np.all(own.interp == own.interp[0])


def test_default_graph_is_dense_enough():
    degs = [generate_instance(RunConfig(), s).graph.degree().mean() for s in range(5)]
    assert 10 <= np.mean(degs) <= 35


def test_subset_renumbers():
    inst = generate_instance(RunConfig(), 1)
    sub = inst.subset([5, 2, 9])
    assert sub.n_vues == 3
    assert [p.vue_id for p in sub.profiles] == [0, 1, 2]
    assert np.array_equal(sub.popularity[1], inst.popularity[2])
    assert sub.graph.adjacency[0, 1] == inst.graph.adjacency[5, 2]
