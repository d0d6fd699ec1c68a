"""Comparison schemes: distance-first and KB-matching-first pairing.

Both fix each vehicle's KBs with the preference-first rule and then pair
vehicles greedily over a globally sorted link list, ties broken by (i, j).
"""

from __future__ import annotations

import numpy as np

from .knowledge import KbLibrary, VueProfile, preference_first_kbc
from .queueing import mismatch_degree
from .scenario import NeighborGraph
from .solver.matching import VspMatching


def _greedy(n: int, order) -> VspMatching:
    partner = np.full(n, -1, dtype=int)
    for i, j in order:
        if partner[i] < 0 and partner[j] < 0:
            partner[i], partner[j] = j, i
    return VspMatching(partner)


def baseline_kbc(profiles: list[VueProfile], library: KbLibrary, eta0: float, seed=None) -> np.ndarray:
    """Preference-first construction for every vehicle, one child stream each."""
    streams = np.random.SeedSequence(seed).spawn(len(profiles))
    return np.array(
        [preference_first_kbc(p, library, eta0, s) for p, s in zip(profiles, streams)], dtype=np.int8
    ).reshape(len(profiles), library.n)


def dfp_matching(positions, graph: NeighborGraph) -> VspMatching:
    """Distance-first: pair the closest unpaired neighbors first."""
    pos = np.asarray(positions, dtype=float)
    edges = graph.edges()
    dist = {e: float(np.hypot(*(pos[e[0]] - pos[e[1]]))) for e in edges}
    return _greedy(graph.n_vues, sorted(edges, key=lambda e: (dist[e], e)))


def kfp_score(alpha, profiles: list[VueProfile], i: int, j: int) -> float:
    """KB matching degree of a link: (1 - theta_ij) + (1 - theta_ji)."""
    t_ij = mismatch_degree(alpha[i], alpha[j], profiles[i].kb_rates)
    t_ji = mismatch_degree(alpha[j], alpha[i], profiles[j].kb_rates)
    return (1.0 - t_ij) + (1.0 - t_ji)


def kfp_matching(graph: NeighborGraph, alpha, profiles: list[VueProfile]) -> VspMatching:
    """KB-matching-first: pair the best-matched unpaired neighbors first."""
    edges = graph.edges()
    score = {e: kfp_score(alpha, profiles, *e) for e in edges}
    return _greedy(graph.n_vues, sorted(edges, key=lambda e: (-score[e], e)))
