"""Brute-force reference for tiny instances, used to check the decomposition."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ..errors import NoFeasibleSolution, OracleTooLarge
from ..instance import Instance
from ..knowledge import FEAS_TOL, KbLibrary, PreferenceProfile, VueProfile
from ..queueing import evaluate_direction
from ..scenario import NeighborGraph
from .matching import VspMatching
from .p1 import CAP_TOL

MAX_VUES = 4
MAX_KBS = 4


@dataclass(frozen=True)
class OracleResult:
    value: float
    alpha: np.ndarray  # (V, N) minimizer
    matching: VspMatching


@dataclass(frozen=True)
class OracleReport:
    p0: OracleResult | None  # None when no (alpha, beta) meets every constraint
    inner: OracleResult | None  # None when tau was not given


def perfect_matchings(vertices: list[int], adjacency) -> list[list[tuple[int, int]]]:
    """All perfect matchings of the induced graph, each as sorted (i, j) pairs."""
    if not vertices:
        return [[]]
    first, rest = vertices[0], vertices[1:]
    out = []
    for k, j in enumerate(rest):
        if adjacency[first, j]:
            for tail in perfect_matchings(rest[:k] + rest[k + 1 :], adjacency):
                out.append([(first, j)] + tail)
    return out


def _candidate_alphas(instance: Instance, i: int, eta0: float) -> list[np.ndarray]:
    # storage and preference floor are per-vehicle, so filter them once
    n = instance.n_kbs
    sizes, p = instance.library.sizes, instance.popularity[i]
    out = []
    for bits in itertools.product((0, 1), repeat=n):
        a = np.array(bits, dtype=np.int8)
        if a @ sizes <= instance.capacity[i] + CAP_TOL and a @ p >= eta0 - FEAS_TOL:
            out.append(a)
    return out


def _pair_tables(instance, i, j, cands):
    """Delay and mismatch of both directions for every stable (alpha_i, alpha_j)."""
    rows = []
    for a in cands[i]:
        for b in cands[j]:
            e_ij = evaluate_direction(a, b, instance.profiles[i], instance.profiles[j])
            e_ji = evaluate_direction(b, a, instance.profiles[j], instance.profiles[i])
            if e_ij.stable and e_ji.stable:
                rows.append((a, b, e_ij.delay, e_ij.theta, e_ji.delay, e_ji.theta))
    return rows


def exhaustive_oracle(instance: Instance, eta0: float, theta0: float, tau=None) -> OracleReport:
    """Enumerate every KB construction and every perfect pairing.

    Returns the minimum total delay subject to all constraints and, when
    ``tau`` is given, the minimum of the relaxed objective (delay plus
    tau-weighted mismatch) with the mismatch cap dropped. The objective is a
    sum over pairs, so each pairing is scored by minimizing every pair
    independently over its (alpha_i, alpha_j) table, which covers every
    combination. Raises NoFeasibleSolution if neither problem has a
    feasible point.
    """
    v, n = instance.n_vues, instance.n_kbs
    if v > MAX_VUES or n > MAX_KBS:
        raise OracleTooLarge(f"oracle supports V <= {MAX_VUES}, N <= {MAX_KBS}; got V={v}, N={n}")
    cands = [_candidate_alphas(instance, i, eta0) for i in range(v)]
    adj = instance.graph.adjacency
    tables = {}
    for i, j in instance.graph.edges():
        tables[(i, j)] = _pair_tables(instance, i, j, cands)

    def best_pair(i, j, score, allowed):
        best = None
        for a, b, d_ij, t_ij, d_ji, t_ji in tables[(i, j)]:
            if not allowed(t_ij, t_ji):
                continue
            val = score(i, j, d_ij, t_ij, d_ji, t_ji)
            if best is None or val < best[0]:
                best = (val, a, b)
        return best

    def solve(score, allowed):
        best = None
        for pairs in perfect_matchings(list(range(v)), adj):
            total, alpha = 0.0, np.zeros((v, n), dtype=np.int8)
            for i, j in pairs:
                got = best_pair(i, j, score, allowed)
                if got is None:
                    break
                total += got[0]
                alpha[i], alpha[j] = got[1], got[2]
            else:
                if best is None or total < best.value:
                    best = OracleResult(total, alpha, VspMatching.from_pairs(v, pairs))
        return best

    p0 = solve(
        lambda i, j, d_ij, t_ij, d_ji, t_ji: d_ij + d_ji,
        lambda t_ij, t_ji: t_ij <= theta0 + FEAS_TOL and t_ji <= theta0 + FEAS_TOL,
    )
    inner = None
    if tau is not None:
        tau = np.asarray(tau, dtype=float)
        inner = solve(
            lambda i, j, d_ij, t_ij, d_ji, t_ji: (d_ij + tau[i] * t_ij) + (d_ji + tau[j] * t_ji),
            lambda t_ij, t_ji: True,
        )
    if p0 is None and inner is None:
        raise NoFeasibleSolution("no KB construction and pairing satisfies the constraints")
    return OracleReport(p0, inner)


def tiny_instance(
    seed,
    n_vues: int = 4,
    n_kbs: int = 3,
    skew: float = 1.0,
    arrival_rate: float = 60.0,
    interp_time: tuple[float, float] = (5e-3, 1e-2),
    capacity: tuple[float, float] = (5.0, 12.0),
    size_range: tuple[int, int] = (1, 5),
    edge_prob: float = 0.5,
) -> Instance:
    """Random small instance whose link graph always contains a perfect pairing.

    Capacities are drawn per vehicle so that storage binds on some of them.
    """
    if n_vues % 2:
        raise ValueError("n_vues must be even")
    rng = np.random.default_rng(seed)
    library = KbLibrary.random(n_kbs, size_range[0], size_range[1], rng)
    mu = 1.0 / rng.uniform(interp_time[0], interp_time[1], n_kbs)
    profiles = [
        VueProfile(
            i,
            float(rng.uniform(*capacity)),
            arrival_rate,
            mu.copy(),
            PreferenceProfile(rng.permutation(n_kbs) + 1, skew),
        )
        for i in range(n_vues)
    ]
    order = rng.permutation(n_vues)
    edges = {tuple(sorted((int(order[k]), int(order[k + 1])))) for k in range(0, n_vues, 2)}
    for i, j in itertools.combinations(range(n_vues), 2):
        if rng.random() < edge_prob:
            edges.add((i, j))
    graph = NeighborGraph.from_edges(n_vues, sorted(edges))
    return Instance(library, profiles, graph)
