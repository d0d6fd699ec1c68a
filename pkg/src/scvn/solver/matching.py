"""Pair-cost matrix and the pairing subproblem (LP relaxation + rounding)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InfeasiblePairing
from .simplex import LPInfeasible, linprog_eq


@dataclass
class OmegaMatrix:
    """Symmetric V x V pair costs, +inf off the usable links, plus each link's sub-policies."""

    omega: np.ndarray
    policies: dict[tuple[int, int], tuple[np.ndarray, np.ndarray]] = field(default_factory=dict)
    n_subproblems: int = 0

    @property
    def n_vues(self) -> int:
        return self.omega.shape[0]

    def finite_edges(self) -> list[tuple[int, int]]:
        ii, jj = np.nonzero(np.triu(np.isfinite(self.omega), k=1))
        return list(zip(ii.tolist(), jj.tolist()))

    def sub_policy(self, i: int, j: int) -> np.ndarray:
        """Vehicle i's KB construction as solved for the pair {i, j}."""
        if i < j:
            return self.policies[(i, j)][0]
        return self.policies[(j, i)][1]

    @classmethod
    def from_array(cls, omega) -> "OmegaMatrix":
        w = np.array(omega, dtype=float)
        np.fill_diagonal(w, np.inf)
        if not np.allclose(np.where(np.isfinite(w), w, 0), np.where(np.isfinite(w.T), w.T, 0)):
            raise ValueError("omega must be symmetric")
        return cls(w)


@dataclass(frozen=True)
class VspMatching:
    partner: np.ndarray  # partner[i] = j, or -1 when unmatched

    @property
    def n_vues(self) -> int:
        return self.partner.size

    def pairs(self) -> list[tuple[int, int]]:
        return [(i, int(j)) for i, j in enumerate(self.partner) if j > i]

    def unmatched(self) -> list[int]:
        return [i for i, j in enumerate(self.partner) if j < 0]

    @property
    def complete(self) -> bool:
        return bool(np.all(self.partner >= 0))

    def is_valid(self, adjacency=None) -> bool:
        """Involution without fixed points on matched vehicles, neighbors only."""
        p = self.partner
        for i, j in enumerate(p):
            if j < 0:
                continue
            if j == i or p[j] != i:
                return False
            if adjacency is not None and not adjacency[i, j]:
                return False
        return True

    @classmethod
    def from_pairs(cls, n: int, pairs) -> "VspMatching":
        partner = np.full(n, -1, dtype=int)
        for i, j in pairs:
            if partner[i] >= 0 or partner[j] >= 0 or i == j:
                raise ValueError(f"vehicle paired twice in {pairs}")
            partner[i], partner[j] = j, i
        return cls(partner)


def components(n: int, edges) -> list[list[int]]:
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, j in edges:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    groups: dict[int, list[int]] = {}
    for v in range(n):
        groups.setdefault(find(v), []).append(v)
    return list(groups.values())


def solve_p2_lp(omega: OmegaMatrix) -> dict[tuple[int, int], float]:
    """Fractional pairing minimizing total pair cost, one variable per usable link.

    Every vehicle's incident values must sum to one. Raises InfeasiblePairing
    when the finite-cost graph has an odd component or no fractional
    perfect pairing.
    """
    n = omega.n_vues
    edges = omega.finite_edges()
    odd = [c for c in components(n, edges) if len(c) % 2]
    if odd:
        raise InfeasiblePairing(f"odd component(s) {odd[:3]} cannot be perfectly paired")
    if not edges:
        return {}
    A = np.zeros((n, len(edges)))
    for k, (i, j) in enumerate(edges):
        A[i, k] = A[j, k] = 1.0
    cost = np.array([omega.omega[i, j] for i, j in edges])
    try:
        res = linprog_eq(cost, A, np.ones(n))
    except LPInfeasible as exc:
        raise InfeasiblePairing(str(exc)) from exc
    return {e: float(v) for e, v in zip(edges, res.x)}


def round_matching(beta_r: dict[tuple[int, int], float], omega: OmegaMatrix) -> VspMatching:
    """Fix the largest remaining fractional value, retire both vehicles, repeat.

    Ties go to the lexicographically smallest (i, j). Links with finite cost
    but zero LP value stay eligible, so vehicles are only stranded once every
    finite link to an unpaired neighbor is gone.
    """
    n = omega.n_vues
    values = dict(beta_r)
    for e in omega.finite_edges():
        values.setdefault(e, 0.0)
    order = sorted(values, key=lambda e: (-values[e], e))
    partner = np.full(n, -1, dtype=int)
    for i, j in order:
        if partner[i] < 0 and partner[j] < 0:
            partner[i], partner[j] = j, i
    return VspMatching(partner)


def greedy_matching(omega: OmegaMatrix) -> VspMatching:
    """Repeatedly pair the cheapest finite link among unpaired vehicles."""
    edges = omega.finite_edges()
    order = sorted(edges, key=lambda e: (omega.omega[e], e))
    partner = np.full(omega.n_vues, -1, dtype=int)
    for i, j in order:
        if partner[i] < 0 and partner[j] < 0:
            partner[i], partner[j] = j, i
    return VspMatching(partner)
