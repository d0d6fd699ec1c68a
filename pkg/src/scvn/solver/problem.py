"""Objective, constraint report, Lagrangian and multiplier update for the joint problem."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..knowledge import FEAS_TOL
from ..queueing import PairDirectionEval, evaluate_direction
from .matching import VspMatching
from .p1 import CAP_TOL


@dataclass
class ConstraintReport:
    storage: list[int] = field(default_factory=list)  # over capacity
    preference: list[int] = field(default_factory=list)  # eta below eta0
    unmatched: list[int] = field(default_factory=list)  # single-association violated
    asymmetric: list[int] = field(default_factory=list)
    not_neighbor: list[int] = field(default_factory=list)
    mismatch: list[int] = field(default_factory=list)  # theta above theta0
    unstable: list[int] = field(default_factory=list)  # sender whose queue diverges

    @property
    def feasible(self) -> bool:
        return self.n_violations == 0

    @property
    def admissible(self) -> bool:
        """Every constraint holds for the matched vehicles; stranded ones are only flagged."""
        return self.n_violations == len(self.unmatched)

    @property
    def n_violations(self) -> int:
        return sum(
            len(v)
            for v in (
                self.storage, self.preference, self.unmatched, self.asymmetric,
                self.not_neighbor, self.mismatch, self.unstable,
            )
        )


@dataclass
class SolutionReport:
    objective: float  # sum of delays over matched directed pairs
    evals: dict[int, PairDirectionEval]  # sender -> evaluation toward its partner
    eta: np.ndarray
    constraints: ConstraintReport

    @property
    def feasible(self) -> bool:
        return self.constraints.feasible

    @property
    def admissible(self) -> bool:
        return self.constraints.admissible


def direction_evals(instance, alpha: np.ndarray, matching: VspMatching) -> dict[int, PairDirectionEval]:
    out = {}
    for i, j in enumerate(matching.partner):
        if j >= 0:
            out[i] = evaluate_direction(alpha[i], alpha[j], instance.profiles[i], instance.profiles[j])
    return out


def evaluate_solution(instance, alpha, matching: VspMatching, eta0: float, theta0: float) -> SolutionReport:
    alpha = np.asarray(alpha, dtype=np.int8)
    rep = ConstraintReport()
    used = alpha @ instance.library.sizes
    eta = np.einsum("vn,vn->v", alpha.astype(float), instance.popularity)
    rep.storage = np.flatnonzero(used > instance.capacity + CAP_TOL).tolist()
    rep.preference = np.flatnonzero(eta < eta0 - FEAS_TOL).tolist()
    p = matching.partner
    adj = instance.graph.adjacency
    for i, j in enumerate(p):
        if j < 0:
            rep.unmatched.append(i)
        elif j == i or p[j] != i:
            rep.asymmetric.append(i)
        elif not adj[i, j]:
            rep.not_neighbor.append(i)
    evals = direction_evals(instance, alpha, matching)
    objective = 0.0
    for i, e in evals.items():
        if not e.stable:
            rep.unstable.append(i)
        if e.theta > theta0 + FEAS_TOL:
            rep.mismatch.append(i)
        objective += e.delay
    return SolutionReport(objective, evals, eta, rep)


def achieved_mismatch(evals: dict[int, PairDirectionEval], n: int) -> np.ndarray:
    """Per-vehicle sum of beta * theta (zero for an unmatched vehicle)."""
    out = np.zeros(n)
    for i, e in evals.items():
        out[i] = e.theta
    return out


def lagrangian(instance, alpha, matching: VspMatching, tau) -> float:
    """Sum over matched senders of delay + tau * theta (the multiplier offset excluded)."""
    total = 0.0
    for i, e in direction_evals(instance, np.asarray(alpha), matching).items():
        total += e.delay + tau[i] * e.theta
    return total


def dual_value(inner_min: float, tau, theta0: float) -> float:
    return inner_min - theta0 * float(np.sum(tau))


def dual_update(tau, achieved, theta0: float, nu: float) -> np.ndarray:
    """Projected subgradient step on the multipliers."""
    tau = np.asarray(tau, dtype=float)
    return np.maximum(0.0, tau - nu * (theta0 - np.asarray(achieved, dtype=float)))


def stepsize(t: int, nu0: float) -> float:
    return nu0 / math.sqrt(t + 1)
