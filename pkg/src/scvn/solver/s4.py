"""Dual decomposition loop: pair subproblems -> cost matrix -> pairing -> multiplier step."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from ..config import SolverConfig
from ..knowledge import preference_order
from .matching import OmegaMatrix, VspMatching, greedy_matching, round_matching, solve_p2_lp
from .p1 import PairSolver, decode
from .problem import (
    SolutionReport,
    achieved_mismatch,
    dual_update,
    dual_value,
    evaluate_solution,
    stepsize,
)

log = logging.getLogger(__name__)


class _P1Cache:
    """Reuses a pair's solution while both its multipliers are unchanged."""

    def __init__(self, solver: PairSolver, edges: list[tuple[int, int]]):
        self.solver = solver
        self.edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        self.tau_seen = np.full(self.edges.shape, np.nan)
        self.codes = np.full(len(edges), -1, dtype=np.int64)
        self.vals = np.full(len(edges), np.inf)
        self.solves = 0

    def solve(self, tau: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        if self.edges.shape[0] == 0:
            return self.codes, self.vals
        now = tau[self.edges]
        stale = np.flatnonzero(np.any(now != self.tau_seen, axis=1))
        if stale.size:
            codes, vals = self.solver.solve(self.edges[stale], tau)
            self.codes[stale] = codes
            self.vals[stale] = vals
            self.tau_seen[stale] = now[stale]
            self.solves += stale.size
        return self.codes, self.vals


def build_omega_matrix(instance, tau, solver: PairSolver, cache: _P1Cache | None = None) -> OmegaMatrix:
    """Solve the pair subproblem on every link (i < j) and assemble the cost matrix."""
    edges = instance.graph.edges()
    if cache is None:
        cache = _P1Cache(solver, edges)
    codes, vals = cache.solve(np.asarray(tau, dtype=float))
    n = instance.n_vues
    omega = np.full((n, n), np.inf)
    policies = {}
    for (i, j), code, val in zip(edges, codes, vals):
        if code >= 0:
            omega[i, j] = omega[j, i] = val
            policies[(i, j)] = decode(int(code), instance.n_kbs)
    return OmegaMatrix(omega, policies, n_subproblems=len(edges))


def _fallback_policy(instance, i: int, omega: OmegaMatrix, eta0: float) -> np.ndarray:
    # unmatched vehicle: reuse its cheapest pair's sub-policy, else its own top preferences
    row = omega.omega[i]
    if np.isfinite(row).any():
        return omega.sub_policy(i, int(np.argmin(row)))
    alpha = np.zeros(instance.n_kbs, dtype=np.int8)
    p, sizes = instance.popularity[i], instance.library.sizes
    used = eta = 0.0
    for n in preference_order(p):
        if eta >= eta0:
            break
        if used + sizes[n] <= instance.capacity[i]:
            alpha[n] = 1
            used += sizes[n]
            eta += p[n]
    return alpha


def recover_alpha(instance, matching: VspMatching, omega: OmegaMatrix, eta0: float) -> np.ndarray:
    """Each matched vehicle takes the sub-policy stored for its pair."""
    alpha = np.zeros((instance.n_vues, instance.n_kbs), dtype=np.int8)
    for i, j in enumerate(matching.partner):
        alpha[i] = omega.sub_policy(i, int(j)) if j >= 0 else _fallback_policy(instance, i, omega, eta0)
    return alpha


def solve_pairing(omega: OmegaMatrix, backend: str = "lp") -> VspMatching:
    if backend == "lp":
        return round_matching(solve_p2_lp(omega), omega)
    if backend == "greedy":
        return greedy_matching(omega)
    raise ValueError(f"unknown pairing backend {backend!r}")


def inner_value(omega: OmegaMatrix, matching: VspMatching) -> float:
    """Lagrangian part (without the multiplier offset) of a pairing over the cost matrix."""
    return float(sum(omega.omega[i, j] for i, j in matching.pairs()))


@dataclass
class IterationRecord:
    t: int
    dual: float
    inner: float
    primal: float
    feasible: bool
    incumbent: float
    max_theta_slack: float  # max_i (achieved theta_i - theta0); <= 0 when (9e) holds
    tau_mean: float
    stepsize: float


@dataclass
class SolverResult:
    alpha: np.ndarray
    matching: VspMatching
    objective: float
    report: SolutionReport
    feasible: bool
    tau: np.ndarray
    history: list[IterationRecord] = field(default_factory=list)
    n_subproblems: int = 0
    p1_solves: int = 0
    runtime_s: float = 0.0
    incumbent_iteration: int | None = None

    @property
    def dual_values(self) -> list[float]:
        return [h.dual for h in self.history]

    @property
    def best_dual(self) -> float:
        return max(self.dual_values) if self.history else -math.inf


def run_s4(instance, config: SolverConfig, eta0: float, theta0: float) -> SolverResult:
    """Run the dual loop for ``config.M`` iterations.

    In ``best_feasible`` recovery the returned (alpha, beta) is the best
    iterate that satisfies every constraint on its matched vehicles (vehicles
    stranded by the rounding are flagged in the report); if none does, the last iterate
    is returned with ``feasible=False``. ``last`` recovery always returns
    the last iterate.
    """
    config.validate()
    start = time.perf_counter()
    solver = PairSolver(instance, eta0, config.sigma, config.Z, config.tabu_capacity, config.p1_mode)
    edges = instance.graph.edges()
    cache = _P1Cache(solver, edges)
    tau = np.full(instance.n_vues, float(config.tau0))
    history: list[IterationRecord] = []
    best = None  # ((n_unmatched, objective), alpha, matching, report, t)
    last = None

    for t in range(config.M):
        omega = build_omega_matrix(instance, tau, solver, cache)
        matching = solve_pairing(omega, config.p2_backend)
        alpha = recover_alpha(instance, matching, omega, eta0)
        report = evaluate_solution(instance, alpha, matching, eta0, theta0)
        inner = inner_value(omega, matching)
        dual = dual_value(inner, tau, theta0)
        achieved = achieved_mismatch(report.evals, instance.n_vues)
        # fewer stranded vehicles first, then lower total delay
        key = (len(report.constraints.unmatched), report.objective)
        if report.admissible and (best is None or key < best[0]):
            best = (key, alpha, matching, report, t)
        last = (key, alpha, matching, report, t)
        nu = stepsize(t, config.nu0)
        history.append(
            IterationRecord(
                t, dual, inner, report.objective, report.admissible,
                best[0][1] if best else math.inf, float(np.max(achieved - theta0)), float(tau.mean()), nu,
            )
        )
        log.debug("t=%d dual=%.6g primal=%.6g feasible=%s", t, dual, report.objective, report.feasible)
        tau = dual_update(tau, achieved, theta0, nu)

    chosen = best if (config.recovery_mode == "best_feasible" and best is not None) else last
    (_, objective), alpha, matching, report, t_pick = chosen
    return SolverResult(
        alpha=alpha,
        matching=matching,
        objective=objective,
        report=report,
        feasible=report.admissible,
        tau=tau,
        history=history,
        n_subproblems=len(edges),
        p1_solves=cache.solves,
        runtime_s=time.perf_counter() - start,
        incumbent_iteration=t_pick if report.admissible else None,
    )

