"""Self-checks against independent references: queue simulation and brute force."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import SolverConfig
from .errors import InfeasiblePairing, NoFeasibleSolution
from .knowledge import PreferenceProfile, VueProfile
from .queueing import des_mg1_oracle, evaluate_direction
from .solver.oracle import exhaustive_oracle, tiny_instance
from .solver.p1 import PairSolver
from .solver.s4 import build_omega_matrix, inner_value, run_s4, solve_pairing

REL_EXACT = 1e-12


def random_stable_pair(rng, n_kbs: int = 12, skew: float = 1.0, arrival_rate: float = 100.0,
                       interp_time=(5e-3, 1e-2), max_util: float = 0.75):
    """Random KB constructions and profiles for one directed pair whose queue is stable.

    Draws are rejected until the pair shares a KB and its utilization is at
    most ``max_util``.
    """
    mu = 1.0 / rng.uniform(interp_time[0], interp_time[1], n_kbs)
    while True:
        sender = VueProfile(0, float(n_kbs), arrival_rate, mu, PreferenceProfile(rng.permutation(n_kbs) + 1, skew))
        receiver = VueProfile(1, float(n_kbs), arrival_rate, mu, PreferenceProfile(rng.permutation(n_kbs) + 1, skew))
        a = (rng.random(n_kbs) < 0.5).astype(np.int8)
        b = (rng.random(n_kbs) < 0.5).astype(np.int8)
        e = evaluate_direction(a, b, sender, receiver)
        if e.shared and e.stable and e.utilization <= max_util:
            return a, b, sender, receiver


@dataclass
class QueueCheck:
    analytic: list[float] = field(default_factory=list)
    simulated: list[float] = field(default_factory=list)
    utilization: list[float] = field(default_factory=list)

    @property
    def rel_errors(self) -> np.ndarray:
        a, s = np.asarray(self.analytic), np.asarray(self.simulated)
        return np.abs(s - a) / a

    @property
    def max_rel_error(self) -> float:
        return float(self.rel_errors.max()) if self.analytic else 0.0

    def passed(self, tol: float) -> bool:
        return self.max_rel_error <= tol


def validate_queue(n_configs: int, n_packets: int = 10**6, seed=0, service: str = "weighted_sum") -> QueueCheck:
    """Compare the closed-form mean wait with simulation on random stable pairs."""
    rng = np.random.default_rng(seed)
    out = QueueCheck()
    for _ in range(n_configs):
        a, b, snd, rcv = random_stable_pair(rng)
        e = evaluate_direction(a, b, snd, rcv)
        des = des_mg1_oracle(a, b, snd, rcv, n_packets, rng, service=service)
        out.analytic.append(e.delay)
        out.simulated.append(des.mean_wait)
        out.utilization.append(e.utilization)
    return out


@dataclass
class OracleCheck:
    instances: int = 0
    inner_cases: int = 0
    prop2_failures: int = 0  # two-stage inner value differs from brute force
    prop1_failures: int = 0  # brute-force pair value differs from the pair cost
    duality_violations: int = 0  # dual value above a feasible primal value
    s4_worse: int = 0  # S4 incumbent below the brute-force optimum (impossible)
    gaps: list[float] = field(default_factory=list)  # S4 relative gap on feasible instances
    dual_checks: int = 0

    @property
    def passed(self) -> bool:
        return (self.prop2_failures == 0 and self.prop1_failures == 0
                and self.duality_violations == 0 and self.s4_worse == 0)


def _close(x: float, y: float) -> bool:
    return abs(x - y) <= REL_EXACT * max(1.0, abs(x), abs(y))


def oracle_check(n_instances: int, seed=0, n_taus: int = 3, eta0: float = 0.5, theta0: float = 0.1,
                 n_kbs: int = 3, solver: SolverConfig | None = None) -> OracleCheck:
    """Two-stage decomposition and the dual loop against exhaustive search on tiny instances."""
    solver = solver or SolverConfig(p1_mode="exhaustive", M=20)
    root = np.random.SeedSequence(seed)
    out = OracleCheck()
    for child in root.spawn(n_instances):
        s_inst, s_tau = child.spawn(2)
        inst = tiny_instance(s_inst, n_vues=4, n_kbs=n_kbs)
        rng = np.random.default_rng(s_tau)
        pair_solver = PairSolver(inst, eta0, mode="exhaustive")
        out.instances += 1
        for _ in range(n_taus):
            tau = rng.uniform(0.0, 1.0, inst.n_vues)
            try:
                ref = exhaustive_oracle(inst, eta0, theta0, tau).inner
            except NoFeasibleSolution:
                ref = None
            omega = build_omega_matrix(inst, tau, pair_solver)
            try:
                got = inner_value(omega, solve_pairing(omega, solver.p2_backend))
            except InfeasiblePairing:
                got = None
            out.inner_cases += 1
            if (ref is None) != (got is None) or (ref is not None and not _close(got, ref.value)):
                out.prop2_failures += 1
            if ref is not None:
                for i, j in ref.matching.pairs():
                    e_ij = evaluate_direction(ref.alpha[i], ref.alpha[j], inst.profiles[i], inst.profiles[j])
                    e_ji = evaluate_direction(ref.alpha[j], ref.alpha[i], inst.profiles[j], inst.profiles[i])
                    val = e_ij.delay + tau[i] * e_ij.theta + e_ji.delay + tau[j] * e_ji.theta
                    if not _close(val, omega.omega[i, j]):
                        out.prop1_failures += 1
        try:
            p0 = exhaustive_oracle(inst, eta0, theta0).p0
        except NoFeasibleSolution:
            p0 = None
        if p0 is None:
            continue
        res = run_s4(inst, solver, eta0, theta0)
        out.dual_checks += len(res.history)
        out.duality_violations += sum(d > p0.value + REL_EXACT * max(1.0, p0.value) for d in res.dual_values)
        if res.feasible:
            if res.objective < p0.value - REL_EXACT * max(1.0, p0.value):
                out.s4_worse += 1
            out.gaps.append((res.objective - p0.value) / p0.value if p0.value > 0 else res.objective)
    return out


def summarize_gaps(gaps) -> dict[str, float]:
    g = np.asarray(gaps, dtype=float)
    if g.size == 0:
        return {"n": 0, "mean": math.nan, "max": math.nan, "within_5pct": math.nan}
    return {"n": int(g.size), "mean": float(g.mean()), "max": float(g.max()),
            "within_5pct": float(np.mean(g <= 0.05))}
