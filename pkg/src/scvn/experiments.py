"""Seeded trials, parameter sweeps, metric aggregation and CSV output."""

from __future__ import annotations

import csv
import hashlib
import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .baselines import baseline_kbc, dfp_matching, kfp_matching
from .config import SWEEP_PARAMS, RunConfig, with_param
from .errors import ScvnError
from .instance import Instance, generate_instance
from .queueing import pair_tsp
from .solver.matching import VspMatching, components
from .solver.problem import SolutionReport, evaluate_solution
from .solver.s4 import IterationRecord, run_s4

log = logging.getLogger(__name__)

METHODS = ("s4", "dfp", "kfp")
CSV_HEADER = (
    "method,param,value,latency_s,latency_se,tsp_pps,tsp_se,"
    "eta_bar,eta_se,rho_bar,rho_se,unmatched,trials"
)
DIAG_HEADER = "t,dual,inner,primal,feasible,incumbent,max_theta_slack,tau_mean,stepsize"


@dataclass(frozen=True)
class TrialConfig:
    run: RunConfig
    seed: int
    method: str = "s4"

    def validate(self) -> "TrialConfig":
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        self.run.validate()
        return self


@dataclass
class TrialResult:
    method: str
    seed: int
    ok: bool
    error: str = ""
    latency: float = math.nan  # mean delay over matched, stable directions
    tsp: float = math.nan  # mean pair TSP over matched pairs
    eta_bar: float = math.nan
    rho_bar: float = math.nan
    unmatched: int = 0
    unstable: int = 0  # matched directions whose queue diverges
    violations: int = 0
    feasible: bool = False
    objective: float = math.nan
    n_vues: int = 0
    dropped: list[int] = field(default_factory=list)
    runtime_s: float = 0.0
    history: list[IterationRecord] = field(default_factory=list, repr=False)


@dataclass(frozen=True)
class MetricRow:
    method: str
    param: str
    value: float
    latency_s: float
    latency_se: float
    tsp_pps: float
    tsp_se: float
    eta_bar: float
    eta_se: float
    rho_bar: float
    rho_se: float
    unmatched: float
    trials: int

    def as_tuple(self) -> tuple:
        return (
            self.method, self.param, self.value, self.latency_s, self.latency_se, self.tsp_pps, self.tsp_se,
            self.eta_bar, self.eta_se, self.rho_bar, self.rho_se, self.unmatched, self.trials,
        )


def make_even(instance: Instance) -> tuple[Instance, list[int]]:
    """Drop the worst-connected vehicle of every odd component until none is left.

    Worst-connected means fewest neighbors, lowest index on ties. Returns the
    reduced instance and the dropped vehicles' original indices.
    """
    keep = list(range(instance.n_vues))
    adj = instance.graph.adjacency
    dropped: list[int] = []
    while True:
        sub = adj[np.ix_(keep, keep)]
        edges = list(zip(*np.nonzero(np.triu(sub, k=1))))
        odd = [c for c in components(len(keep), edges) if len(c) % 2]
        if not odd:
            break
        deg = sub.sum(axis=1)
        drop = {min(c, key=lambda k: (deg[k], keep[k])) for c in odd}
        dropped.extend(keep[k] for k in sorted(drop))
        keep = [v for k, v in enumerate(keep) if k not in drop]
    if dropped:
        log.warning("dropped %d vehicle(s) in odd components: %s", len(dropped), sorted(dropped))
    return (instance.subset(keep) if dropped else instance), sorted(dropped)


def solution_metrics(instance: Instance, report: SolutionReport, matching: VspMatching) -> dict:
    """Per-trial metrics; stranded vehicles count only toward eta_bar."""
    delays = [e.delay for e in report.evals.values() if e.stable]
    unstable = sum(not e.stable for e in report.evals.values())
    tsps = [pair_tsp(report.evals[i], report.evals[j]) for i, j in matching.pairs()]
    rho = [1.0 - e.theta for e in report.evals.values()]
    return {
        "latency": float(np.mean(delays)) if delays else math.nan,
        "tsp": float(np.mean(tsps)) if tsps else math.nan,
        "eta_bar": float(np.mean(report.eta)) if instance.n_vues else math.nan,
        "rho_bar": float(np.mean(rho)) if rho else math.nan,
        "unmatched": len(matching.unmatched()),
        "unstable": unstable,
        "violations": report.constraints.n_violations,
    }


def _solve(instance: Instance, cfg: RunConfig, method: str, seed: int):
    eta0, theta0 = cfg.constraints.eta0, cfg.constraints.theta0
    if method == "s4":
        res = run_s4(instance, cfg.solver, eta0, theta0)
        return res.alpha, res.matching, res.feasible, res.history
    # baseline fill stream is separate from the scenario streams
    alpha = baseline_kbc(instance.profiles, instance.library, eta0, [seed, 7])
    if method == "dfp":
        matching = dfp_matching(instance.positions, instance.graph)
    else:
        matching = kfp_matching(instance.graph, alpha, instance.profiles)
    report = evaluate_solution(instance, alpha, matching, eta0, theta0)
    return alpha, matching, report.admissible, []


def evaluate_trial(instance: Instance, cfg: RunConfig, method: str, seed: int, dropped=()) -> TrialResult:
    """Run one method on an already generated (and evened) instance."""
    start = time.perf_counter()
    try:
        alpha, matching, feasible, history = _solve(instance, cfg, method, seed)
    except ScvnError as exc:
        log.warning("trial %s/%d failed: %s", method, seed, exc)
        return TrialResult(method, seed, False, error=f"{type(exc).__name__}: {exc}",
                           n_vues=instance.n_vues, dropped=list(dropped))
    report = evaluate_solution(instance, alpha, matching, cfg.constraints.eta0, cfg.constraints.theta0)
    return TrialResult(
        method, seed, True,
        feasible=feasible,
        objective=report.objective,
        n_vues=instance.n_vues,
        dropped=list(dropped),
        runtime_s=time.perf_counter() - start,
        history=history,
        **solution_metrics(instance, report, matching),
    )


def prepare_instance(cfg: RunConfig, seed: int) -> tuple[Instance, list[int]]:
    return make_even(generate_instance(cfg, seed))


def run_trial(config: TrialConfig) -> TrialResult:
    """Generate the seeded scenario and run the configured method on it."""
    config.validate()
    try:
        instance, dropped = prepare_instance(config.run, config.seed)
    except ScvnError as exc:
        return TrialResult(config.method, config.seed, False, error=f"{type(exc).__name__}: {exc}")
    return evaluate_trial(instance, config.run, config.method, config.seed, dropped)


def point_seed(master: int, param: str, value: float, trial: int) -> int:
    """Stable per-trial seed from a hash of the sweep coordinates."""
    key = f"{master}|{param}|{float(value)!r}|{trial}".encode()
    return int.from_bytes(hashlib.sha256(key).digest()[:8], "little") >> 1


def run_point(cfg: RunConfig, trials: int, methods=METHODS, param: str = "default", value: float = 0.0,
              master_seed: int | None = None) -> dict[str, list[TrialResult]]:
    """All methods on the same ``trials`` scenarios."""
    master = cfg.seed if master_seed is None else master_seed
    out: dict[str, list[TrialResult]] = {m: [] for m in methods}
    for k in range(trials):
        seed = point_seed(master, param, value, k)
        try:
            instance, dropped = prepare_instance(cfg, seed)
        except ScvnError as exc:
            for m in methods:
                out[m].append(TrialResult(m, seed, False, error=f"{type(exc).__name__}: {exc}"))
            continue
        for m in methods:
            out[m].append(evaluate_trial(instance, cfg, m, seed, dropped))
    return out


def _mean_se(values) -> tuple[float, float]:
    x = np.asarray([v for v in values if np.isfinite(v)], dtype=float)
    if x.size == 0:
        return math.nan, math.nan
    se = float(x.std(ddof=1) / math.sqrt(x.size)) if x.size > 1 else 0.0
    return float(x.mean()), se


def aggregate(results: list[TrialResult], method: str, param: str, value: float) -> MetricRow:
    """Mean and standard error over the successful trials."""
    ok = [r for r in results if r.ok]
    lat = _mean_se(r.latency for r in ok)
    tsp = _mean_se(r.tsp for r in ok)
    eta = _mean_se(r.eta_bar for r in ok)
    rho = _mean_se(r.rho_bar for r in ok)
    unmatched = float(np.mean([r.unmatched for r in ok])) if ok else math.nan
    return MetricRow(method, param, float(value), *lat, *tsp, *eta, *rho, unmatched, len(ok))


def run_sweep(base: RunConfig, param: str, values, trials_per_point: int, methods=METHODS,
              master_seed: int | None = None, records: dict | None = None) -> list[MetricRow]:
    """One MetricRow per (method, value), methods sharing scenarios at every point.

    Pass a dict as ``records`` to also collect the per-trial results keyed by
    (method, value).
    """
    if param not in SWEEP_PARAMS:
        raise ValueError(f"cannot sweep {param!r}; choose from {sorted(SWEEP_PARAMS)}")
    rows = []
    for value in values:
        cfg = with_param(base, param, value)
        point = run_point(cfg, trials_per_point, methods, param, value, master_seed)
        for m in methods:
            rows.append(aggregate(point[m], m, param, value))
            if records is not None:
                records[(m, value)] = point[m]
    return rows


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.9g}"


def emit_csv(rows, path) -> None:
    """Write the metric table; raises OSError when the path is unwritable."""
    with open(path, "w", newline="") as fh:
        fh.write(CSV_HEADER + "\n")
        for row in rows:
            fh.write(",".join(_fmt(x) for x in row.as_tuple()) + "\n")


def read_csv(path) -> list[MetricRow]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if ",".join(header) != CSV_HEADER:
            raise ValueError("unexpected CSV header")
        rows = []
        for rec in reader:
            m, p, *nums = rec
            vals = [float(x) for x in nums[:-1]]
            rows.append(MetricRow(m, p, *vals, int(nums[-1])))
    return rows


def emit_diagnostics(history: list[IterationRecord], path) -> None:
    """Per-iteration dual-loop trace as CSV."""
    with open(path, "w", newline="") as fh:
        fh.write(DIAG_HEADER + "\n")
        for h in history:
            fields = (h.t, h.dual, h.inner, h.primal, int(h.feasible), h.incumbent,
                      h.max_theta_slack, h.tau_mean, h.stepsize)
            fh.write(",".join(_fmt(x) for x in fields) + "\n")
