"""Knowledge-matched M/G/1 queue of one directed vehicle pair.

Packets of KB n leave the sender at rate lambda * p_n. Only packets whose KB
the receiver also holds join its FIFO queue; the rest count as mismatch.
The per-packet interpretation time is W = sum_n eps_n * I_n over the shared
KBs, with I_n ~ Exp(mu_n) independent, so

    E[W] = sum eps_n / mu_n,    Var(W) = sum (eps_n / mu_n)^2,

and the mean wait follows from Pollaczek-Khinchine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .errors import EmptyQueue, UnstableQueue
from .knowledge import VueProfile


@dataclass(frozen=True)
class PairDirectionEval:
    sender: int
    receiver: int
    shared: tuple[int, ...]
    theta: float
    mix: np.ndarray
    lambda_eff: float
    mean_w: float
    var_w: float
    delay: float
    stable: bool

    @property
    def utilization(self) -> float:
        return self.lambda_eff * self.mean_w


def _bits(alpha) -> np.ndarray:
    return np.asarray(alpha, dtype=bool)


def mismatch_degree(alpha_i, alpha_j, rates_i) -> float:
    """Fraction of the sender's offered traffic the receiver cannot interpret.

    ``rates_i`` are the sender's per-KB arrival rates (or popularities; the
    total rate cancels). A sender with no KB offers nothing and gets 0.
    """
    a, b = _bits(alpha_i), _bits(alpha_j)
    rates = np.asarray(rates_i, dtype=float)
    total = rates[a].sum()
    if total <= 0:
        return 0.0
    return float(rates[a & ~b].sum() / total)


def packet_mix(alpha_i, alpha_j, popularity_i) -> np.ndarray:
    """Share of each shared KB among queued packets; zero off the shared set."""
    shared = _bits(alpha_i) & _bits(alpha_j)
    if not shared.any():
        raise EmptyQueue("no shared KB")
    p = np.asarray(popularity_i, dtype=float)
    eps = np.where(shared, p, 0.0)
    return eps / eps.sum()


def interp_moments(mix, mu_j) -> tuple[float, float]:
    w = np.asarray(mix, dtype=float) / np.asarray(mu_j, dtype=float)
    return float(w.sum()), float(np.dot(w, w))


def pk_wait(lambda_eff: float, mean_w: float, var_w: float) -> float:
    """Pollaczek-Khinchine mean waiting time (service excluded)."""
    rho = lambda_eff * mean_w
    if rho >= 1:
        raise UnstableQueue(rho)
    return lambda_eff * (mean_w * mean_w + var_w) / (2 * (1 - rho))


def effective_rate(alpha_i, alpha_j, sender: VueProfile) -> float:
    shared = _bits(alpha_i) & _bits(alpha_j)
    return float(sender.kb_rates[shared].sum())


def pk_queuing_latency(alpha_i, alpha_j, sender: VueProfile, receiver: VueProfile) -> float:
    try:
        mix = packet_mix(alpha_i, alpha_j, sender.popularity)
    except EmptyQueue:
        return 0.0
    mean_w, var_w = interp_moments(mix, receiver.interp_rate)
    return pk_wait(effective_rate(alpha_i, alpha_j, sender), mean_w, var_w)


def evaluate_direction(alpha_i, alpha_j, sender: VueProfile, receiver: VueProfile) -> PairDirectionEval:
    """All per-direction quantities; an unstable queue gets ``delay = inf``."""
    a, b = _bits(alpha_i), _bits(alpha_j)
    shared = a & b
    theta = mismatch_degree(a, b, sender.kb_rates)
    lam = effective_rate(a, b, sender)
    if not shared.any():
        return PairDirectionEval(
            sender.vue_id, receiver.vue_id, (), theta, np.zeros(a.size), 0.0, 0.0, 0.0, 0.0, True
        )
    mix = packet_mix(a, b, sender.popularity)
    mean_w, var_w = interp_moments(mix, receiver.interp_rate)
    try:
        delay = pk_wait(lam, mean_w, var_w)
        stable = True
    except UnstableQueue:
        delay, stable = math.inf, False
    return PairDirectionEval(
        sender.vue_id,
        receiver.vue_id,
        tuple(np.flatnonzero(shared).tolist()),
        theta,
        mix,
        lam,
        mean_w,
        var_w,
        delay,
        stable,
    )


def pair_tsp(eval_ij: PairDirectionEval, eval_ji: PairDirectionEval) -> float:
    """Packets/s a pair can interpret: sum of 1/E[W] over non-empty directions."""
    return sum(1.0 / e.mean_w for e in (eval_ij, eval_ji) if e.shared)


@dataclass(frozen=True)
class DesResult:
    mean_wait: float
    ci_low: float
    ci_high: float
    n_packets: int
    utilization: float

    def contains(self, value: float) -> bool:
        return self.ci_low <= value <= self.ci_high


@numba.njit(cache=True)
def _lindley(inter: np.ndarray, service: np.ndarray) -> np.ndarray:
    n = service.size
    wait = np.empty(n)
    w = 0.0
    wait[0] = 0.0
    for k in range(1, n):
        w = w + service[k - 1] - inter[k]
        if w < 0.0:
            w = 0.0
        wait[k] = w
    return wait


def des_mg1_oracle(
    alpha_i,
    alpha_j,
    sender: VueProfile,
    receiver: VueProfile,
    n_packets: int = 10**6,
    seed=None,
    service: str = "weighted_sum",
    n_batches: int = 50,
    warmup: float = 0.02,
) -> DesResult:
    """Simulate the pair queue with the Lindley recursion.

    ``service="weighted_sum"`` draws every packet's interpretation time as
    sum_n eps_n * Exp(mu_n), the law the analytic moments describe.
    ``service="mixture"`` instead draws the packet's KB from eps and a single
    Exp(mu_KB) time. The 95% interval uses batch means after dropping a
    warm-up fraction.
    """
    a, b = _bits(alpha_i), _bits(alpha_j)
    lam = effective_rate(a, b, sender)
    if lam <= 0:
        return DesResult(0.0, 0.0, 0.0, 0, 0.0)
    mix = packet_mix(a, b, sender.popularity)
    mean_w, _ = interp_moments(mix, receiver.interp_rate)
    if lam * mean_w >= 1:
        raise UnstableQueue(lam * mean_w)
    rng = np.random.default_rng(seed)
    shared = np.flatnonzero(mix > 0)
    mu = receiver.interp_rate[shared]
    eps = mix[shared]
    inter = rng.exponential(1.0 / lam, n_packets)
    if service == "weighted_sum":
        s = np.zeros(n_packets)
        for e, m in zip(eps, mu):
            s += e * rng.exponential(1.0 / m, n_packets)
    elif service == "mixture":
        kb = rng.choice(shared.size, size=n_packets, p=eps)
        s = rng.exponential(1.0, n_packets) / mu[kb]
    else:
        raise ValueError(f"unknown service law {service!r}")
    wait = _lindley(inter, s)[int(warmup * n_packets) :]
    usable = wait.size - wait.size % n_batches
    batches = wait[:usable].reshape(n_batches, -1).mean(axis=1)
    mean = float(wait.mean())
    half = 1.96 * float(batches.std(ddof=1)) / math.sqrt(n_batches)
    return DesResult(mean, mean - half, mean + half, n_packets, lam * mean_w)
