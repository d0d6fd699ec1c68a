"""Per-pair KB construction subproblem.

For a linked pair (i, j) the joint decision is a 2N-bit vector
[alpha_i, alpha_j], stored in kernels as one int64 code
``a | (b << N)``. The pair cost is

    omega = (delta_ij + tau_i * theta_ij) + (delta_ji + tau_j * theta_ji)

subject to both storage budgets, both preference floors, and stability of
both queues.

The tabu kernel scores a neighbor by updating the pair's running sums for
the (at most sigma) flipped KBs instead of recomputing them, which keeps a
neighborhood sweep at O(|H| * sigma).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numba
import numpy as np
from numba import prange

from ..errors import InfeasiblePair, UnstableQueue
from ..knowledge import FEAS_TOL, KbLibrary, VueProfile
from ..queueing import evaluate_direction

CAP_TOL = 1e-9


def encode(alpha_i, alpha_j) -> int:
    a = np.asarray(alpha_i, dtype=np.int64)
    b = np.asarray(alpha_j, dtype=np.int64)
    n = a.size
    w = np.int64(1) << np.arange(n, dtype=np.int64)
    return int((a * w).sum() | ((b * w).sum() << n))


def decode(code: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    bits = (int(code) >> np.arange(2 * n)) & 1
    return bits[:n].astype(np.int8), bits[n:].astype(np.int8)


def pair_cost_omega(alpha_i, alpha_j, tau_i: float, tau_j: float, prof_i: VueProfile, prof_j: VueProfile) -> float:
    """Reference pair cost built from the queueing module; raises UnstableQueue."""
    e_ij = evaluate_direction(alpha_i, alpha_j, prof_i, prof_j)
    e_ji = evaluate_direction(alpha_j, alpha_i, prof_j, prof_i)
    for e in (e_ij, e_ji):
        if not e.stable:
            raise UnstableQueue(e.utilization)
    return (e_ij.delay + tau_i * e_ij.theta) + (e_ji.delay + tau_j * e_ji.theta)


def pair_feasible(alpha_i, alpha_j, prof_i: VueProfile, prof_j: VueProfile, library: KbLibrary, eta0: float) -> bool:
    """Storage, preference floor, and queue stability for both members."""
    a = np.asarray(alpha_i, dtype=float)
    b = np.asarray(alpha_j, dtype=float)
    if a @ library.sizes > prof_i.capacity + CAP_TOL or b @ library.sizes > prof_j.capacity + CAP_TOL:
        return False
    if a @ prof_i.popularity < eta0 - FEAS_TOL or b @ prof_j.popularity < eta0 - FEAS_TOL:
        return False
    return evaluate_direction(a, b, prof_i, prof_j).stable and evaluate_direction(b, a, prof_j, prof_i).stable


def initial_feasible_kbc(
    p_i: np.ndarray,
    p_j: np.ndarray,
    sizes: np.ndarray,
    cap_i: float,
    cap_j: float,
    eta0: float,
) -> np.ndarray:
    """Greedy shared start: add the KB with the largest p_i + p_j to both
    vehicles until both reach eta0; whenever a budget overflows, drop the
    largest constructed KB from both. Returns the 2N-bit start vector.
    """
    n = sizes.size
    a = np.zeros(n, dtype=np.int8)
    remaining = list(range(n))
    built: list[int] = []
    score = p_i + p_j
    while (a @ p_i < eta0 - FEAS_TOL) or (a @ p_j < eta0 - FEAS_TOL):
        if not remaining:
            raise InfeasiblePair("preference floor unreachable with a shared construction")
        n0 = max(remaining, key=lambda k: (score[k], -k))
        remaining.remove(n0)
        built.append(n0)
        a[n0] = 1
        while a @ sizes > min(cap_i, cap_j) + CAP_TOL:
            n1 = max(built, key=lambda k: (sizes[k], -k))
            built.remove(n1)
            a[n1] = 0
    return np.concatenate([a, a])


def flip_table(n_bits: int, sigma: int) -> tuple[np.ndarray, np.ndarray]:
    """All position sets of size <= sigma, as (F, sigma) padded with -1, plus XOR masks.

    Row 0 is the empty set (the current solution itself).
    """
    sigma = min(sigma, n_bits)
    combos = [c for r in range(sigma + 1) for c in itertools.combinations(range(n_bits), r)]
    pos = np.full((len(combos), max(sigma, 1)), -1, dtype=np.int64)
    masks = np.zeros(len(combos), dtype=np.int64)
    for k, c in enumerate(combos):
        pos[k, : len(c)] = c
        for q in c:
            masks[k] |= np.int64(1) << q
    return pos, masks


def touched_kbs(flip_pos: np.ndarray, n: int) -> np.ndarray:
    """Distinct KB indices hit by each flip set (bit q and bit q + N are the same KB)."""
    out = np.full_like(flip_pos, -1)
    for f, row in enumerate(flip_pos):
        kbs = sorted({int(q) % n for q in row if q >= 0})
        out[f, : len(kbs)] = kbs
    return out


def neighborhood(code: int, n: int, sigma: int, feasible, tabu=()) -> list[int]:
    """Codes within Hamming distance sigma of ``code`` that are feasible and not tabu."""
    _, masks = flip_table(2 * n, sigma)
    tabu = set(tabu)
    out = []
    for m in masks.tolist():
        c = code ^ m
        if c not in tabu and feasible(c):
            out.append(c)
    return out


# ---------------------------------------------------------------- kernels


@numba.njit(cache=True)
def _sums(a, b, n, pi, pj, s, qij, q2ij, qji, q2ji, out):
    # out: eta_i, eta_j, cap_i, cap_j, P_ij, S1_ij, S2_ij, P_ji, S1_ji, S2_ji
    for k in range(10):
        out[k] = 0.0
    for m in range(n):
        ai = (a >> m) & 1
        bj = (b >> m) & 1
        if ai:
            out[0] += pi[m]
            out[2] += s[m]
        if bj:
            out[1] += pj[m]
            out[3] += s[m]
        if ai and bj:
            out[4] += pi[m]
            out[5] += qij[m]
            out[6] += q2ij[m]
            out[7] += pj[m]
            out[8] += qji[m]
            out[9] += q2ji[m]


@numba.njit(cache=True)
def _direction(eta, P, S1, S2, lam):
    # returns (delay, theta, ok)
    theta = 0.0
    if eta > 0.0:
        theta = (eta - P) / eta
        if theta < 0.0:
            theta = 0.0
    if P <= 0.0:
        return 0.0, theta, True
    rho = lam * S1
    if rho >= 1.0:
        return math.inf, theta, False
    return lam * (S1 * S1 + S2) / (P * 2.0 * (1.0 - rho)), theta, True


@numba.njit(cache=True)
def _score(v, lam_i, lam_j, cap_i, cap_j, eta0, tau_i, tau_j):
    if v[2] > cap_i + 1e-9 or v[3] > cap_j + 1e-9:
        return math.inf
    if v[0] < eta0 - 1e-12 or v[1] < eta0 - 1e-12:
        return math.inf
    d1, t1, ok1 = _direction(v[0], v[4], v[5], v[6], lam_i)
    if not ok1:
        return math.inf
    d2, t2, ok2 = _direction(v[1], v[7], v[8], v[9], lam_j)
    if not ok2:
        return math.inf
    return (d1 + tau_i * t1) + (d2 + tau_j * t2)


@numba.njit(cache=True)
def _tabu_one(
    init, n, pi, pj, s, qij, q2ij, qji, q2ji, lam_i, lam_j, cap_i, cap_j, eta0, tau_i, tau_j,
    flip_kb, flip_mask, Z, tabu_cap,
):
    lowmask = (np.int64(1) << n) - 1
    cur = init
    base = np.empty(10)
    _sums(cur & lowmask, cur >> n, n, pi, pj, s, qij, q2ij, qji, q2ji, base)
    best_code = cur
    best_val = _score(base, lam_i, lam_j, cap_i, cap_j, eta0, tau_i, tau_j)
    tabu = np.empty(tabu_cap, dtype=np.int64)
    n_tabu = 0
    head = 0
    n_flips = flip_mask.shape[0]
    width = flip_kb.shape[1]
    cap_lim_i = cap_i + 1e-9
    cap_lim_j = cap_j + 1e-9
    eta_lim = eta0 - 1e-12
    for _ in range(Z):
        a = cur & lowmask
        b = cur >> n
        pick = np.int64(-1)
        pick_val = math.inf
        for f in range(n_flips):
            mask = flip_mask[f]
            na = (cur ^ mask) & lowmask
            nb = (cur ^ mask) >> n
            eta_i = base[0]
            eta_j = base[1]
            c_i = base[2]
            c_j = base[3]
            P1 = base[4]
            S11 = base[5]
            S21 = base[6]
            P2 = base[7]
            S12 = base[8]
            S22 = base[9]
            for q in range(width):
                m = flip_kb[f, q]
                if m < 0:
                    break
                oa = (a >> m) & 1
                ob = (b >> m) & 1
                xa = (na >> m) & 1
                xb = (nb >> m) & 1
                if xa != oa:
                    if xa:
                        eta_i += pi[m]
                        c_i += s[m]
                    else:
                        eta_i -= pi[m]
                        c_i -= s[m]
                if xb != ob:
                    if xb:
                        eta_j += pj[m]
                        c_j += s[m]
                    else:
                        eta_j -= pj[m]
                        c_j -= s[m]
                dsh = xa * xb - oa * ob
                if dsh != 0:
                    P1 += dsh * pi[m]
                    S11 += dsh * qij[m]
                    S21 += dsh * q2ij[m]
                    P2 += dsh * pj[m]
                    S12 += dsh * qji[m]
                    S22 += dsh * q2ji[m]
            if c_i > cap_lim_i or c_j > cap_lim_j or eta_i < eta_lim or eta_j < eta_lim:
                continue
            d1, t1, ok1 = _direction(eta_i, P1, S11, S21, lam_i)
            if not ok1:
                continue
            d2, t2, ok2 = _direction(eta_j, P2, S12, S22, lam_j)
            if not ok2:
                continue
            val = (d1 + tau_i * t1) + (d2 + tau_j * t2)
            if val < pick_val:
                code = cur ^ mask
                is_tabu = False
                lim = n_tabu if n_tabu < tabu_cap else tabu_cap
                for t in range(lim):
                    if tabu[t] == code:
                        is_tabu = True
                        break
                if not is_tabu:
                    pick = code
                    pick_val = val
        if pick < 0:
            break
        cur = pick
        _sums(cur & lowmask, cur >> n, n, pi, pj, s, qij, q2ij, qji, q2ji, base)
        cur_val = _score(base, lam_i, lam_j, cap_i, cap_j, eta0, tau_i, tau_j)
        if cur_val < best_val:
            best_val = cur_val
            best_code = cur
        else:
            tabu[head] = cur
            head = (head + 1) % tabu_cap
            n_tabu += 1
    return best_code, best_val


@numba.njit(cache=True)
def _exhaustive_one(n, pi, pj, s, qij, q2ij, qji, q2ji, lam_i, lam_j, cap_i, cap_j, eta0, tau_i, tau_j):
    lowmask = (np.int64(1) << n) - 1
    v = np.empty(10)
    best_code = np.int64(-1)
    best_val = math.inf
    total = np.int64(1) << (2 * n)
    for code in range(total):
        _sums(code & lowmask, code >> n, n, pi, pj, s, qij, q2ij, qji, q2ji, v)
        val = _score(v, lam_i, lam_j, cap_i, cap_j, eta0, tau_i, tau_j)
        if val < best_val:
            best_val = val
            best_code = code
    return best_code, best_val


@numba.njit(cache=True, parallel=True)
def _solve_pairs(
    ii, jj, P, LAM, MU, CAP, S, eta0, tau, init_codes, flip_kb, flip_mask, Z, tabu_cap, exhaustive,
):
    u = ii.size
    n = S.size
    codes = np.full(u, -1, dtype=np.int64)
    vals = np.full(u, math.inf)
    for e in prange(u):
        i = ii[e]
        j = jj[e]
        pi = P[i]
        pj = P[j]
        qij = pi / MU[j]
        qji = pj / MU[i]
        q2ij = qij * qij
        q2ji = qji * qji
        if exhaustive:
            c, v = _exhaustive_one(n, pi, pj, S, qij, q2ij, qji, q2ji, LAM[i], LAM[j], CAP[i], CAP[j], eta0, tau[i], tau[j])
        else:
            if init_codes[e] < 0:
                continue
            c, v = _tabu_one(
                init_codes[e], n, pi, pj, S, qij, q2ij, qji, q2ji, LAM[i], LAM[j], CAP[i], CAP[j],
                eta0, tau[i], tau[j], flip_kb, flip_mask, Z, tabu_cap,
            )
        if v < math.inf:
            codes[e] = c
            vals[e] = v
    return codes, vals


# ---------------------------------------------------------------- wrappers


@dataclass(frozen=True)
class P1Solution:
    alpha_i: np.ndarray
    alpha_j: np.ndarray
    omega: float


class PairSolver:
    """Solves the pair subproblem for many edges of one instance.

    Start vectors do not depend on the multipliers and are computed once.
    """

    def __init__(self, instance, eta0: float, sigma: int = 2, Z: int = 100, tabu_capacity: int = 50,
                 mode: str = "tabu"):
        if mode not in ("tabu", "exhaustive"):
            raise ValueError(f"unknown P1 mode {mode!r}")
        if mode == "exhaustive" and instance.n_kbs > 12:
            raise ValueError("exhaustive P1 is limited to N <= 12")
        if 2 * instance.n_kbs > 62:
            raise ValueError("N must be <= 31")
        self.instance = instance
        self.eta0 = float(eta0)
        self.Z = int(Z)
        self.tabu_capacity = int(tabu_capacity)
        self.mode = mode
        self.flip_pos, self.flip_mask = flip_table(2 * instance.n_kbs, sigma)
        self.flip_kb = touched_kbs(self.flip_pos, instance.n_kbs)
        self._init: dict[tuple[int, int], int] = {}

    def initial_code(self, i: int, j: int) -> int:
        key = (i, j)
        if key not in self._init:
            inst = self.instance
            try:
                start = initial_feasible_kbc(
                    inst.popularity[i], inst.popularity[j], inst.library.sizes,
                    inst.capacity[i], inst.capacity[j], self.eta0,
                )
                code = encode(start[: inst.n_kbs], start[inst.n_kbs :])
                a, b = decode(code, inst.n_kbs)
                if not pair_feasible(a, b, inst.profiles[i], inst.profiles[j], inst.library, self.eta0):
                    code = -1
            except InfeasiblePair:
                code = -1
            self._init[key] = code
        return self._init[key]

    def solve(self, edges, tau) -> tuple[np.ndarray, np.ndarray]:
        """Best codes and pair costs for ``edges``; code -1 / cost inf marks an infeasible pair."""
        inst = self.instance
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if edges.shape[0] == 0:
            return np.empty(0, dtype=np.int64), np.empty(0)
        init = np.array([self.initial_code(int(i), int(j)) for i, j in edges], dtype=np.int64)
        return _solve_pairs(
            edges[:, 0].copy(), edges[:, 1].copy(), inst.popularity, inst.arrival, inst.interp, inst.capacity,
            inst.library.sizes, self.eta0, np.asarray(tau, dtype=float), init, self.flip_kb, self.flip_mask,
            self.Z, self.tabu_capacity, self.mode == "exhaustive",
        )

    def solve_pair(self, i: int, j: int, tau_i: float, tau_j: float) -> P1Solution:
        tau = np.zeros(self.instance.n_vues)
        tau[i], tau[j] = tau_i, tau_j
        codes, vals = self.solve([(i, j)], tau)
        if codes[0] < 0:
            raise InfeasiblePair(f"pair ({i}, {j}) has no feasible KB construction")
        a, b = decode(int(codes[0]), self.instance.n_kbs)
        return P1Solution(a, b, float(vals[0]))


def tabu_search_p1(instance, i: int, j: int, tau_i: float, tau_j: float, eta0: float, sigma: int = 2,
                   Z: int = 100, tabu_capacity: int = 50) -> P1Solution:
    return PairSolver(instance, eta0, sigma, Z, tabu_capacity).solve_pair(i, j, tau_i, tau_j)
