"""Dense two-phase tableau simplex for  min c.x  s.t.  A x = b, x >= 0.

Pivoting uses Dantzig's rule and falls back to Bland's rule after a run of
degenerate pivots, which rules out cycling on the highly degenerate
matching polytope.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class LPInfeasible(Exception):
    pass


class LPUnbounded(Exception):
    pass


@dataclass(frozen=True)
class LPResult:
    x: np.ndarray
    objective: float
    pivots: int


_EPS = 1e-9


def _pivot(T: np.ndarray, basis: np.ndarray, row: int, col: int) -> None:
    T[row] /= T[row, col]
    colv = T[:, col].copy()
    colv[row] = 0.0
    T -= np.outer(colv, T[row])
    basis[row] = col


def _run(T: np.ndarray, basis: np.ndarray, n_cols: int, max_pivots: int, degenerate_limit: int = 20) -> int:
    """Optimize the tableau in place; the last row holds reduced costs, last column the rhs."""
    pivots = 0
    degenerate_run = 0
    while True:
        red = T[-1, :n_cols]
        if degenerate_run >= degenerate_limit:
            candidates = np.flatnonzero(red < -_EPS)
            if candidates.size == 0:
                return pivots
            col = int(candidates[0])
        else:
            col = int(np.argmin(red))
            if red[col] >= -_EPS:
                return pivots
        column = T[:-1, col]
        pos = column > _EPS
        if not pos.any():
            raise LPUnbounded("objective unbounded below")
        ratios = np.full(column.shape, np.inf)
        ratios[pos] = T[:-1, -1][pos] / column[pos]
        best = ratios.min()
        # Bland tie-break on the leaving variable: smallest basis index
        ties = np.flatnonzero(ratios <= best + _EPS * max(1.0, abs(best)))
        row = int(ties[np.argmin(basis[ties])])
        degenerate_run = degenerate_run + 1 if best <= _EPS else 0
        _pivot(T, basis, row, col)
        pivots += 1
        if pivots > max_pivots:
            raise RuntimeError("simplex pivot limit exceeded")


def linprog_eq(c, A, b, max_pivots: int = 100_000) -> LPResult:
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    if m == 0:
        if np.any(c < -_EPS):
            raise LPUnbounded("objective unbounded below")
        return LPResult(np.zeros(n), 0.0, 0)
    flip = b < 0
    A = np.where(flip[:, None], -A, A)
    b = np.abs(b)

    # phase 1: artificials n..n+m-1
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n : n + m] = np.eye(m)
    T[:m, -1] = b
    T[-1, :n] = -A.sum(axis=0)
    T[-1, -1] = -b.sum()
    basis = np.arange(n, n + m)
    pivots = _run(T, basis, n + m, max_pivots)
    if -T[-1, -1] > 1e-7 * max(1.0, b.sum()):
        raise LPInfeasible(f"phase-1 residual {-T[-1, -1]:.3g}")

    # drive zero-valued artificials out of the basis, dropping redundant rows
    keep_rows = []
    for r in range(m):
        if basis[r] < n:
            keep_rows.append(r)
            continue
        candidates = np.flatnonzero(np.abs(T[r, :n]) > _EPS)
        if candidates.size:
            _pivot(T, basis, r, int(candidates[0]))
            pivots += 1
            keep_rows.append(r)
    rows = np.array(keep_rows, dtype=int)
    T2 = np.zeros((rows.size + 1, n + 1))
    T2[:-1, :n] = T[rows, :n]
    T2[:-1, -1] = T[rows, -1]
    basis = basis[rows]
    T2[-1, :n] = c
    T2[-1, -1] = 0.0
    for r, col in enumerate(basis):
        T2[-1] -= c[col] * T2[r]

    pivots += _run(T2, basis, n, max_pivots)
    x = np.zeros(n)
    x[basis] = T2[:-1, -1]
    x[np.abs(x) < 1e-12] = 0.0
    return LPResult(x, float(c @ x), pivots)
