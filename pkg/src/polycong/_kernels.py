"""Numba kernels for the hot loops: polytope distance and pairwise tuple matching."""

from __future__ import annotations

import numpy as np
from numba import njit

_FEAS_TOL = 1e-12


@njit(cache=True)
def _solve_small(G, rhs):
    # Gaussian elimination with partial pivoting; returns (ok, solution)
    t = G.shape[0]
    A = G.copy()
    y = rhs.copy()
    for col in range(t):
        piv = col
        best = abs(A[col, col])
        for row in range(col + 1, t):
            if abs(A[row, col]) > best:
                best = abs(A[row, col])
                piv = row
        if best < 1e-13:
            return False, y
        if piv != col:
            for j in range(t):
                tmp = A[col, j]
                A[col, j] = A[piv, j]
                A[piv, j] = tmp
            tmp = y[col]
            y[col] = y[piv]
            y[piv] = tmp
        for row in range(col + 1, t):
            f = A[row, col] / A[col, col]
            for j in range(col, t):
                A[row, j] -= f * A[col, j]
            y[row] -= f * y[col]
    for col in range(t - 1, -1, -1):
        s = y[col]
        for j in range(col + 1, t):
            s -= A[col, j] * y[j]
        y[col] = s / A[col, col]
    return True, y


@njit(cache=True, nogil=True)
def polytope_distance(P, N, b, cap):
    """Euclidean distance from each row of ``P`` to ``{y : N y <= b}``.

    ``N`` must have unit rows. Distances not exceeding ``cap`` are exact (up to
    rounding); larger distances are reported as some value greater than ``cap``.
    Only constraints with slack at least ``-cap`` can be active at a nearest
    point within ``cap``, so only subsets of those are projected onto.
    """
    n, d = P.shape
    k = N.shape[0]
    out = np.empty(n)
    viol = np.empty(k)
    cand = np.empty(k, dtype=np.int64)
    for p in range(n):
        vmax = -np.inf
        for i in range(k):
            s = -b[i]
            for j in range(d):
                s += N[i, j] * P[p, j]
            viol[i] = s
            if s > vmax:
                vmax = s
        if vmax <= 0.0:
            out[p] = 0.0
            continue
        if vmax > cap:
            out[p] = vmax
            continue
        na = 0
        for i in range(k):
            if viol[i] >= -cap:
                cand[na] = i
                na += 1
        best = np.inf
        for mask in range(1, 1 << na):
            t = 0
            mm = mask
            while mm:
                t += mm & 1
                mm >>= 1
            if t > d:
                continue
            S = np.empty(t, dtype=np.int64)
            q = 0
            for a in range(na):
                if mask >> a & 1:
                    S[q] = cand[a]
                    q += 1
            G = np.empty((t, t))
            rhs = np.empty(t)
            for u in range(t):
                rhs[u] = viol[S[u]]
                for v in range(t):
                    s = 0.0
                    for j in range(d):
                        s += N[S[u], j] * N[S[v], j]
                    G[u, v] = s
            ok, lam = _solve_small(G, rhs)
            if not ok:
                continue
            y = P[p].copy()
            for u in range(t):
                for j in range(d):
                    y[j] -= lam[u] * N[S[u], j]
            feasible = True
            for i in range(k):
                s = -b[i]
                for j in range(d):
                    s += N[i, j] * y[j]
                if s > _FEAS_TOL:
                    feasible = False
                    break
            if not feasible:
                continue
            dist = 0.0
            for j in range(d):
                dist += (P[p, j] - y[j]) ** 2
            dist = np.sqrt(dist)
            if dist < best:
                best = dist
        out[p] = best
    return out


@njit(cache=True, nogil=True)
def count_matching_pairs(S, U, lo, hi):
    """Number of pairs ``(a, b)`` with ``a`` in ``[lo, hi)`` and ``S[a] - S[b] == U`` rowwise."""
    n, r = S.shape
    total = 0
    for a in range(lo, hi):
        for bb in range(n):
            ok = True
            for t in range(r):
                if S[a, t] - S[bb, t] != U[t]:
                    ok = False
                    break
            if ok:
                total += 1
    return total


@njit(cache=True, nogil=True)
def count_residue_pairs(v, u, m, lo, hi):
    """Number of pairs ``(a, b)`` with ``a`` in ``[lo, hi)`` and ``v[a] - v[b] == u (mod m)``."""
    n = v.shape[0]
    total = 0
    for a in range(lo, hi):
        for bb in range(n):
            if (v[a] - v[bb] - u) % m == 0:
                total += 1
    return total
