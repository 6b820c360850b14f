"""Exact check of the inequality chain bounding ``M_F(H, R)`` by ``J(0, H)``.

For an instance ``(F, K, L, H, R, s)`` put ``G(x) = F(x + K) - L`` so the box
becomes ``[1,H]^d x [1,R]``. The links checked are

1. ``M^{2s} <= (1 + 2sR) T(u*)`` with ``u*`` maximizing ``T`` over residues of ``[-sR, sR]``
2. ``T(u) <= sum_{U in target set} J(U)`` for every residue ``u`` (equality in fact)
3. ``J(U) <= J(0)`` for every ``U``
4. ``#target set <= (2s+1)^(r-1) H^(K-k) (1 + (2s+1) H^k / m)``
5. ``M^{2s} <= (1+2sR) (2s+1)^(r-1) H^(K-k) (1 + (2s+1) H^k / m) J(0)``

All comparisons are between Python integers (the last two after clearing the
denominator ``m``).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import parallel
from .counting import SignatureTable, T_table, count_MF, signature_table, uset_bound, uset_table
from .poly import Polynomial, index_count, iter_multiindices, random_polynomial, weight_sum

DEFAULT_GRID = {
    "d": (1, 2),
    "k": (2, 3),
    "m": tuple(range(5, 31)),
    "H": (2, 3, 4, 5, 6),
    "s": (1, 2),
    "R": ("1", "H", "m"),
}
POLYS_PER_CELL = 50


@dataclass(frozen=True)
class JStats:
    """``J(0, H)``, the largest ``J(U, H)`` over ``U != 0``, and the signature table."""

    J0: int
    max_other: int
    table: SignatureTable


@lru_cache(maxsize=None)
def j_stats(s: int, k: int, d: int, H: int) -> JStats:
    table = signature_table(s, k, d, H, threads=1)
    S, c = table.sigs, table.counts
    # distribution of all differences v - w weighted by c_v c_w
    diff = (S[:, None, :] - S[None, :, :]).reshape(-1, S.shape[1])
    w = (c[:, None] * c[None, :]).ravel()
    span = table.hi - table.lo
    radix = np.array([int(np.prod(2 * span[t + 1:] + 1)) for t in range(len(span))], dtype=np.int64)
    keys = ((diff + span) * radix).sum(axis=1)
    order = np.argsort(keys, kind="stable")
    keys, w = keys[order], w[order]
    starts = np.flatnonzero(np.r_[True, keys[1:] != keys[:-1]])
    totals = np.add.reduceat(w, starts)
    zero_key = int((span * radix).sum())
    is_zero = keys[starts] == zero_key
    J0 = table.J0()
    if int(totals[is_zero][0]) != J0:
        raise AssertionError("difference distribution disagrees with J(0)")
    others = totals[~is_zero]
    return JStats(J0, int(others.max()) if len(others) else 0, table)


def uset_J_table(G: Polynomial, stats: JStats) -> list[int]:
    """``sum_{U in target set(u)} J(U)`` for every residue ``u``, from the signature table."""
    m = G.modulus
    idx = iter_multiindices(stats.table.k, stats.table.d)
    beta = np.array([G.coeff(i) for i in idx], dtype=np.int64)
    rho = (stats.table.sigs % m) @ beta % m
    hist = [0] * m
    for a, c in zip(rho.tolist(), stats.table.counts.tolist()):
        hist[a] += c
    return [sum(hist[a] * hist[(a - u) % m] for a in range(m)) for u in range(m)]


@dataclass(frozen=True)
class ChainResult:
    poly: str
    m: int
    d: int
    k: int
    s: int
    H: int
    R: int
    K: tuple[int, ...]
    L: int
    M: int
    u_star: int
    T_star: int
    J_sum_star: int
    uset_star: int
    uset_bound: Fraction
    J0: int
    J_max_other: int
    link2_all: bool
    box_T: bool
    link2: bool
    mono: bool
    uset_ok: bool
    master: bool

    @property
    def ok(self) -> bool:
        return self.box_T and self.link2 and self.mono and self.uset_ok and self.master

    @property
    def box_T_ratio(self) -> float:
        return self.M ** (2 * self.s) / ((1 + 2 * self.s * self.R) * self.T_star)

    @property
    def master_ratio(self) -> float:
        return self.M ** (2 * self.s) / float((1 + 2 * self.s * self.R) * self.uset_bound * self.J0)

    def to_text(self) -> str:
        r, Kw = index_count(self.k, self.d), weight_sum(self.k, self.d)
        lines = [
            f"F = {self.poly} (mod {self.m}), d={self.d} k={self.k} r={r} K={Kw} s={self.s}",
            f"box x in prod [K_i+1, K_i+{self.H}] with K={list(self.K)}, y in [{self.L + 1}, {self.L + self.R}]",
            f"M = {self.M}   M^(2s) = {self.M ** (2 * self.s)}",
            f"u* = {self.u_star}   T(u*) = {self.T_star}   (1+2sR) T(u*) = {(1 + 2 * self.s * self.R) * self.T_star}",
            f"sum J over targets at u* = {self.J_sum_star}   (all residues agree: {self.link2_all})",
            f"J(0) = {self.J0}   max J(U), U != 0 = {self.J_max_other}",
            f"#targets at u* = {self.uset_star}   bound = {float(self.uset_bound):.6g}",
            f"box<=T {_pf(self.box_T)}  T<=sumJ {_pf(self.link2)}  J(U)<=J(0) {_pf(self.mono)}  "
            f"targets {_pf(self.uset_ok)}  master {_pf(self.master)}",
        ]
        return "\n".join(lines)


def _pf(ok: bool) -> str:
    return "pass" if ok else "FAIL"


@dataclass(frozen=True)
class _Prepared:
    """The ``R``-independent part of an instance."""

    F: Polynomial
    K: tuple[int, ...]
    L: int
    H: int
    s: int
    T: list[int]
    JS: list[int]
    U: list[int]
    bound: Fraction
    stats: JStats


def _prepare(F: Polynomial, K: Sequence[int], L: int, H: int, s: int) -> _Prepared:
    if s < 1:
        raise ValueError("s must be at least 1")
    m, d, k = F.modulus, F.dims, F.degree
    if k < 2:
        raise ValueError("the chain needs degree k >= 2")
    if F.leading_gcd() != 1:
        raise ValueError("the chain assumes some top-degree coefficient is a unit mod m")
    G = F.translate(K) - Polynomial(m, d, {(0,) * d: L})
    stats = j_stats(s, k, d, H)
    return _Prepared(F, tuple(int(x) for x in K), int(L), H, s,
                     [int(t) for t in T_table(G, H, s, threads=1)], uset_J_table(G, stats),
                     uset_table(G, H, s), uset_bound(m, s, H, k, d), stats)


def _finish(p: _Prepared, R: int) -> ChainResult:
    F, H, s, stats = p.F, p.H, p.s, p.stats
    m = F.modulus
    M = count_MF(F, p.K, p.L, H, R, threads=1).count
    reach = sorted({z % m for z in range(-s * R, s * R + 1)})
    u_star = max(reach, key=lambda u: (p.T[u], -u))
    lhs = M ** (2 * s)
    return ChainResult(
        poly=str(F), m=m, d=F.dims, k=F.degree, s=s, H=H, R=R, K=p.K, L=p.L, M=M,
        u_star=u_star, T_star=p.T[u_star], J_sum_star=p.JS[u_star], uset_star=p.U[u_star], uset_bound=p.bound,
        J0=stats.J0, J_max_other=stats.max_other,
        link2_all=p.T == p.JS,
        box_T=lhs <= (1 + 2 * s * R) * p.T[u_star],
        link2=all(t <= j for t, j in zip(p.T, p.JS)),
        mono=stats.max_other <= stats.J0 and p.JS[u_star] <= p.U[u_star] * stats.J0,
        uset_ok=all(n <= p.bound for n in p.U),
        master=lhs <= (1 + 2 * s * R) * p.bound * stats.J0,
    )


def check_instance(F: Polynomial, K: Sequence[int], L: int, H: int, R: int, s: int) -> ChainResult:
    """Evaluate every link of the chain exactly for one instance."""
    if R < 1 or H < 1:
        raise ValueError("H and R must be at least 1")
    return _finish(_prepare(F, K, L, H, s), R)


def _resolve_R(tag: str | int, H: int, m: int) -> int:
    if isinstance(tag, int):
        return tag
    return {"H": H, "m": m}.get(tag) or int(tag)


@dataclass(frozen=True)
class CellSummary:
    d: int
    k: int
    m: int
    H: int
    R: int
    s: int
    instances: int
    box_T_fail: int
    link2_fail: int
    mono_fail: int
    uset_fail: int
    master_fail: int
    worst_box_T: float
    worst_master: float

    HEADER = "d,k,m,H,R,s,instances,box_T_fail,link2_fail,mono_fail,uset_fail,master_fail,worst_box_T,worst_master"

    @property
    def violations(self) -> int:
        return self.box_T_fail + self.link2_fail + self.mono_fail + self.uset_fail + self.master_fail

    def row(self) -> str:
        return (f"{self.d},{self.k},{self.m},{self.H},{self.R},{self.s},{self.instances},{self.box_T_fail},"
                f"{self.link2_fail},{self.mono_fail},{self.uset_fail},{self.master_fail},"
                f"{self.worst_box_T:.6f},{self.worst_master:.6e}")


def run_cell(d: int, k: int, m: int, H: int, s: int, R_tags: Sequence[str | int], seed: int,
             polys: int = POLYS_PER_CELL) -> list[CellSummary]:
    """All ``R`` values of one ``(d, k, m, H, s)`` cell share the same random instances."""
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(d, k, m, H, s)))
    instances = []
    for _ in range(polys):
        F = random_polynomial(k, d, m, rng)
        K = tuple(int(x) for x in rng.integers(0, m, size=d))
        L = int(rng.integers(0, m))
        instances.append((F, K, L))
    prepared = [_prepare(F, K, L, H, s) for F, K, L in instances]
    out = []
    for tag in R_tags:
        R = _resolve_R(tag, H, m)
        res = [_finish(p, R) for p in prepared]
        out.append(CellSummary(
            d, k, m, H, R, s, len(res),
            sum(not r.box_T for r in res), sum(not r.link2 for r in res), sum(not r.mono for r in res),
            sum(not r.uset_ok for r in res), sum(not r.master for r in res),
            max(r.box_T_ratio for r in res), max(r.master_ratio for r in res),
        ))
    return out


@dataclass
class ChainReport:
    cells: list[CellSummary]
    seed: int

    @property
    def instances(self) -> int:
        return sum(c.instances for c in self.cells)

    @property
    def violations(self) -> int:
        return sum(c.violations for c in self.cells)

    def failing(self) -> list[CellSummary]:
        return [c for c in self.cells if c.violations]

    def to_text(self) -> str:
        lines = [f"# chain seed={self.seed} cells={len(self.cells)} instances={self.instances} "
                 f"violations={self.violations}", CellSummary.HEADER]
        lines += [c.row() for c in self.cells]
        return "\n".join(lines) + "\n"


def run_grid(grid: dict | None = None, seed: int = 0, polys: int = POLYS_PER_CELL,
             threads: int | None = None) -> ChainReport:
    """Run the chain over a parameter grid; rows come back in canonical grid order."""
    g = dict(DEFAULT_GRID)
    g.update(grid or {})
    for key in ("d", "k", "m", "H", "s", "R"):
        if not g[key]:
            raise ValueError(f"grid axis {key!r} is empty")
    if min(g["s"]) < 1:
        raise ValueError("s must be at least 1")
    cells = list(itertools.product(g["d"], g["k"], g["m"], g["H"], g["s"]))
    # warm the per-(s,k,d,H) cache serially so worker threads only read it
    for s, k, d, H in sorted({(s, k, d, H) for d, k, _, H, s in cells}):
        j_stats(s, k, d, H)
    results = parallel.pmap(lambda c: run_cell(*c, g["R"], seed, polys), cells, threads)
    return ChainReport([row for rows in results for row in rows], seed)
