"""Exact solution counts for polynomial congruences.

Everything here is exhaustive enumeration at desk scale:

* ``count_NF``  residue points ``x`` in ``{0..m-1}^d`` with ``F(x) = 0`` and ``x/m`` in a region
* ``count_MF``  pairs ``(x, y)`` in a box times an interval with ``F(x) = y``
* ``count_T``   ``2s``-tuples with ``sum_{j<=s} F(x_j) - sum_{j>s} F(x_j) = u``
* ``count_J``   ``2s``-tuples in ``[1,H]^d`` with a prescribed vector of power-sum differences

All work is split into chunks whose boundaries depend only on the problem,
so totals do not depend on the number of threads.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

import numpy as np

from . import _kernels, parallel
from .poly import MultiIndex, Polynomial, index_count, iter_multiindices, terms_on_grid, weight, weight_sum
from .regions import Region

GRID_CHUNK = 1 << 20
DIRECT_BUDGET = 10**8
TABLE_BUDGET = 10**7
NF_BUDGET = 10**9


class BudgetError(RuntimeError):
    """The requested enumeration is larger than the configured cap."""


@dataclass(frozen=True)
class CountResult:
    count: int
    domain: dict[str, Any]
    elapsed: float = field(default=0.0, compare=False)

    def record(self) -> dict[str, Any]:
        return {**self.domain, "count": self.count}


def _finish(count: int, domain: dict[str, Any], t0: float) -> CountResult:
    return CountResult(int(count), domain, time.perf_counter() - t0)


# -- N_F over a region ------------------------------------------------------

def _residue_axis(lo: float, hi: float, m: int) -> np.ndarray:
    # one extra point on each side absorbs float rounding; membership is exact
    a = max(0, math.floor(lo * m) - 1)
    b = min(m - 1, math.ceil(hi * m) + 1)
    return np.arange(a, b + 1, dtype=np.int64)


def solvable_variable(F: Polynomial) -> int | None:
    """Index of a variable that occurs only as ``c * x_v`` with ``c`` a unit mod m."""
    for v in range(F.dims):
        lin = tuple(1 if t == v else 0 for t in range(F.dims))
        c = F.coeff(lin)
        if not c or math.gcd(c, F.modulus) != 1:
            continue
        if all(e[v] == 0 or e == lin for e, _ in F.terms):
            return v
    return None


def count_NF(F: Polynomial, region: Region, *, threads: int | None = None, budget: int = NF_BUDGET,
             solve: bool = True) -> CountResult:
    """``#{x in {0..m-1}^d : F(x) = 0 mod m, x/m in region}``.

    When some variable enters only linearly with a unit coefficient it is
    solved for, so only ``m^(d-1)`` points are enumerated (``solve=False``
    forces the full scan).
    """
    t0 = time.perf_counter()
    if F.dims != region.dims:
        raise ValueError(f"polynomial has {F.dims} variables, region has dimension {region.dims}")
    m, d = F.modulus, F.dims
    lo, hi = region.bbox()
    axes = [_residue_axis(float(a), float(b), m) for a, b in zip(lo, hi)]
    v = solvable_variable(F) if solve else None
    domain = {"quantity": "N_F", "poly": str(F), "m": m, "d": d, "region": region.describe()}

    if v is None:
        free = list(range(d))
        rest_terms = F.terms
    else:
        free = [t for t in range(d) if t != v]
        lin = tuple(1 if t == v else 0 for t in range(d))
        inv = pow(-F.coeff(lin), -1, m)
        rest_terms = tuple((tuple(e[t] for t in free), c * inv % m) for e, c in F.terms if e != lin)
        target = axes[v]
    free_axes = [axes[t] for t in free]
    total_points = math.prod(len(a) for a in free_axes)
    if total_points > budget:
        raise BudgetError(f"N_F enumeration needs {total_points} points, budget {budget}")

    if not free_axes:  # d == 1 and the variable was solved for
        sol = (-F.coeff((0,)) * pow(F.coeff((1,)), -1, m)) % m
        pts = np.array([[sol]], dtype=np.int64)
        keep = (pts[:, 0] >= target[0]) & (pts[:, 0] <= target[-1])
        return _finish(int(np.count_nonzero(region.contains_residues(pts[keep], m))), domain, t0)

    inner = math.prod(len(a) for a in free_axes[1:])
    step = max(1, GRID_CHUNK // max(inner, 1))
    chunks = parallel.chunk_ranges(0, len(free_axes[0]), step)

    def run(bounds: tuple[int, int]) -> int:
        a, b = bounds
        sub = [free_axes[0][a:b]] + free_axes[1:]
        vals = terms_on_grid(rest_terms, sub, m)
        if v is None:
            idx = np.argwhere(vals == 0)
            pts = np.column_stack([sub[t][idx[:, t]] for t in range(len(sub))]) if len(idx) else np.zeros((0, d), np.int64)
        else:
            # solved variable: x_v = inv * (rest) mod m, kept if inside its axis range
            xs = vals.ravel()
            ok = (xs >= target[0]) & (xs <= target[-1])
            idx = np.array(np.unravel_index(np.flatnonzero(ok), vals.shape)).T
            cols = [sub[t][idx[:, t]] for t in range(len(sub))]
            cols.insert(v, xs[ok])
            pts = np.column_stack(cols) if len(idx) else np.zeros((0, d), np.int64)
        if not len(pts):
            return 0
        return int(np.count_nonzero(region.contains_residues(pts, m)))

    return _finish(sum(parallel.pmap(run, chunks, threads)), domain, t0)


# -- M_F over a box ---------------------------------------------------------

def _box_histogram(F: Polynomial, axes: Sequence[np.ndarray], threads: int | None) -> np.ndarray:
    """Histogram of ``F(x) mod m`` over the tensor grid ``axes``."""
    m = F.modulus
    inner = math.prod(len(a) for a in axes[1:])
    step = max(1, GRID_CHUNK // max(inner, 1))

    def run(bounds):
        a, b = bounds
        vals = terms_on_grid(F.terms, [axes[0][a:b]] + list(axes[1:]), m)
        return np.bincount(vals.ravel(), minlength=m)

    parts = parallel.pmap(run, parallel.chunk_ranges(0, len(axes[0]), step), threads)
    return np.sum(parts, axis=0, dtype=np.int64)


def count_MF(F: Polynomial, K: Sequence[int], L: int, H: float, R: float, *,
             threads: int | None = None) -> CountResult:
    """Pairs ``(x, y)`` with ``x in prod [K_i+1, K_i+H]``, ``y in [L+1, L+R]`` and ``F(x) = y mod m``."""
    t0 = time.perf_counter()
    H, R = int(math.floor(H)), int(math.floor(R))
    if H < 1 or R < 1:
        raise ValueError("H and R must be at least 1")
    if len(K) != F.dims:
        raise ValueError("need one offset per variable")
    m = F.modulus
    axes = [np.arange(k + 1, k + H + 1, dtype=np.int64) for k in K]
    hist = _box_histogram(F, axes, threads)
    res = np.arange(m, dtype=np.int64)
    per_residue = (L + R - res) // m - (L - res) // m
    count = sum(int(a) * int(b) for a, b in zip(hist, per_residue))
    domain = {"quantity": "M_F", "poly": str(F), "m": m, "d": F.dims, "K": list(map(int, K)), "L": int(L), "H": H, "R": R}
    return _finish(count, domain, t0)


# -- lambda vectors and J ---------------------------------------------------

@dataclass(frozen=True)
class LambdaVector:
    """Power-sum differences ``lambda_i`` for ``1 <= |i| <= k``, in ``iter_multiindices`` order."""

    k: int
    d: int
    values: tuple[int, ...]

    @property
    def indices(self) -> list[MultiIndex]:
        return iter_multiindices(self.k, self.d)

    def as_dict(self) -> dict[MultiIndex, int]:
        return dict(zip(self.indices, self.values))

    def is_zero(self) -> bool:
        return not any(self.values)

    def within_range(self, s: int, H: int) -> bool:
        return all(abs(v) <= s * H ** weight(i) for i, v in zip(self.indices, self.values))

    @classmethod
    def zero(cls, k: int, d: int) -> LambdaVector:
        return cls(k, d, (0,) * index_count(k, d))


def lambda_vector(xs: Sequence[Sequence[int]], k: int) -> LambdaVector:
    """``lambda_i = sum_{j<=s} x_j^i - sum_{j>s} x_j^i`` for a ``2s``-tuple of points."""
    pts = [tuple(int(c) for c in p) for p in xs]
    if not pts or len(pts) % 2:
        raise ValueError("need an even, nonzero number of points")
    d = len(pts[0])
    if any(len(p) != d for p in pts):
        raise ValueError("points have different dimensions")
    s = len(pts) // 2
    vals = []
    for i in iter_multiindices(k, d):
        mono = [math.prod(c ** e for c, e in zip(p, i)) for p in pts]
        vals.append(sum(mono[:s]) - sum(mono[s:]))
    return LambdaVector(k, d, tuple(vals))


def _as_target(U: Any, k: int, d: int) -> np.ndarray:
    r = index_count(k, d)
    if U is None or (isinstance(U, int) and U == 0):
        return np.zeros(r, dtype=np.int64)
    if isinstance(U, LambdaVector):
        if (U.k, U.d) != (k, d):
            raise ValueError("target lambda vector has the wrong (k, d)")
        U = U.values
    U = np.asarray(U, dtype=np.int64).ravel()
    if len(U) != r:
        raise ValueError(f"target needs {r} entries, got {len(U)}")
    return U


def monomial_table(k: int, d: int, H: int) -> np.ndarray:
    """Row ``p`` holds ``x^i`` for the ``p``-th point of ``[1,H]^d`` (lexicographic), columns by index."""
    grid = np.array(list(itertools.product(range(1, H + 1), repeat=d)), dtype=np.int64).reshape(-1, d)
    cols = [np.prod(grid ** np.array(i, dtype=np.int64), axis=1) for i in iter_multiindices(k, d)]
    return np.column_stack(cols) if cols else np.zeros((len(grid), 0), np.int64)


def _check_params(s: int, k: int, d: int, H: int) -> None:
    if s < 1 or k < 1 or d < 1 or H < 1:
        raise ValueError("need s, k, d, H >= 1")
    # largest lambda entry must fit comfortably in int64
    if s * H ** k >= 1 << 60:
        raise OverflowError("power sums exceed int64")


def stuple_sums(k: int, d: int, H: int, s: int) -> np.ndarray:
    """Positive-part signatures of all ``H^(sd)`` ordered ``s``-tuples (with repetition)."""
    P = monomial_table(k, d, H)
    S = P
    for _ in range(s - 1):
        S = (S[:, None, :] + P[None, :, :]).reshape(-1, P.shape[1])
    return S


def count_J(s: int, k: int, d: int, U: Any, H: int, *, budget: int = DIRECT_BUDGET,
            threads: int | None = None) -> CountResult:
    """``J_{s,k,d}(U, H)`` by checking every ordered pair of ``s``-tuples."""
    t0 = time.perf_counter()
    _check_params(s, k, d, H)
    n = H ** (s * d)
    if n * n > budget:
        raise BudgetError(f"direct J enumeration needs {n * n} tuples, budget {budget}")
    target = _as_target(U, k, d)
    S = stuple_sums(k, d, H, s)
    step = max(1, (1 << 22) // n)
    parts = parallel.pmap(lambda ab: _kernels.count_matching_pairs(S, target, ab[0], ab[1]),
                          parallel.chunk_ranges(0, n, step), threads)
    domain = {"quantity": "J", "method": "direct", "s": s, "k": k, "d": d, "H": H, "U": target.tolist()}
    return _finish(sum(int(p) for p in parts), domain, t0)


class _KeyCodec:
    """Mixed-radix codes for integer rows in the box ``[lo, hi]``.

    Coordinates are packed greedily into int64 words. A single word gives a
    plain int64 key; several words give a structured key that sorts and
    searches lexicographically.
    """

    def __init__(self, lo: np.ndarray, hi: np.ndarray):
        self.lo = np.asarray(lo, dtype=np.int64)
        span = [int(b - a + 1) for a, b in zip(lo, hi)]
        if max(span) >= 1 << 62:
            raise OverflowError("signature coordinate range too large for int64 keys")
        groups: list[list[int]] = [[]]
        size = 1
        for t, w in enumerate(span):
            if size * w >= 1 << 62:
                groups.append([])
                size = 1
            groups[-1].append(t)
            size *= w
        self.groups = [np.array(g) for g in groups]
        self.radix = [np.array([math.prod(span[u] for u in g[i + 1:]) for i in range(len(g))], dtype=np.int64)
                      for g in groups]
        self.dtype = None if len(groups) == 1 else np.dtype([(f"w{i}", np.int64) for i in range(len(groups))])

    def encode(self, rows: np.ndarray) -> np.ndarray:
        rel = rows - self.lo
        words = [(rel[:, g] * rad).sum(axis=1) for g, rad in zip(self.groups, self.radix)]
        if self.dtype is None:
            return words[0]
        out = np.empty(len(rows), dtype=self.dtype)
        for i, w in enumerate(words):
            out[f"w{i}"] = w
        return out

    def decode(self, keys: np.ndarray) -> np.ndarray:
        out = np.empty((len(keys), len(self.lo)), dtype=np.int64)
        for i, (g, rad) in enumerate(zip(self.groups, self.radix)):
            rem = (keys if self.dtype is None else keys[f"w{i}"]).copy()
            for t, base in zip(g, rad):
                out[:, t], rem = np.divmod(rem, base)
        return out + self.lo


@dataclass
class SignatureTable:
    """Distinct ``s``-tuple signatures ``v`` (rows of ``sigs``) with multiplicities ``c_v``."""

    s: int
    k: int
    d: int
    H: int
    sigs: np.ndarray
    counts: np.ndarray
    keys: np.ndarray
    codec: _KeyCodec
    lo: np.ndarray
    hi: np.ndarray

    def lookup(self, rows: np.ndarray) -> np.ndarray:
        """Multiplicity of each row of ``rows`` (0 when absent)."""
        ok = np.all((rows >= self.lo) & (rows <= self.hi), axis=1)
        out = np.zeros(len(rows), dtype=np.int64)
        if ok.any():
            key = self.codec.encode(rows[ok])
            pos = np.minimum(np.searchsorted(self.keys, key), len(self.keys) - 1)
            hit = self.keys[pos] == key
            vals = np.where(hit, self.counts[pos], 0)
            out[ok] = vals
        return out

    def J(self, U: np.ndarray) -> int:
        c_shift = self.lookup(self.sigs - U)
        return int(np.dot(self.counts.astype(object), c_shift.astype(object)))

    def J0(self) -> int:
        return int(np.dot(self.counts.astype(object), self.counts.astype(object)))


def _merge(keys: np.ndarray, weights: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    order = np.argsort(keys, kind="stable")
    keys, weights = keys[order], weights[order]
    starts = np.flatnonzero(np.r_[True, keys[1:] != keys[:-1]])
    return keys[starts], np.add.reduceat(weights, starts)


def signature_table(s: int, k: int, d: int, H: int, *, budget: int = TABLE_BUDGET,
                    threads: int | None = None) -> SignatureTable:
    """Iterated sumset of the monomial table, keyed by mixed-radix integer codes.

    Each step adds one more point to every distinct partial signature; the
    candidate rows are split into fixed partitions, deduplicated per partition
    and then merged.
    """
    _check_params(s, k, d, H)
    P = monomial_table(k, d, H)
    r = P.shape[1]
    pmin, pmax = P.min(axis=0), P.max(axis=0)
    lo, hi = s * pmin, s * pmax
    codec = _KeyCodec(lo, hi)

    sigs = np.zeros((1, r), dtype=np.int64)
    counts = np.ones(1, dtype=np.int64)
    for t in range(1, s + 1):
        rows = len(sigs) * len(P)
        if rows > budget:
            raise BudgetError(f"signature table step needs {rows} entries, budget {budget}")
        step = max(1, (1 << 20) // len(P))
        # shift by the final lower corner so every partial sum codes uniquely
        shift = (s - t) * pmin

        def part(ab, sigs=sigs, counts=counts, shift=shift):
            a, b = ab
            cand = (sigs[a:b, None, :] + P[None, :, :]).reshape(-1, r)
            w = np.repeat(counts[a:b], len(P))
            return _merge(codec.encode(cand + shift), w)

        parts = parallel.pmap(part, parallel.chunk_ranges(0, len(sigs), step), threads)
        keys, counts = _merge(np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts]))
        sigs = codec.decode(keys) - shift
    return SignatureTable(s, k, d, H, sigs, counts, codec.encode(sigs), codec, lo, hi)


def count_J_convolution(s: int, k: int, d: int, U: Any, H: int, *, budget: int = TABLE_BUDGET,
                        threads: int | None = None, table: SignatureTable | None = None) -> CountResult:
    """``J(U, H) = sum_v c_v c_{v-U}`` over distinct ``s``-tuple signatures ``v``."""
    t0 = time.perf_counter()
    target = _as_target(U, k, d)
    if table is None:
        table = signature_table(s, k, d, H, budget=budget, threads=threads)
    elif (table.s, table.k, table.d, table.H) != (s, k, d, H):
        raise ValueError("signature table built for different parameters")
    count = table.J0() if not target.any() else table.J(target)
    domain = {"quantity": "J", "method": "convolution", "s": s, "k": k, "d": d, "H": H, "U": target.tolist()}
    return _finish(count, domain, t0)


# -- T(u, H) ----------------------------------------------------------------

def _cyclic_convolve(a: np.ndarray, b: np.ndarray, m: int) -> np.ndarray:
    out = np.zeros(m, dtype=object)
    for shift in np.flatnonzero(b):
        out += np.roll(a, shift) * int(b[shift])
    return out


def T_table(F: Polynomial, H: int, s: int, *, threads: int | None = None, budget: int = NF_BUDGET) -> np.ndarray:
    """``T(u, H)`` for every residue ``u`` (object array of Python ints).

    ``h`` is the value histogram of ``F`` on ``[1,H]^d`` and ``P = h^{*s}``
    (cyclic); then ``T(u) = sum_v P(v) P(v-u)``.
    """
    if s < 1 or H < 1:
        raise ValueError("need s, H >= 1")
    if H ** F.dims > budget:
        raise BudgetError(f"histogram needs {H ** F.dims} evaluations, budget {budget}")
    m = F.modulus
    axes = [np.arange(1, H + 1, dtype=np.int64)] * F.dims
    h = _box_histogram(F, axes, threads).astype(object)
    P = h
    for _ in range(s - 1):
        P = _cyclic_convolve(P, h, m)
    Prev = P[(-np.arange(m)) % m]  # Prev[w] = P(-w)
    return _cyclic_convolve(P, Prev, m)


def count_T(F: Polynomial, u: int, H: int, s: int, *, method: str = "histogram", budget: int = DIRECT_BUDGET,
            threads: int | None = None) -> CountResult:
    """``2s``-tuples in ``[1,H]^d`` with ``sum_{j<=s} F(x_j) - sum_{j>s} F(x_j) = u mod m``.

    ``method="direct"`` pairs every ``s``-tuple with every other one.
    """
    t0 = time.perf_counter()
    m = F.modulus
    u = int(u) % m
    domain = {"quantity": "T", "method": method, "poly": str(F), "m": m, "d": F.dims, "H": int(H), "s": int(s), "u": u}
    if method == "histogram":
        return _finish(int(T_table(F, H, s, threads=threads)[u]), domain, t0)
    if method != "direct":
        raise ValueError(f"unknown method {method!r}")
    n = H ** (s * F.dims)
    if n * n > budget:
        raise BudgetError(f"direct T enumeration needs {n * n} tuples, budget {budget}")
    vals = F.grid_values([np.arange(1, H + 1, dtype=np.int64)] * F.dims).ravel()
    v = vals
    for _ in range(s - 1):
        v = (v[:, None] + vals[None, :]).ravel() % m
    step = max(1, (1 << 22) // n)
    parts = parallel.pmap(lambda ab: _kernels.count_residue_pairs(v, u, m, ab[0], ab[1]),
                          parallel.chunk_ranges(0, n, step), threads)
    return _finish(sum(int(p) for p in parts), domain, t0)


# -- the set of admissible lambda targets -----------------------------------

@dataclass(frozen=True)
class USetCount:
    """Exact size of the target set next to its closed-form bound (with ``g = 1``)."""

    exact: int
    bound: Fraction
    s: int
    H: int
    k: int
    d: int
    r: int
    K: int

    @property
    def holds(self) -> bool:
        return self.exact <= self.bound


def _uset_box(F: Polynomial, s: int, H: int) -> tuple[list[MultiIndex], list[int], list[int]]:
    k, d = F.degree, F.dims
    if k < 2:
        raise ValueError("target-set bound needs degree k >= 2")
    idx = iter_multiindices(k, d)
    beta = [F.coeff(i) for i in idx]
    ranges = [s * H ** weight(i) for i in idx]
    return idx, beta, ranges


def uset_table(F: Polynomial, H: int, s: int) -> list[int]:
    """Exact ``#U(u)`` for every residue ``u``: vectors with ``|u_i| <= sH^|i|`` and ``sum beta_i u_i = u``."""
    m = F.modulus
    _, beta, ranges = _uset_box(F, s, H)
    dist = [0] * m
    dist[0] = 1
    for b, n in zip(beta, ranges):
        step = [0] * m
        for a in range(m):
            # number of t in [-n, n] with t = a mod m
            cnt = (n - a) // m - (-n - 1 - a) // m
            if cnt:
                step[b * a % m] += cnt
        new = [0] * m
        for x, cx in enumerate(dist):
            if cx:
                for y, cy in enumerate(step):
                    if cy:
                        new[(x + y) % m] += cx * cy
        dist = new
    return dist


def uset_enumerate(F: Polynomial, u: int, H: int, s: int, *, budget: int = 10**6) -> list[tuple[int, ...]]:
    """Explicit list of the target vectors for tiny parameters."""
    m = F.modulus
    _, beta, ranges = _uset_box(F, s, H)
    size = math.prod(2 * n + 1 for n in ranges)
    if size > budget:
        raise BudgetError(f"target box has {size} vectors, budget {budget}")
    return [U for U in itertools.product(*[range(-n, n + 1) for n in ranges])
            if sum(b * x for b, x in zip(beta, U)) % m == u % m]


def uset_bound(m: int, s: int, H: int, k: int, d: int) -> Fraction:
    """``(2s+1)^(r-1) H^(K-k) (1 + (2s+1) H^k / m)`` as an exact rational."""
    r, K = index_count(k, d), weight_sum(k, d)
    return (2 * s + 1) ** (r - 1) * H ** (K - k) * (1 + Fraction((2 * s + 1) * H ** k, m))


def uset_cardinality(F: Polynomial, u: int, H: int, s: int) -> USetCount:
    if F.dims and F.degree >= 2 and F.leading_gcd() != 1:
        raise ValueError("target-set bound assumes some top-degree coefficient is a unit mod m")
    exact = uset_table(F, H, s)[int(u) % F.modulus]
    k, d = F.degree, F.dims
    return USetCount(exact, uset_bound(F.modulus, s, H, k, d), s, H, k, d, index_count(k, d), weight_sum(k, d))
