"""Anchored dyadic cube decomposition of a well-shaped set.

Cubes of level ``j`` are ``prod [a_i + u_i/j, a_i + (u_i+1)/j]`` for integer
offsets ``u`` and a fixed anchor ``a`` with irrational-looking coordinates.
For depth ``M`` put ``eps = 2 sqrt(d) / 2^M`` and ``Omega_eps = Omega`` plus
its outer shell. ``C(j)`` is the set of level-``j`` cubes inside
``Omega_eps``; ``B_1 = C(2)`` and ``B_i`` holds the cubes of ``C(2^i)`` whose
parent is not in ``C(2^(i-1))``. Together the ``B_i`` cover ``Omega``.

A cube that sticks out of the unit cube counts as inside ``Omega_eps`` when
its clipped closure does; its identity stays the full grid cube.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import parallel
from .regions import Region

PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29)
GUARD_BITS = 32
MAX_DEPTH = 12
MAX_DIMS = 4


class AnchorError(ValueError):
    """Anchor precision too low, or a residue point sits on a cube face."""


class CoverageError(AssertionError):
    """A sampled point of the region is not covered; the construction is broken."""

    def __init__(self, report: CoverReport):
        super().__init__(f"{report.uncovered} of {report.samples} sampled points uncovered")
        self.report = report


@dataclass(frozen=True)
class Anchor:
    """Grid offset ``a``; coordinates are dyadic truncations of ``sqrt(p)/4``."""

    coords: tuple[Fraction, ...]
    p_bits: int = 128

    @classmethod
    def default(cls, d: int, p_bits: int = 128) -> Anchor:
        if d > len(PRIMES):
            raise AnchorError(f"default anchor supports d <= {len(PRIMES)}")
        return cls(tuple(Fraction(math.isqrt(p << (2 * p_bits)), 4 << p_bits) for p in PRIMES[:d]), p_bits)

    @property
    def dims(self) -> int:
        return len(self.coords)

    def floats(self) -> np.ndarray:
        return np.array([float(a) for a in self.coords])

    def require_precision(self, j_max: int, m: int = 1) -> None:
        need = math.log2(max(j_max, 1) * max(m, 1)) + GUARD_BITS
        if self.p_bits <= need:
            raise AnchorError(f"anchor has {self.p_bits} bits, need more than {need:.1f} for j={j_max}, m={m}")

    def umin(self, j: int) -> np.ndarray:
        """Smallest offset per axis whose level-``j`` cube meets ``[0,1]``."""
        return np.array([math.ceil(-j * a) - 1 for a in self.coords], dtype=np.int64)

    def check_points(self, m: int, levels: Sequence[int]) -> float:
        """Assert no residue point ``x/m`` is within ``2^(-p_bits/2)`` of a face.

        Returns the smallest observed distance.
        """
        tol_bits = self.p_bits // 2
        worst = math.inf
        for a in self.coords:
            A, D = a.numerator, a.denominator
            den = m * D
            for j in levels:
                for x in range(m):
                    r = (j * x * D - j * A * m) % den
                    near = min(r, den - r)
                    if near << tol_bits < den * j:
                        raise AnchorError(f"residue point {x}/{m} lies on a level-{j} face")
                    worst = min(worst, near / (den * j))
        return worst


@dataclass(frozen=True)
class Cube:
    level: int
    offsets: tuple[int, ...]

    def bounds(self, anchor: Anchor) -> list[tuple[Fraction, Fraction]]:
        j = self.level
        return [(a + Fraction(u, j), a + Fraction(u + 1, j)) for a, u in zip(anchor.coords, self.offsets)]

    @property
    def side(self) -> Fraction:
        return Fraction(1, self.level)

    def diameter(self) -> float:
        return math.sqrt(len(self.offsets)) / self.level

    def contains_cube(self, other: Cube, anchor: Anchor) -> bool:
        return all(lo <= lo2 and hi2 <= hi for (lo, hi), (lo2, hi2) in zip(self.bounds(anchor), other.bounds(anchor)))


def grid_cubes(j: int, anchor: Anchor) -> list[Cube]:
    """All level-``j`` cubes meeting ``[0,1]^d``, ordered by offsets."""
    if j < 1:
        raise ValueError("level must be positive")
    anchor.require_precision(j)
    lo = anchor.umin(j)
    ranges = [range(int(u), int(u) + j + 1) for u in lo]
    return [Cube(j, tuple(u)) for u in itertools.product(*ranges)]


@dataclass
class Level:
    """Cubes of ``C(j)``: ``mask[idx]`` is true for offsets ``umin + idx``."""

    j: int
    umin: np.ndarray
    mask: np.ndarray
    certificate: str

    @property
    def count(self) -> int:
        return int(np.count_nonzero(self.mask))

    def clipped_volumes(self, anchor: Anchor) -> np.ndarray:
        """Volume of each cube intersected with the unit cube, same shape as ``mask``."""
        vol = np.ones((), dtype=float)
        for e in _edge_coords(self.j, anchor):
            vol = np.multiply.outer(vol, np.diff(e))
        return vol

    def offsets(self) -> np.ndarray:
        return np.argwhere(self.mask).astype(np.int64) + self.umin

    def cubes(self) -> list[Cube]:
        return [Cube(self.j, tuple(int(v) for v in row)) for row in self.offsets()]


def _edge_coords(j: int, anchor: Anchor) -> list[np.ndarray]:
    out = []
    for a, u0 in zip(anchor.coords, anchor.umin(j)):
        e = np.array([float(a + Fraction(int(u0) + t, j)) for t in range(j + 2)])
        out.append(np.clip(e, 0.0, 1.0))
    return out


def inner_level(j: int, anchor: Anchor, region: Region, eps: float, threads: int | None = None) -> Level:
    """``C(j)``: level-``j`` cubes whose clipped closure lies in ``Omega_eps``.

    Convex regions are decided on cube vertices. Other regions are sampled on
    a ``refinement``-fold lattice through each cube, which may accept a cube
    that is not fully inside.
    """
    d = region.dims
    if anchor.dims != d:
        raise ValueError("anchor and region dimensions differ")
    anchor.require_precision(j)
    q = 1 if region.convex else max(1, int(getattr(region, "refinement", 4)))
    cert = "vertex" if region.convex else "sampled"
    axes = []
    for e in _edge_coords(j, anchor):
        t = np.arange(q) / q
        fine = (e[:-1, None] + t[None, :] * (e[1:] - e[:-1])[:, None]).ravel()
        axes.append(np.append(fine, e[-1]))

    use_dist = region.has_distance
    if not use_dist:
        cert = "membership"
    rest = np.stack(np.meshgrid(*axes[1:], indexing="ij"), axis=-1).reshape(-1, d - 1) if d > 1 else np.zeros((1, 0))

    def slab(x0: float) -> np.ndarray:
        pts = np.hstack([np.full((len(rest), 1), x0), rest])
        if use_dist:
            ok = region.distance(pts, cap=eps) <= eps
        else:
            ok = region.contains_many(pts)
        return ok.reshape([len(a) for a in axes[1:]])

    V = np.stack(parallel.pmap(slab, list(axes[0]), threads), axis=0)
    mask = np.ones((j + 1,) * d, dtype=bool)
    for t in itertools.product(range(q + 1), repeat=d):
        mask &= V[tuple(slice(ti, ti + q * j + 1, q) for ti in t)]
    return Level(j, anchor.umin(j), mask, cert)


def inner_cubes(j: int, anchor: Anchor, region: Region, eps: float) -> list[Cube]:
    return inner_level(j, anchor, region, eps).cubes()


@dataclass
class Cover:
    region: Region
    M: int
    eps: float
    anchor: Anchor
    levels: list[Level]
    B: list[np.ndarray]
    B_masks: list[np.ndarray] = field(repr=False)

    @property
    def dims(self) -> int:
        return self.region.dims

    def count_B(self) -> list[int]:
        return [len(b) for b in self.B]

    def count_C(self) -> list[int]:
        return [lv.count for lv in self.levels]

    def cubes(self, i: int) -> list[Cube]:
        j = 2**i
        return [Cube(j, tuple(int(v) for v in row)) for row in self.B[i - 1]]

    def export(self) -> str:
        """Plain-text export: header, per-level summary rows, then one row per cube."""
        d = self.dims
        lines = [
            "# polycong cover v1",
            f"# region {self.region.describe()}",
            f"# d {d} M {self.M} eps {self.eps!r}",
            f"# anchor p_bits {self.anchor.p_bits} " + " ".join(repr(float(a)) for a in self.anchor.coords),
            "summary,i,j,count_C,count_B,ratio_B",
        ]
        for i, (lv, b) in enumerate(zip(self.levels, self.B), start=1):
            lines.append(f"summary,{i},{lv.j},{lv.count},{len(b)},{len(b) / 2 ** (i * (d - 1)):.6f}")
        lines.append("cube,i,j," + ",".join(f"u{v + 1}" for v in range(d)) + ",certificate")
        for i, (lv, b) in enumerate(zip(self.levels, self.B), start=1):
            for row in b:
                lines.append(f"cube,{i},{lv.j}," + ",".join(str(int(v)) for v in row) + f",{lv.certificate}")
        return "\n".join(lines) + "\n"


def build_cover(region: Region, M: int, anchor: Anchor | None = None, m: int | None = None,
                threads: int | None = None) -> Cover:
    """Dyadic families ``B_1..B_M`` for ``region`` with ``eps = 2 sqrt(d) / 2^M``.

    When ``m`` is given the anchor is checked against every residue point
    ``x/m`` at every level used.
    """
    d = region.dims
    if M < 1:
        raise ValueError("depth M must be at least 1")
    if M > MAX_DEPTH or d > MAX_DIMS:
        raise ValueError(f"cover limited to M <= {MAX_DEPTH}, d <= {MAX_DIMS}")
    anchor = anchor or Anchor.default(d)
    anchor.require_precision(2**M, m or 1)
    if m is not None:
        anchor.check_points(m, [2**i for i in range(1, M + 1)])
    eps = 2 * math.sqrt(d) / 2**M
    levels = [inner_level(2**i, anchor, region, eps, threads) for i in range(1, M + 1)]
    B = [levels[0].offsets()]
    B_masks = [levels[0].mask.copy()]
    for i in range(2, M + 1):
        child, parent = levels[i - 1], levels[i - 2]
        idx = []
        for ax in range(d):
            u = child.umin[ax] + np.arange(child.j + 1)
            p = np.floor_divide(u, 2) - parent.umin[ax]
            if p.min() < 0 or p.max() > parent.j:
                raise AssertionError("parent offset outside the coarser grid")
            idx.append(p)
        covered_by_parent = parent.mask[np.ix_(*idx)]
        bm = child.mask & ~covered_by_parent
        B_masks.append(bm)
        B.append(np.argwhere(bm).astype(np.int64) + child.umin)
    return Cover(region, M, eps, anchor, levels, B, B_masks)


@dataclass(frozen=True)
class CoverReport:
    M: int
    dims: int
    samples: int
    uncovered: int
    count_C: tuple[int, ...]
    count_B: tuple[int, ...]
    ratios: tuple[float, ...]
    discrepancy: tuple[float, ...]
    mu: float
    mu_eps: float
    mu_eps_error: float
    sum_B_volume: float
    sum_B_nominal: float
    certificate: str

    @property
    def coverage(self) -> float:
        return 1.0 - self.uncovered / self.samples if self.samples else 1.0

    def to_text(self) -> str:
        lines = [
            f"M={self.M} d={self.dims} samples={self.samples} uncovered={self.uncovered} "
            f"coverage={100 * self.coverage:.4f}% certificate={self.certificate}",
            f"mu={self.mu:.10f} mu_eps={self.mu_eps:.10f}+-{self.mu_eps_error:.3g} "
            f"sum_B_vol={self.sum_B_volume:.10f} sum_B_nominal={self.sum_B_nominal:.10f}",
            "i,j,count_C,count_B,ratio_B,discrepancy_C",
        ]
        for i in range(self.M):
            lines.append(f"{i + 1},{2 ** (i + 1)},{self.count_C[i]},{self.count_B[i]},"
                         f"{self.ratios[i]:.6f},{self.discrepancy[i]:.6f}")
        return "\n".join(lines) + "\n"


def sample_region(region: Region, n: int, seed: int) -> np.ndarray:
    """``n`` uniform points of ``region`` by rejection from its bounding box."""
    lo, hi = region.bbox()
    ss = np.random.SeedSequence(seed)
    got: list[np.ndarray] = []
    total = 0
    for child in itertools.count():
        # spawn() is stateful: the k-th call always yields the k-th child seed
        rng = np.random.default_rng(ss.spawn(1)[0])
        pts = lo + (hi - lo) * rng.random((1 << 16, region.dims))
        pts = pts[region.contains_many(pts)]
        got.append(pts)
        total += len(pts)
        if total >= n:
            break
        if child > 10_000:
            raise RuntimeError("region too thin to sample")
    return np.vstack(got)[:n]


def verify_cover(cover: Cover, region: Region | None = None, sample_budget: int = 100_000, seed: int = 0,
                 shell_budget: int = 1_000_000, strict: bool = True) -> CoverReport:
    """Coverage on sampled points of the region, per-level counts and discrepancies.

    Raises :class:`CoverageError` on any uncovered point when ``strict``.
    """
    region = region or cover.region
    d = region.dims
    pts = sample_region(region, sample_budget, seed) if sample_budget else np.zeros((0, d))
    a = cover.anchor.floats()
    covered = np.zeros(len(pts), dtype=bool)
    for lv, bm in zip(cover.levels, cover.B_masks):
        idx = np.floor((pts - a) * lv.j).astype(np.int64) - lv.umin
        ok = np.all((idx >= 0) & (idx <= lv.j), axis=1)
        hit = np.zeros(len(pts), dtype=bool)
        hit[ok] = bm[tuple(idx[ok].T)]
        covered |= hit
    mu = region.measure(shell_budget, seed).value
    shell = region.shell_measure(cover.eps, "outer", shell_budget, seed)
    count_C = tuple(cover.count_C())
    count_B = tuple(cover.count_B())
    ratios = tuple(b / 2 ** (i * (d - 1)) for i, b in enumerate(count_B, start=1))
    disc = tuple(abs(c - lv.j**d * mu) / lv.j ** (d - 1) for c, lv in zip(count_C, cover.levels))
    sum_nominal = sum(b / 2 ** (i * d) for i, b in enumerate(count_B, start=1))
    sum_vol = sum(float(np.sum(lv.clipped_volumes(cover.anchor)[bm])) for lv, bm in zip(cover.levels, cover.B_masks))
    report = CoverReport(
        cover.M, d, len(pts), int(np.count_nonzero(~covered)), count_C, count_B, ratios, disc,
        mu, mu + shell.value, shell.error_bound, sum_vol, sum_nominal, cover.levels[0].certificate,
    )
    if strict and report.uncovered:
        raise CoverageError(report)
    return report
