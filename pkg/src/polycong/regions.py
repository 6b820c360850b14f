"""Subsets of the unit cube: membership, measure and boundary-shell oracles.

Every region lives inside ``[0,1]^d``; points outside the cube are never
members. Membership is closed (boundary points belong to the region).

Shells follow the well-shaped condition ``mu(shell) <= C * eps``:

* outer shell: points of ``[0,1]^d`` outside the region within distance
  ``eps`` of it;
* inner shell: points of the region within distance ``eps`` of the
  complement of the region in ``R^d``. Faces on the cube frontier therefore
  count as boundary, which makes the full cube well-shaped with ``C = 2d``
  rather than ``C = 0``.

Monte-carlo estimates carry a 99% Hoeffding half-width as their error bound.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np
from scipy import integrate, optimize, spatial

from . import parallel
from ._kernels import polytope_distance

CONFIDENCE = 0.99
MC_CHUNK = 1 << 16
_AMBIGUOUS = 1e-9


def hoeffding_halfwidth(n: int, confidence: float = CONFIDENCE) -> float:
    """Two-sided Hoeffding half-width for a mean of ``n`` Bernoulli samples."""
    return math.sqrt(math.log(2.0 / (1.0 - confidence)) / (2.0 * n))


def unit_ball_volume(d: int) -> float:
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


@dataclass(frozen=True)
class MeasureEstimate:
    value: float
    error_bound: float = 0.0
    method: str = "exact"  # exact | quadrature | monte-carlo
    samples: int | None = None
    seed: int | None = None

    @property
    def upper(self) -> float:
        return self.value + self.error_bound


class RegionError(ValueError):
    pass


class ShellBudgetError(RegionError):
    """Monte-carlo budget too small to certify a shell estimate."""


def _frac(x: Any) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(str(x))


def _dec(x: Fraction) -> str:
    """Exact decimal string for a fraction with a 2^a 5^b denominator."""
    den = x.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return repr(float(x))
    digits = max(twos, fives)
    scaled = x * 10**digits
    s = str(abs(scaled.numerator)).rjust(digits + 1, "0")
    sign = "-" if x < 0 else ""
    if digits == 0:
        return sign + s
    return f"{sign}{s[:-digits]}.{s[-digits:]}".rstrip("0").rstrip(".") or "0"


def _as_points(pts: Any, d: int) -> np.ndarray:
    a = np.asarray(pts, dtype=float)
    if a.ndim == 1:
        a = a.reshape(1, -1)
    if a.shape[1] != d:
        raise ValueError(f"points have {a.shape[1]} coordinates, region has dimension {d}")
    return a


def _in_cube(pts: np.ndarray) -> np.ndarray:
    return np.all((pts >= 0.0) & (pts <= 1.0), axis=1)


def _mc_count(pred: Callable[[np.ndarray], np.ndarray], d: int, n: int, seed: int,
              threads: int | None = None) -> int:
    """Number of uniform points of ``[0,1]^d`` satisfying ``pred``.

    Chunk seeds are spawned from ``seed`` by chunk index, so the total is the
    same for any thread count.
    """
    bounds = parallel.chunk_ranges(0, n, MC_CHUNK)
    seeds = np.random.SeedSequence(seed).spawn(len(bounds))

    def run(job):
        (a, b), ss = job
        pts = np.random.default_rng(ss).random((b - a, d))
        return int(np.count_nonzero(pred(pts)))

    return sum(parallel.pmap(run, list(zip(bounds, seeds)), threads))


class Region:
    """Base class; subclasses supply membership, distances and exact formulas."""

    kind = "region"
    dims: int
    #: vertex tests decide cube containment in dilations exactly
    convex = True
    has_distance = True

    # -- membership ------------------------------------------------------

    def _inside(self, pts: np.ndarray) -> np.ndarray:
        return self._margin(pts) >= 0.0

    def _margin(self, pts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _contains_exact(self, q: Sequence[Fraction]) -> bool:
        raise NotImplementedError

    def contains_many(self, pts: Any) -> np.ndarray:
        pts = _as_points(pts, self.dims)
        return _in_cube(pts) & self._inside(pts)

    def contains(self, u: Sequence[float]) -> bool:
        if len(u) != self.dims:
            raise ValueError(f"point has {len(u)} coordinates, region has dimension {self.dims}")
        return bool(self.contains_many([list(u)])[0])

    def contains_residues(self, X: np.ndarray, m: int) -> np.ndarray:
        """Exact test of ``x / m`` in the region for integer rows ``x``."""
        X = np.asarray(X, dtype=np.int64).reshape(-1, self.dims)
        pts = X / m
        cube = np.all((X >= 0) & (X <= m), axis=1)
        margin = self._margin(pts)
        out = cube & (margin > _AMBIGUOUS)
        for row in np.flatnonzero(cube & (np.abs(margin) <= _AMBIGUOUS)):
            out[row] = self._contains_exact([Fraction(int(v), m) for v in X[row]])
        return out

    # -- geometry --------------------------------------------------------

    def bbox(self) -> tuple[np.ndarray, np.ndarray]:
        return np.zeros(self.dims), np.ones(self.dims)

    def distance(self, pts: np.ndarray, cap: float = np.inf) -> np.ndarray:
        """Distance to the region; exact whenever it does not exceed ``cap``."""
        raise NotImplementedError

    def depth(self, pts: np.ndarray) -> np.ndarray:
        """Distance from member points to the complement of the region in ``R^d`` (0 outside)."""
        raise NotImplementedError

    def exact_measure(self) -> float | None:
        return None

    def _exact_shell(self, eps: float, side: str) -> MeasureEstimate | None:
        return None

    # -- measures --------------------------------------------------------

    def measure(self, budget: int = 1_000_000, seed: int = 0, threads: int | None = None) -> MeasureEstimate:
        exact = self.exact_measure()
        if exact is not None:
            return MeasureEstimate(float(exact))
        if budget < 1:
            raise ValueError("monte-carlo measure needs budget >= 1")
        hits = _mc_count(self.contains_many, self.dims, budget, seed, threads)
        return MeasureEstimate(hits / budget, hoeffding_halfwidth(budget), "monte-carlo", budget, seed)

    def _shell_predicate(self, eps: float, side: str) -> Callable[[np.ndarray], np.ndarray]:
        if side == "outer":
            def pred(pts):
                out = ~self.contains_many(pts)
                res = np.zeros(len(pts), dtype=bool)
                if out.any():
                    res[out] = self.distance(pts[out], cap=eps) < eps
                return res
        else:
            def pred(pts):
                inside = self.contains_many(pts)
                res = np.zeros(len(pts), dtype=bool)
                if inside.any():
                    res[inside] = self.depth(pts[inside]) < eps
                return res
        return pred

    def shell_measure(self, eps: float, side: str, budget: int = 1_000_000, seed: int = 0,
                      threads: int | None = None) -> MeasureEstimate:
        """Measure of the outer (``"outer"``/``"+"``) or inner (``"inner"``/``"-"``) shell."""
        side = _norm_side(side)
        if eps <= 0:
            raise ValueError("shell width must be positive")
        exact = self._exact_shell(eps, side)
        if exact is not None:
            return exact
        hw = hoeffding_halfwidth(budget)
        if not self.has_distance and hw > eps / 10:
            raise ShellBudgetError(
                f"budget {budget} gives half-width {hw:.3g} > eps/10 = {eps / 10:.3g}; "
                "region has no distance capability"
            )
        hits = _mc_count(self._shell_predicate(eps, side), self.dims, budget, seed, threads)
        return MeasureEstimate(hits / budget, hw, "monte-carlo", budget, seed)

    # -- serialization ---------------------------------------------------

    def to_spec(self) -> dict:
        raise RegionError(f"{self.kind} regions are not serializable")

    def describe(self) -> str:
        try:
            return json.dumps(self.to_spec(), sort_keys=True, separators=(",", ":"))
        except RegionError:
            return self.kind


def _norm_side(side: str) -> str:
    if side in ("outer", "+", "plus"):
        return "outer"
    if side in ("inner", "-", "minus"):
        return "inner"
    raise ValueError(f"unknown shell side {side!r}")


# -- boxes ----------------------------------------------------------------

def _quarter_disc_area(c1: float, c2: float, eps: float) -> float:
    """Area of ``{s in [0,c1] x [0,c2] : |s| < eps}``."""
    X = min(c1, eps)
    if X <= 0 or c2 <= 0:
        return 0.0

    def G(x: float) -> float:
        return 0.5 * (x * math.sqrt(max(eps * eps - x * x, 0.0)) + eps * eps * math.asin(min(x / eps, 1.0)))

    a = min(math.sqrt(max(eps * eps - c2 * c2, 0.0)), X)
    return c2 * a + G(X) - G(a)


def _capped_ball_volume(caps: Sequence[float], eps: float) -> tuple[float, float]:
    """Volume of ``{s in prod [0, c_i] : |s| < eps}`` and an absolute error estimate."""
    t = len(caps)
    if any(c <= 0 for c in caps) or eps <= 0:
        return 0.0, 0.0
    if t == 1:
        return min(caps[0], eps), 0.0
    if t == 2:
        return _quarter_disc_area(caps[0], caps[1], eps), 0.0
    head, last = caps[:-1], caps[-1]
    val, err = integrate.quad(
        lambda z: _capped_ball_volume(head, math.sqrt(max(eps * eps - z * z, 0.0)))[0],
        0.0, min(last, eps), epsabs=1e-13, epsrel=1e-11, limit=200,
    )
    return val, err


class Box(Region):
    """Axis-parallel box ``prod [lo_i, hi_i]`` inside the unit cube."""

    kind = "box"

    def __init__(self, lo: Sequence[Any], hi: Sequence[Any]):
        if len(lo) != len(hi) or not lo:
            raise RegionError("box needs matching nonempty lo/hi")
        self.lo_q = tuple(_frac(v) for v in lo)
        self.hi_q = tuple(_frac(v) for v in hi)
        if any(not (0 <= a <= b <= 1) for a, b in zip(self.lo_q, self.hi_q)):
            raise RegionError("box must satisfy 0 <= lo <= hi <= 1")
        self.dims = len(lo)
        self.lo = np.array([float(v) for v in self.lo_q])
        self.hi = np.array([float(v) for v in self.hi_q])

    @classmethod
    def full(cls, d: int) -> Box:
        return cls([0] * d, [1] * d)

    def _margin(self, pts):
        return np.min(np.minimum(pts - self.lo, self.hi - pts), axis=1)

    def _contains_exact(self, q):
        return all(a <= v <= b for v, a, b in zip(q, self.lo_q, self.hi_q))

    def bbox(self):
        return self.lo.copy(), self.hi.copy()

    def distance(self, pts, cap=np.inf):
        pts = _as_points(pts, self.dims)
        g = np.maximum(np.maximum(self.lo - pts, pts - self.hi), 0.0)
        return np.sqrt(np.sum(g * g, axis=1))

    def depth(self, pts):
        pts = _as_points(pts, self.dims)
        return np.maximum(self._margin(pts), 0.0)

    def exact_measure(self):
        return float(math.prod(b - a for a, b in zip(self.lo_q, self.hi_q)))

    def _exact_shell(self, eps, side):
        L = [float(b - a) for a, b in zip(self.lo_q, self.hi_q)]
        if side == "inner":
            vol = math.prod(L)
            core = math.prod(max(0.0, x - 2 * eps) for x in L)
            return MeasureEstimate(vol - core)
        left = [float(a) for a in self.lo_q]
        right = [1.0 - float(b) for b in self.hi_q]
        total, err, method = 0.0, 0.0, "exact"
        d = self.dims
        for t in range(1, d + 1):
            for S in itertools.combinations(range(d), t):
                rest = math.prod(L[i] for i in range(d) if i not in S)
                if rest == 0.0:
                    continue
                for sides in itertools.product((0, 1), repeat=t):
                    caps = [left[i] if s == 0 else right[i] for i, s in zip(S, sides)]
                    v, e = _capped_ball_volume(caps, eps)
                    if t > 2 and v > 0:
                        method = "quadrature"
                    total += rest * v
                    err += rest * e
        return MeasureEstimate(total, err if method == "quadrature" else 0.0, method)

    def to_spec(self):
        if all(a == 0 for a in self.lo_q) and all(b == 1 for b in self.hi_q):
            return {"kind": "full", "dims": self.dims}
        return {"kind": "box", "lo": [_dec(v) for v in self.lo_q], "hi": [_dec(v) for v in self.hi_q]}


# -- balls and ellipsoids -------------------------------------------------

class Ball(Region):
    """Closed Euclidean ball contained in the unit cube."""

    kind = "ball"

    def __init__(self, center: Sequence[Any], radius: Any):
        self.center_q = tuple(_frac(v) for v in center)
        self.radius_q = _frac(radius)
        if self.radius_q <= 0:
            raise RegionError("ball radius must be positive")
        if any(c - self.radius_q < 0 or c + self.radius_q > 1 for c in self.center_q):
            raise RegionError("ball must lie inside the unit cube")
        self.dims = len(center)
        self.center = np.array([float(v) for v in self.center_q])
        self.radius = float(self.radius_q)

    def _margin(self, pts):
        return self.radius**2 - np.sum((pts - self.center) ** 2, axis=1)

    def _contains_exact(self, q):
        return sum((v - c) ** 2 for v, c in zip(q, self.center_q)) <= self.radius_q**2

    def bbox(self):
        return self.center - self.radius, self.center + self.radius

    def distance(self, pts, cap=np.inf):
        pts = _as_points(pts, self.dims)
        return np.maximum(np.linalg.norm(pts - self.center, axis=1) - self.radius, 0.0)

    def depth(self, pts):
        pts = _as_points(pts, self.dims)
        return np.maximum(self.radius - np.linalg.norm(pts - self.center, axis=1), 0.0)

    def exact_measure(self):
        return unit_ball_volume(self.dims) * self.radius**self.dims

    def _exact_shell(self, eps, side):
        r, d, V = self.radius, self.dims, unit_ball_volume(self.dims)
        if side == "inner":
            return MeasureEstimate(V * (r**d - max(r - eps, 0.0) ** d))
        room = min(min(c - r, 1 - c - r) for c in self.center)
        if eps <= room:
            return MeasureEstimate(V * ((r + eps) ** d - r**d))
        return None

    def to_spec(self):
        return {"kind": "ball", "center": [_dec(v) for v in self.center_q], "radius": _dec(self.radius_q)}


class Ellipsoid(Region):
    """Axis-aligned closed ellipsoid contained in the unit cube."""

    kind = "ellipsoid"

    def __init__(self, center: Sequence[Any], axes: Sequence[Any]):
        if len(center) != len(axes):
            raise RegionError("ellipsoid needs one semi-axis per coordinate")
        self.center_q = tuple(_frac(v) for v in center)
        self.axes_q = tuple(_frac(v) for v in axes)
        if any(a <= 0 for a in self.axes_q):
            raise RegionError("semi-axes must be positive")
        if any(c - a < 0 or c + a > 1 for c, a in zip(self.center_q, self.axes_q)):
            raise RegionError("ellipsoid must lie inside the unit cube")
        self.dims = len(center)
        self.center = np.array([float(v) for v in self.center_q])
        self.axes = np.array([float(v) for v in self.axes_q])

    def _margin(self, pts):
        return 1.0 - np.sum(((pts - self.center) / self.axes) ** 2, axis=1)

    def _contains_exact(self, q):
        return sum(((v - c) / a) ** 2 for v, c, a in zip(q, self.center_q, self.axes_q)) <= 1

    def bbox(self):
        return self.center - self.axes, self.center + self.axes

    def _surface_distance(self, y: np.ndarray, outside: bool) -> np.ndarray:
        # nearest surface point z_i = a_i^2 y_i / (t + a_i^2), t the root of
        # sum (a_i y_i / (t + a_i^2))^2 = 1, which is decreasing in t
        a2 = self.axes**2
        if outside:
            lo = np.zeros(len(y))
            hi = self.axes.max() * np.linalg.norm(y, axis=1) + 1e-300
        else:
            lo = np.full(len(y), -a2.min() * (1 - 1e-15))
            hi = np.zeros(len(y))

        def f(t):
            return np.sum((self.axes * y / (t[:, None] + a2)) ** 2, axis=1) - 1.0

        for _ in range(200):
            mid = 0.5 * (lo + hi)
            big = f(mid) > 0
            lo = np.where(big, mid, lo)
            hi = np.where(big, hi, mid)
        t = 0.5 * (lo + hi)
        z = a2 * y / (t[:, None] + a2)
        return np.linalg.norm(y - z, axis=1)

    def distance(self, pts, cap=np.inf):
        pts = _as_points(pts, self.dims)
        y = np.abs(pts - self.center)
        out = np.zeros(len(pts))
        outside = self._margin(pts) < 0
        if outside.any():
            out[outside] = self._surface_distance(y[outside], True)
        return out

    def depth(self, pts):
        pts = _as_points(pts, self.dims)
        y = np.abs(pts - self.center)
        out = np.zeros(len(pts))
        inside = self._margin(pts) >= 0
        if inside.any():
            out[inside] = self._surface_distance(y[inside], False)
        return out

    def exact_measure(self):
        return unit_ball_volume(self.dims) * float(np.prod(self.axes))

    def to_spec(self):
        return {"kind": "ellipsoid", "center": [_dec(v) for v in self.center_q],
                "axes": [_dec(v) for v in self.axes_q]}


# -- polytopes ------------------------------------------------------------

def _det(rows: list[list[Fraction]]) -> Fraction:
    a = [list(r) for r in rows]
    n = len(a)
    det = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if a[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            det = -det
        det *= a[c][c]
        for r in range(c + 1, n):
            f = a[r][c] / a[c][c]
            for j in range(c, n):
                a[r][j] -= f * a[c][j]
    return det


class Polytope(Region):
    """Intersection of halfspaces ``normal . x <= offset`` with the unit cube."""

    kind = "polytope"

    def __init__(self, halfspaces: Sequence[tuple[Sequence[Any], Any]]):
        if not halfspaces:
            raise RegionError("polytope needs at least one halfspace")
        self.halfspaces_q = tuple((tuple(_frac(v) for v in n), _frac(b)) for n, b in halfspaces)
        self.dims = len(self.halfspaces_q[0][0])
        if any(len(n) != self.dims for n, _ in self.halfspaces_q):
            raise RegionError("halfspace normals have inconsistent dimension")
        if any(all(v == 0 for v in n) for n, _ in self.halfspaces_q):
            raise RegionError("zero halfspace normal")
        d = self.dims
        rows = [[float(v) for v in n] for n, _ in self.halfspaces_q]
        offs = [float(b) for _, b in self.halfspaces_q]
        for i in range(d):
            e = [0.0] * d
            e[i] = 1.0
            rows.append(list(e))
            offs.append(1.0)
            e[i] = -1.0
            rows.append(e)
            offs.append(0.0)
        A = np.array(rows)
        norms = np.linalg.norm(A, axis=1)
        self.normals = A / norms[:, None]
        self.offsets = np.array(offs) / norms
        self._volume: float | None = None

    def _margin(self, pts):
        return np.min(self.offsets - pts @ self.normals.T, axis=1)

    def _contains_exact(self, q):
        if any(v < 0 or v > 1 for v in q):
            return False
        return all(sum(a * v for a, v in zip(n, q)) <= b for n, b in self.halfspaces_q)

    def distance(self, pts, cap=np.inf):
        pts = np.ascontiguousarray(_as_points(pts, self.dims))
        return polytope_distance(pts, self.normals, self.offsets, float(cap))

    def depth(self, pts):
        pts = _as_points(pts, self.dims)
        return np.maximum(self._margin(pts), 0.0)

    def vertices(self) -> np.ndarray:
        d = self.dims
        # Chebyshev centre gives a strictly interior point for qhull
        c = np.zeros(d + 1)
        c[-1] = -1.0
        A = np.hstack([self.normals, np.ones((len(self.normals), 1))])
        res = optimize.linprog(c, A_ub=A, b_ub=self.offsets, bounds=[(None, None)] * d + [(0, None)],
                               method="highs")
        if not res.success or res.x[-1] <= 1e-12:
            return np.zeros((0, d))
        hs = np.hstack([self.normals, -self.offsets[:, None]])
        return spatial.HalfspaceIntersection(hs, res.x[:d]).intersections

    def bbox(self):
        v = self.vertices()
        if len(v) == 0:
            return np.zeros(self.dims), np.zeros(self.dims)
        return np.clip(v.min(axis=0), 0, 1), np.clip(v.max(axis=0), 0, 1)

    def exact_measure(self):
        if self._volume is None:
            v = self.vertices()
            self._volume = float(spatial.ConvexHull(v).volume) if len(v) > self.dims else 0.0
        return self._volume

    def to_spec(self):
        return {"kind": "polytope", "halfspaces": [
            {"normal": [_dec(v) for v in n], "offset": _dec(b)} for n, b in self.halfspaces_q
        ]}


class Simplex(Polytope):
    """Convex hull of ``d+1`` affinely independent points of the unit cube."""

    kind = "simplex"

    def __init__(self, vertices: Sequence[Sequence[Any]]):
        verts = [tuple(_frac(v) for v in p) for p in vertices]
        d = len(verts[0])
        if len(verts) != d + 1 or any(len(p) != d for p in verts):
            raise RegionError("a d-simplex needs d+1 vertices in d dimensions")
        if any(not (0 <= v <= 1) for p in verts for v in p):
            raise RegionError("simplex vertices must lie in the unit cube")
        vol = _det([[p[j] - verts[0][j] for j in range(d)] for p in verts[1:]])
        if vol == 0:
            raise RegionError("simplex vertices are affinely dependent")
        self.vertices_q = tuple(verts)
        self._exact_volume = abs(vol) / math.factorial(d)
        halfspaces = []
        for skip in range(d + 1):
            face = [p for i, p in enumerate(verts) if i != skip]
            # normal of the hyperplane through ``face`` by cofactor expansion
            edges = [[p[j] - face[0][j] for j in range(d)] for p in face[1:]]
            normal = []
            for j in range(d):
                minor = [[row[c] for c in range(d) if c != j] for row in edges]
                normal.append((-1) ** j * _det(minor) if d > 1 else Fraction(1))
            off = sum(a * v for a, v in zip(normal, face[0]))
            if sum(a * v for a, v in zip(normal, verts[skip])) > off:
                normal = [-a for a in normal]
                off = -off
            halfspaces.append((normal, off))
        super().__init__(halfspaces)

    def exact_measure(self):
        return float(self._exact_volume)

    def to_spec(self):
        return {"kind": "simplex", "vertices": [[_dec(v) for v in p] for p in self.vertices_q]}


def random_polytope(d: int, n_halfspaces: int, rng: np.random.Generator,
                    center: float = 0.5, reach: tuple[float, float] = (0.15, 0.35)) -> Polytope:
    """Random polytope around ``(center,)*d``; coefficients rounded to 6 decimals."""
    hs = []
    for _ in range(n_halfspaces):
        n = rng.normal(size=d)
        n /= np.linalg.norm(n)
        rho = rng.uniform(*reach)
        off = float(n.sum() * center + rho)
        hs.append(([f"{v:.6f}" for v in n], f"{off:.6f}"))
    return Polytope(hs)


# -- black-box regions ----------------------------------------------------

class OracleRegion(Region):
    """Region known only through a vectorized membership predicate.

    ``distance`` / ``depth`` callables are optional; without them shells are
    estimated by probing a few points at radius up to ``eps`` around each
    sample. ``refinement`` sets how densely cube faces are sampled when a cover
    is built over this region.
    """

    kind = "oracle"
    convex = False

    def __init__(self, dims: int, member: Callable[[np.ndarray], np.ndarray],
                 distance: Callable[[np.ndarray], np.ndarray] | None = None,
                 depth: Callable[[np.ndarray], np.ndarray] | None = None,
                 refinement: int = 4, name: str = "oracle"):
        self.dims = dims
        self._member = member
        self._dist = distance
        self._depth = depth
        self.has_distance = distance is not None and depth is not None
        self.refinement = refinement
        self.name = name

    @classmethod
    def wrap(cls, region: Region, *, with_distance: bool = False, refinement: int = 4) -> OracleRegion:
        """Hide the exact formulas of ``region`` behind an oracle interface."""
        return cls(region.dims, region.contains_many,
                   region.distance if with_distance else None,
                   region.depth if with_distance else None,
                   refinement, f"oracle({region.kind})")

    def _inside(self, pts):
        return np.asarray(self._member(pts), dtype=bool)

    def _margin(self, pts):
        return np.where(self._inside(pts), 1.0, -1.0)

    def contains_residues(self, X, m):
        X = np.asarray(X, dtype=np.int64).reshape(-1, self.dims)
        return self.contains_many(X / m)

    def distance(self, pts, cap=np.inf):
        if self._dist is None:
            raise RegionError("oracle region has no distance capability")
        return np.asarray(self._dist(_as_points(pts, self.dims)), dtype=float)

    def depth(self, pts):
        if self._depth is None:
            raise RegionError("oracle region has no distance capability")
        return np.asarray(self._depth(_as_points(pts, self.dims)), dtype=float)

    def _probes(self, eps: float) -> np.ndarray:
        d = self.dims
        dirs = [np.eye(d)[i] * s for i in range(d) for s in (1, -1)]
        dirs += list(np.random.default_rng(12345).normal(size=(4 * d, d)))
        dirs = [v / np.linalg.norm(v) for v in dirs]
        return np.array([v * eps * f for v in dirs for f in (0.25, 0.5, 0.75, 0.999)])

    def _shell_predicate(self, eps, side):
        if self.has_distance:
            return super()._shell_predicate(eps, side)
        probes = self._probes(eps)

        def pred(pts):
            base = self.contains_many(pts)
            want = base if side == "inner" else ~base
            hit = np.zeros(len(pts), dtype=bool)
            for off in probes:
                q = pts + off
                if side == "inner":
                    flip = ~(_in_cube(q) & self._inside(q))
                else:
                    flip = _in_cube(q) & self._inside(q)
                hit |= flip
            return want & hit

        return pred

    def describe(self):
        return self.name


# -- module-level API -----------------------------------------------------

def contains(region: Region, u: Sequence[float]) -> bool:
    return region.contains(u)


def measure(region: Region, budget: int = 1_000_000, seed: int = 0) -> MeasureEstimate:
    return region.measure(budget, seed)


def shell_measure(region: Region, eps: float, side: str, budget: int = 1_000_000, seed: int = 0) -> MeasureEstimate:
    return region.shell_measure(eps, side, budget, seed)


@dataclass(frozen=True)
class WellShapedEstimate:
    C: float
    rows: tuple[tuple[float, str, MeasureEstimate], ...] = field(default=())


def wellshaped_constant(region: Region, eps_grid: Sequence[float], budget: int = 1_000_000,
                        seed: int = 0, threads: int | None = None) -> WellShapedEstimate:
    """Largest ``(mu(shell) + error) / eps`` over the grid and both shell sides."""
    if not eps_grid:
        raise ValueError("eps grid must be nonempty")
    rows = []
    C = 0.0
    for eps in eps_grid:
        for side in ("outer", "inner"):
            est = region.shell_measure(eps, side, budget, seed, threads)
            rows.append((float(eps), side, est))
            C = max(C, est.upper / eps)
    return WellShapedEstimate(C, tuple(rows))


# -- region spec files ----------------------------------------------------

def region_from_spec(spec: dict, dims: int | None = None) -> Region:
    """Build a region from its structured description.

    Kinds: ``full{dims}``, ``box{lo, hi}``, ``ball{center, radius}``,
    ``ellipsoid{center, axes}``, ``polytope{halfspaces: [{normal, offset}]}``
    and ``simplex{vertices}``. Numbers are decimal strings.
    """
    kind = spec.get("kind")
    if kind == "full":
        d = int(spec.get("dims", dims or 0))
        if d < 1:
            raise RegionError("full cube needs dims")
        region: Region = Box.full(d)
    elif kind == "box":
        region = Box(spec["lo"], spec["hi"])
    elif kind == "ball":
        region = Ball(spec["center"], spec["radius"])
    elif kind == "ellipsoid":
        region = Ellipsoid(spec["center"], spec["axes"])
    elif kind == "polytope":
        region = Polytope([(h["normal"], h["offset"]) for h in spec["halfspaces"]])
    elif kind == "simplex":
        region = Simplex(spec["vertices"])
    else:
        raise RegionError(f"unknown region kind {kind!r}")
    if dims is not None and region.dims != dims:
        raise RegionError(f"region has dimension {region.dims}, expected {dims}")
    return region


def load_region(text_or_path: str, dims: int | None = None) -> Region:
    """``"full"``, an inline JSON object, or a path to a JSON region file."""
    s = text_or_path.strip()
    if s == "full":
        if dims is None:
            raise RegionError("'full' needs a dimension")
        return Box.full(dims)
    if s.startswith("{"):
        return region_from_spec(json.loads(s), dims)
    return region_from_spec(json.loads(Path(s).read_text()), dims)
