"""Sparse multivariate polynomials over Z_m.

A polynomial in ``d`` variables is stored as a mapping from exponent tuples
(multi-indices) to coefficients reduced into ``{0, ..., m-1}``::

    x1^2 + x2  (mod 5)  ->  {(2, 0): 1, (0, 1): 1}

Zero coefficients are never stored, so the zero polynomial has no terms and
degree 0 by convention.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

MultiIndex = tuple[int, ...]


class PolynomialSyntaxError(ValueError):
    """Raised when a polynomial expression cannot be parsed."""


def weight(i: Sequence[int]) -> int:
    return sum(i)


def _compositions(total: int, parts: int) -> Iterator[MultiIndex]:
    # descending lexicographic order among tuples of a fixed weight
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def iter_multiindices(k: int, d: int, *, include_zero: bool = False) -> list[MultiIndex]:
    """All multi-indices with ``1 <= |i| <= k``, graded then descending lexicographic.

    >>> iter_multiindices(1, 2)
    [(1, 0), (0, 1)]
    """
    if k < 0 or d < 1:
        raise ValueError("need k >= 0 and d >= 1")
    start = 0 if include_zero else 1
    return [i for w in range(start, k + 1) for i in _compositions(w, d)]


def index_count(k: int, d: int) -> int:
    """Number of multi-indices with ``1 <= |i| <= k``: ``C(k+d, d) - 1``."""
    if k < 1 or d < 1:
        raise ValueError("need k >= 1 and d >= 1")
    return math.comb(k + d, d) - 1


def weight_sum(k: int, d: int) -> int:
    """Total weight ``K`` of all multi-indices with ``1 <= |i| <= k``.

    Computed twice, by direct summation and by the closed form
    ``d (r+1) k / (d+1)``; a mismatch means an arithmetic bug.
    """
    direct = sum(weight(i) for i in iter_multiindices(k, d))
    r = index_count(k, d)
    num = d * (r + 1) * k
    if num % (d + 1) != 0 or num // (d + 1) != direct:
        raise RuntimeError(f"weight sum mismatch for k={k}, d={d}: {direct} vs {num}/{d + 1}")
    return direct


@dataclass(frozen=True)
class Polynomial:
    """Immutable polynomial over Z_m in ``dims`` variables.

    ``terms`` may be passed as any mapping ``MultiIndex -> int``; it is
    normalized into a sorted tuple of ``(exponents, coefficient)`` pairs with
    coefficients reduced mod ``modulus`` and zeros dropped.
    """

    modulus: int
    dims: int
    terms: tuple[tuple[MultiIndex, int], ...] = ()

    def __post_init__(self) -> None:
        m, d = self.modulus, self.dims
        if m < 3:
            raise ValueError(f"modulus must be at least 3, got {m}")
        if d < 1:
            raise ValueError(f"need at least one variable, got dims={d}")
        raw = self.terms.items() if isinstance(self.terms, Mapping) else self.terms
        acc: dict[MultiIndex, int] = {}
        for exps, c in raw:
            exps = tuple(int(e) for e in exps)
            if len(exps) != d or any(e < 0 for e in exps):
                raise ValueError(f"bad exponent tuple {exps} for dims={d}")
            acc[exps] = (acc.get(exps, 0) + int(c)) % m
        norm = tuple(sorted((e, c) for e, c in acc.items() if c))
        object.__setattr__(self, "terms", norm)

    # -- basic views -----------------------------------------------------

    @property
    def coeffs(self) -> dict[MultiIndex, int]:
        return dict(self.terms)

    @property
    def degree(self) -> int:
        return max((weight(e) for e, _ in self.terms), default=0)

    def coeff(self, i: Sequence[int]) -> int:
        return self.coeffs.get(tuple(i), 0)

    def is_zero(self) -> bool:
        return not self.terms

    def top_terms(self) -> dict[MultiIndex, int]:
        k = self.degree
        return {e: c for e, c in self.terms if weight(e) == k}

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for exps, c in sorted(self.terms, key=lambda t: (-weight(t[0]), [-e for e in t[0]])):
            mono = "*".join(
                f"x{v + 1}" if e == 1 else f"x{v + 1}^{e}" for v, e in enumerate(exps) if e
            )
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            else:
                parts.append(f"{c}*{mono}")
        return " + ".join(parts)

    # -- arithmetic ------------------------------------------------------

    def _check_compatible(self, other: Polynomial) -> None:
        if self.modulus != other.modulus or self.dims != other.dims:
            raise ValueError("polynomials live in different rings")

    def __add__(self, other: Polynomial) -> Polynomial:
        self._check_compatible(other)
        return Polynomial(self.modulus, self.dims, self.terms + other.terms)

    def __neg__(self) -> Polynomial:
        return Polynomial(self.modulus, self.dims, tuple((e, -c) for e, c in self.terms))

    def __sub__(self, other: Polynomial) -> Polynomial:
        return self + (-other)

    def __mul__(self, other: Polynomial | int) -> Polynomial:
        if isinstance(other, int):
            return Polynomial(self.modulus, self.dims, tuple((e, c * other) for e, c in self.terms))
        self._check_compatible(other)
        out: dict[MultiIndex, int] = {}
        for e1, c1 in self.terms:
            for e2, c2 in other.terms:
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return Polynomial(self.modulus, self.dims, out)

    __rmul__ = __mul__

    def translate(self, shift: Sequence[int]) -> Polynomial:
        """Return ``G(x) = F(x + shift)``; top-degree coefficients are unchanged."""
        if len(shift) != self.dims:
            raise ValueError("shift has wrong dimension")
        out: dict[MultiIndex, int] = {}
        for exps, c in self.terms:
            # expand prod_v (x_v + K_v)^{e_v} one variable at a time
            partial: dict[MultiIndex, int] = {(): c}
            for e, K in zip(exps, shift):
                nxt: dict[MultiIndex, int] = {}
                for head, val in partial.items():
                    for j in range(e + 1):
                        key = head + (j,)
                        nxt[key] = nxt.get(key, 0) + val * math.comb(e, j) * pow(K, e - j, self.modulus)
                partial = nxt
            for key, val in partial.items():
                out[key] = out.get(key, 0) + val
        return Polynomial(self.modulus, self.dims, out)

    # -- evaluation ------------------------------------------------------

    def evaluate(self, x: Sequence[int]) -> int:
        """Exact value of ``F(x) mod m`` for an integer point ``x``."""
        if len(x) != self.dims:
            raise ValueError(f"point has {len(x)} coordinates, polynomial has {self.dims} variables")
        m = self.modulus
        xs = [int(v) % m for v in x]
        total = 0
        for exps, c in self.terms:
            t = c
            for v, e in zip(xs, exps):
                if e:
                    t = t * pow(v, e, m) % m
            total += t
        return total % m

    def grid_values(self, axes: Sequence[np.ndarray]) -> np.ndarray:
        """Values mod m on the tensor grid ``axes[0] x ... x axes[d-1]``.

        Returns an int64 array of shape ``(len(axes[0]), ..., len(axes[d-1]))``.
        """
        if len(axes) != self.dims:
            raise ValueError("need one axis per variable")
        return terms_on_grid(self.terms, axes, self.modulus)

    # -- combinatorial quantities ----------------------------------------

    def leading_gcd(self) -> int:
        """``g_F``: the minimum of ``gcd(m, beta_i)`` over top-degree terms."""
        if self.degree == 0:
            raise ValueError("leading_gcd needs a polynomial of degree >= 1")
        return min(math.gcd(self.modulus, c) for c in self.top_terms().values())

    def is_graph_form(self) -> bool:
        """True when ``F = G(x_1..x_{d-1}) - x_d`` for some polynomial ``G``."""
        d = self.dims
        if d < 2:
            return False
        last = tuple(1 if v == d - 1 else 0 for v in range(d))
        for exps, c in self.terms:
            if exps[-1] and (exps != last or c != self.modulus - 1):
                return False
        return self.coeff(last) == self.modulus - 1

    def restrict_graph(self) -> Polynomial:
        """The ``G`` of a graph-form polynomial, as a polynomial in ``d-1`` variables."""
        if not self.is_graph_form():
            raise ValueError("polynomial is not of the form G(x_1..x_{d-1}) - x_d")
        return Polynomial(self.modulus, self.dims - 1, tuple((e[:-1], c) for e, c in self.terms if not e[-1]))


def terms_on_grid(terms: Iterable[tuple[MultiIndex, int]], axes: Sequence[np.ndarray], m: int) -> np.ndarray:
    """Evaluate ``sum c * x^e`` mod m over a tensor grid, in int64 with per-step reduction."""
    axes = [np.asarray(a, dtype=np.int64) % m for a in axes]
    shape = tuple(len(a) for a in axes)
    if m >= 1 << 31:
        raise OverflowError("grid evaluation supports moduli below 2^31")
    out = np.zeros(shape, dtype=np.int64)
    powers: dict[tuple[int, int], np.ndarray] = {}

    def power(v: int, e: int) -> np.ndarray:
        key = (v, e)
        if key not in powers:
            p = np.ones_like(axes[v])
            for _ in range(e):
                p = p * axes[v] % m
            powers[key] = p
        return powers[key]

    for exps, c in terms:
        t = np.full(shape, c % m, dtype=np.int64)
        for v, e in enumerate(exps):
            if e:
                idx = [None] * len(axes)
                idx[v] = slice(None)
                t = t * power(v, e)[tuple(idx)] % m
        out += t
        out %= m
    return out


# -- parsing --------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(?P<int>\d+)|(?P<var>x(?P<idx>\d+)(?:\s*\^\s*(?P<exp>\d+))?)|(?P<op>[+\-*]))")


def _tokenize(text: str) -> list[tuple[str, str, int, int]]:
    toks = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        mt = _TOKEN.match(text, pos)
        if mt is None or mt.end() == pos:
            raise PolynomialSyntaxError(f"unexpected character at position {pos}: {text[pos:pos + 10]!r}")
        if mt.group("int") is not None:
            toks.append(("int", mt.group("int"), 0, 0))
        elif mt.group("var") is not None:
            toks.append(("var", "", int(mt.group("idx")), int(mt.group("exp") or 1)))
        else:
            toks.append(("op", mt.group("op"), 0, 0))
        pos = mt.end()
    return toks


def parse(text: str, m: int, dims: int | None = None) -> Polynomial:
    """Parse ``"3*x1*x2^2 - x3 + 1"`` into a :class:`Polynomial` mod ``m``.

    Grammar: ``term (("+"|"-") term)*`` with an optional leading sign, where a
    term is ``[int] ("*"? var)*`` and ``var`` is ``x<idx>`` or ``x<idx>^<exp>``.
    Variables are 1-based. When ``dims`` is omitted it is the largest index used.
    """
    if m < 3:
        raise ValueError(f"modulus must be at least 3, got {m}")
    toks = _tokenize(text)
    if not toks:
        raise PolynomialSyntaxError("empty polynomial expression")
    raw: list[tuple[dict[int, int], int]] = []
    pos = 0
    sign = 1
    if toks[0][0] == "op" and toks[0][1] in "+-":
        sign = -1 if toks[0][1] == "-" else 1
        pos = 1
    while True:
        coeff = 1
        mono: dict[int, int] = {}
        seen = False
        if pos < len(toks) and toks[pos][0] == "int":
            coeff = int(toks[pos][1])
            pos += 1
            seen = True
        while pos < len(toks):
            kind, val, idx, exp = toks[pos]
            if kind == "op" and val == "*":
                if pos + 1 >= len(toks) or toks[pos + 1][0] != "var" or not seen:
                    raise PolynomialSyntaxError("'*' must sit between a factor and a variable")
                pos += 1
                continue
            if kind != "var":
                break
            if idx < 1:
                raise PolynomialSyntaxError("variables are numbered from x1")
            mono[idx] = mono.get(idx, 0) + exp
            seen = True
            pos += 1
        if not seen:
            raise PolynomialSyntaxError(f"expected a term at token {pos}")
        raw.append((mono, sign * coeff))
        if pos == len(toks):
            break
        kind, val, _, _ = toks[pos]
        if kind != "op" or val not in "+-":
            raise PolynomialSyntaxError(f"expected '+' or '-' at token {pos}")
        sign = -1 if val == "-" else 1
        pos += 1
        if pos == len(toks):
            raise PolynomialSyntaxError("dangling operator at end of expression")

    used = max((v for mono, _ in raw for v in mono), default=1)
    if dims is None:
        dims = used
    elif used > dims:
        raise PolynomialSyntaxError(f"variable x{used} exceeds declared dimension {dims}")
    terms = []
    for mono, c in raw:
        exps = tuple(mono.get(v + 1, 0) for v in range(dims))
        terms.append((exps, c))
    return Polynomial(m, dims, tuple(terms))


def random_polynomial(k: int, d: int, m: int, rng: np.random.Generator, *, unit_leading: bool = True) -> Polynomial:
    """Random polynomial of degree exactly ``k``; with ``unit_leading`` also ``g_F = 1``."""
    indices = iter_multiindices(k, d, include_zero=True)
    top = [i for i, e in enumerate(indices) if weight(e) == k]
    while True:
        cs = rng.integers(0, m, size=len(indices))
        top_cs = [int(cs[i]) for i in top]
        if unit_leading:
            if min(math.gcd(m, c) for c in top_cs) != 1:
                continue
        elif not any(top_cs):
            continue
        return Polynomial(m, d, tuple(zip(indices, (int(c) for c in cs))))
