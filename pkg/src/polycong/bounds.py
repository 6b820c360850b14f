"""Closed-form upper bounds for the counts, and the dyadic depth choices.

Every bound carries an unspecified ``m^{o(1)}`` factor; here it is replaced by
an explicit ``slack`` multiplier (default 1), so the numbers are the bound
shapes rather than proven inequalities. Exponents are recomputed from
``(k, d)`` on every call:

    theta(k, d) = 1 / (2 r (k + 1)),   r = C(k + d, d) - 1

Logarithms are natural.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Any

from .counting import CountResult
from .poly import index_count, weight_sum

REGIME_THRESHOLD = 16
REL_TOL = 1e-12


def theta(k: int, d: int) -> float:
    if k < 1 or d < 1:
        raise ValueError("need k, d >= 1")
    return 1.0 / (2 * index_count(k, d) * (k + 1))


def _need_k2(k: int) -> None:
    if k < 2:
        raise ValueError(f"bounds need degree k >= 2, got {k}")


def _need_mu(m: float, mu: float) -> None:
    if not mu >= 1.0 / m:
        raise ValueError(f"measure {mu} is below 1/m = {1.0 / m}")


def bound_thm31(H: float, R: float, m: float, k: int, d: int, slack: float = 1.0) -> float:
    """``H^d ((R/H^k)^theta + (R/m)^theta) * slack`` for the box count ``M_F(H, R)``."""
    _need_k2(k)
    if min(H, R, m) <= 0:
        raise ValueError("H, R, m must be positive")
    t = theta(k, d)
    return H ** d * ((R / H ** k) ** t + (R / m) ** t) * slack


def bound_cor32(m: float, h: float, k: int, d: int, slack: float = 1.0) -> float:
    """Cube of side ``1/h``: ``(m/h)^(d - k theta) + m^(d - theta) h^-d``."""
    _need_k2(k)
    t = theta(k, d)
    return (m / h) ** (d - k * t) * slack + m ** (d - t) * h ** (-d) * slack


def bound_cor33(m: float, h: float, k: int, d: int, slack: float = 1.0) -> float:
    """Cube of side ``1/h`` for ``F = G(x_1..x_{d-1}) - x_d``; theta taken in ``d-1`` variables."""
    _need_k2(k)
    if d < 2:
        raise ValueError("graph-form bound needs d >= 2")
    t = theta(k, d - 1)
    return (m / h) ** (d - 1 - (k - 1) * t) * slack + m ** (d - 1) * h ** (-(d - 1 + t)) * slack


def bound_thm34(m: float, mu: float, k: int, d: int, slack: float = 1.0) -> float:
    """Well-shaped region of measure ``mu >= 1/m``: ``m^(d-k theta) mu^(1-k theta) + m^(d-theta) mu``."""
    _need_k2(k)
    _need_mu(m, mu)
    t = theta(k, d)
    return m ** (d - k * t) * mu ** (1 - k * t) * slack + m ** (d - t) * mu * slack


@dataclass(frozen=True)
class Thm35Cases:
    large: float
    small: float
    threshold: float
    case: int

    @property
    def value(self) -> float:
        return self.large if self.case == 1 else self.small


def bound_thm35_cases(m: float, mu: float, k: int, d: int, slack: float = 1.0) -> Thm35Cases:
    """Both case formulas for graph-form ``F``; case 1 when ``mu >= m^(-1+1/k)``."""
    _need_k2(k)
    _need_mu(m, mu)
    if d < 2:
        raise ValueError("graph-form bound needs d >= 2")
    t = theta(k, d - 1)
    large = m ** (d - 1) * mu ** t * slack
    small = m ** (d - 1 - (k - 1) * t) * mu ** (-(k - 1) * t) * slack
    threshold = m ** (-1 + 1 / k)
    return Thm35Cases(large, small, threshold, 1 if mu >= threshold else 2)


def bound_thm35(m: float, mu: float, k: int, d: int, slack: float = 1.0) -> float:
    return bound_thm35_cases(m, mu, k, d, slack).value


def heuristic_count(H: float, R: float, m: float, d: int) -> float:
    """Expected size ``H^d R / m`` of ``M_F(H, R)`` for a random-looking ``F``."""
    return H ** d * R / m


BOUNDS = {
    "thm31": lambda p: bound_thm31(p["H"], p["R"], p["m"], p["k"], p["d"], p["slack"]),
    "cor32": lambda p: bound_cor32(p["m"], p["h"], p["k"], p["d"], p["slack"]),
    "cor33": lambda p: bound_cor33(p["m"], p["h"], p["k"], p["d"], p["slack"]),
    "thm34": lambda p: bound_thm34(p["m"], p["mu"], p["k"], p["d"], p["slack"]),
    "thm35": lambda p: bound_thm35(p["m"], p["mu"], p["k"], p["d"], p["slack"]),
    "heuristic": lambda p: heuristic_count(p["H"], p["R"], p["m"], p["d"]) * p["slack"],
}


def evaluate_bound(name: str, **params: Any) -> float:
    if name not in BOUNDS:
        raise ValueError(f"unknown bound {name!r}; choose from {sorted(BOUNDS)}")
    params.setdefault("slack", 1.0)
    return BOUNDS[name](params)


# -- parameter choices ------------------------------------------------------

def _pow2(n: int) -> float:
    return math.ldexp(1.0, n)


def _bracket_neg(x: float, upper_strict: bool) -> int:
    """Integer ``n`` with ``2^-n <= x`` and ``x < 2^(-n+1)`` (or ``<=`` when not strict)."""
    if not x > 0 or not math.isfinite(x):
        raise ValueError(f"cannot bracket {x}")
    n = math.ceil(-math.log2(x))
    upper = (lambda n: x < _pow2(-n + 1)) if upper_strict else (lambda n: x <= _pow2(-n + 1))
    while not _pow2(-n) <= x:
        n += 1
    while not upper(n):
        n -= 1
    assert _pow2(-n) <= x and upper(n), "no integer satisfies the bracketing"
    return n


@dataclass(frozen=True)
class ParamChoice:
    """Dyadic depths ``M`` (finest level) and ``N`` (split level).

    ``N_bracket`` is the integer from the displayed bracketing; ``N`` is
    that value clamped into ``[1, M]``.
    """

    M: int
    N: int
    N_bracket: int
    d: int
    m: int
    mu: float
    k: int
    rule: str

    @property
    def eps(self) -> float:
        return 2 * math.sqrt(self.d) / _pow2(self.M)

    def check(self) -> bool:
        """The displayed bracketing inequalities, evaluated in floating point."""
        m, mu, M, Nb, k = self.m, self.mu, self.M, self.N_bracket, self.k
        if self.rule == "thm34":
            x, y = math.log(m) / m, mu * math.log(m)
            return _pow2(-M) <= x <= _pow2(-M + 1) and _pow2(-Nb) <= y < _pow2(-Nb + 1) and self.N <= M
        if self.rule == "thm35-large":
            z = mu ** (1 / (k - 1)) * m
            w = _pow2(M * (k - 1)) * float(m) ** (-(k - 1))
            return _pow2(M - 1) < z <= _pow2(M) and _pow2(-Nb) <= w < _pow2(-Nb + 1) and self.N <= M
        if self.rule == "thm35-small":
            return _pow2(-M) <= mu < _pow2(-M + 1) and self.N == M
        raise ValueError(f"unknown rule {self.rule!r}")


def _clamp(n: int, M: int) -> int:
    return min(max(1, n), M)


def choose_params_thm34(m: int, mu: float, d: int) -> ParamChoice:
    """``2^-M <= log(m)/m <= 2^(-M+1)`` and ``2^-N <= mu log m < 2^(-N+1)``."""
    if m < 3:
        raise ValueError("need m >= 3")
    if not 0 < mu <= 1:
        raise ValueError("measure must lie in (0, 1]")
    M = _bracket_neg(math.log(m) / m, upper_strict=False)
    Nb = _bracket_neg(mu * math.log(m), upper_strict=True)
    return ParamChoice(M, _clamp(Nb, M), Nb, d, m, mu, 0, "thm34")


def choose_params_thm35(m: int, mu: float, k: int, d: int = 2) -> ParamChoice:
    """Depths for the graph-form bound; the large-measure rule applies when ``mu >= m^(-1+1/k)``."""
    if m < 3 or k < 2:
        raise ValueError("need m >= 3 and k >= 2")
    _need_mu(m, mu)
    if mu > 1:
        raise ValueError("measure must lie in (0, 1]")
    if mu >= m ** (-1 + 1 / k):
        z = mu ** (1 / (k - 1)) * m
        # 2^(M-1) < z <= 2^M  is  2^-M <= 1/z < 2^(-M+1)
        M = _bracket_neg(1 / z, upper_strict=True)
        while not _pow2(M - 1) < z:
            M -= 1
        while not z <= _pow2(M):
            M += 1
        Nb = _bracket_neg(_pow2(M * (k - 1)) * float(m) ** (-(k - 1)), upper_strict=True)
        choice = ParamChoice(M, _clamp(Nb, M), Nb, d, m, mu, k, "thm35-large")
    else:
        M = _bracket_neg(mu, upper_strict=True)
        choice = ParamChoice(M, M, M, d, m, mu, k, "thm35-small")
    if choice.N > choice.M:
        raise AssertionError("depth choice violates N <= M")
    return choice


# -- reports ----------------------------------------------------------------

def _fmt(x: Any) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return format(x, ".12g")
    return str(x)


@dataclass(frozen=True)
class BoundReport:
    """One bound evaluated at one parameter point, optionally with an observed count."""

    name: str
    m: int
    k: int
    d: int
    bound: float
    H: float | None = None
    R: float | None = None
    h: float | None = None
    mu: float | None = None
    s: int | None = None
    N: int | None = None
    M: int | None = None
    slack: float = 1.0
    observed: int | None = None

    HEADER = "name,m,H,R,h,mu,k,d,r,s,slack,bound,observed,ratio,regime"

    def __post_init__(self) -> None:
        if not self.bound > 0:
            raise ValueError("bound value must be positive")

    @property
    def r(self) -> int:
        return index_count(self.k, self.d)

    @property
    def K(self) -> int:
        return weight_sum(self.k, self.d)

    @property
    def ratio(self) -> float | None:
        return None if self.observed is None else self.observed / self.bound

    @property
    def below_regime(self) -> bool:
        """Parameters too small for the asymptotic statement to be meaningful."""
        if self.H is not None and self.H < REGIME_THRESHOLD:
            return True
        return self.h is not None and self.m / self.h < REGIME_THRESHOLD

    def params(self) -> dict[str, Any]:
        p = {"m": self.m, "k": self.k, "d": self.d, "slack": self.slack}
        for key in ("H", "R", "h", "mu"):
            if getattr(self, key) is not None:
                p[key] = getattr(self, key)
        return p

    def recompute(self) -> float:
        return evaluate_bound(self.name, **self.params())

    def csv_row(self) -> str:
        vals = [self.name, self.m, self.H, self.R, self.h, self.mu, self.k, self.d, self.r, self.s,
                self.slack, self.bound, self.observed, self.ratio, "below" if self.below_regime else "ok"]
        return ",".join(_fmt(v) for v in vals)


def make_report(name: str, *, m: int, k: int, d: int, slack: float = 1.0, observed: int | None = None,
                **params: Any) -> BoundReport:
    value = evaluate_bound(name, m=m, k=k, d=d, slack=slack, **params)
    return BoundReport(name, m, k, d, value, slack=slack, observed=observed, **params)


@dataclass(frozen=True)
class BoundCheck:
    passed: bool
    ratio: float
    report: BoundReport


_DOMAIN_KEYS = {"m": "m", "d": "d", "H": "H", "R": "R"}


def verify_bound(observed: CountResult, report: BoundReport) -> BoundCheck:
    """Pass iff the observed count does not exceed the bound value."""
    for key, attr in _DOMAIN_KEYS.items():
        if key in observed.domain and getattr(report, attr) is not None:
            a, b = observed.domain[key], getattr(report, attr)
            if a != b:
                raise ValueError(f"parameter mismatch on {key}: count has {a}, bound has {b}")
    rep = replace(report, observed=observed.count)
    return BoundCheck(observed.count <= rep.bound, rep.ratio, rep)
