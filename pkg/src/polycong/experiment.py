"""Grid experiments comparing exact counts with the bound shapes.

A config names polynomials, regions and moduli (plus optional box sizes) and
produces one CSV row per (polynomial, region or box, modulus, bound). Rows
are written in canonical grid order and contain no timings, so the same
config and seed always give the same bytes.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

from .bounds import REGIME_THRESHOLD, choose_params_thm34, choose_params_thm35, evaluate_bound
from .counting import NF_BUDGET, BudgetError, count_MF, count_NF
from .poly import parse
from .regions import load_region

CSV_HEADER = ("kind,poly,domain,m,d,k,H,R,mu,mu_err,N,M,observed,bound_name,slack,bound,ratio,regime,status")


@dataclass
class ExperimentConfig:
    """Everything needed to reproduce a run; round-trips through JSON."""

    polys: list[str]
    moduli: list[int]
    regions: list[Any] = field(default_factory=lambda: ["full"])
    H: list[int] = field(default_factory=list)
    R: list[Any] = field(default_factory=lambda: ["1"])
    s: int = 1
    slack_exponent: float = 0.0
    count_budget: int = NF_BUDGET
    measure_budget: int = 1_000_000
    seed: int = 0
    output: str | None = None
    name: str = "experiment"

    def validate(self) -> None:
        if not self.polys or not self.moduli:
            raise ValueError("config needs at least one polynomial and one modulus")
        if not self.regions and not self.H:
            raise ValueError("config needs regions or box sizes")
        if self.H and not self.R:
            raise ValueError("box experiments need at least one R value")
        if any(int(m) < 3 for m in self.moduli):
            raise ValueError("moduli must be at least 3")

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> ExperimentConfig:
        data = json.loads(text)
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path: str | Path) -> ExperimentConfig:
        return cls.from_json(Path(path).read_text())


def _fmt(x: Any) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return format(x, ".12g")
    return str(x)


def _region_label(spec: Any) -> str:
    return spec if isinstance(spec, str) else json.dumps(spec, sort_keys=True, separators=(",", ":"))


def _row(**kw: Any) -> str:
    keys = CSV_HEADER.split(",")
    return ",".join(_fmt(kw.get(k)).replace(",", ";") if k in ("poly", "domain", "status") else _fmt(kw.get(k))
                    for k in keys)


def _region_rows(cfg: ExperimentConfig, poly: str, spec: Any, m: int, threads: int | None) -> list[str]:
    base: dict[str, Any] = {"kind": "region", "poly": poly, "domain": _region_label(spec), "m": m}
    try:
        F = parse(poly, m)
        region = load_region(spec if isinstance(spec, str) else json.dumps(spec), F.dims)
        if region.dims != F.dims:
            raise ValueError(f"region has dimension {region.dims}, polynomial has {F.dims}")
        est = region.measure(cfg.measure_budget, cfg.seed, threads)
        obs = count_NF(F, region, threads=threads, budget=cfg.count_budget).count
    except (ValueError, BudgetError) as exc:
        return [_row(**base, status=f"error: {exc}")]
    k, d, mu = F.degree, F.dims, est.value
    base.update(d=d, k=k, mu=mu, mu_err=est.error_bound, observed=obs)
    slack = float(m) ** cfg.slack_exponent
    rows = []
    candidates = ["thm34"] + (["thm35"] if F.is_graph_form() else [])
    for name in candidates:
        try:
            if k < 2 or F.leading_gcd() != 1:
                raise ValueError("needs degree >= 2 with a unit top coefficient")
            if name == "thm34":
                pc = choose_params_thm34(m, mu, d)
            else:
                pc = choose_params_thm35(m, mu, k, d)
            bound = evaluate_bound(name, m=m, mu=mu, k=k, d=d, slack=slack)
            regime = "below" if m / 2 ** pc.M < REGIME_THRESHOLD else "ok"
            rows.append(_row(**base, N=pc.N, M=pc.M, bound_name=name, slack=slack, bound=bound,
                             ratio=obs / bound, regime=regime, status="ok"))
        except ValueError as exc:
            rows.append(_row(**base, bound_name=name, status=f"n/a: {exc}"))
    return rows


def _box_rows(cfg: ExperimentConfig, poly: str, m: int, H: int, R_tag: Any, threads: int | None) -> list[str]:
    R = {"H": H, "m": m}.get(R_tag) if isinstance(R_tag, str) and R_tag in ("H", "m") else int(R_tag)
    base: dict[str, Any] = {"kind": "box", "poly": poly, "domain": "box", "m": m, "H": H, "R": R}
    try:
        F = parse(poly, m)
        obs = count_MF(F, [0] * F.dims, 0, H, R, threads=threads).count
    except (ValueError, BudgetError) as exc:
        return [_row(**base, status=f"error: {exc}")]
    k, d = F.degree, F.dims
    base.update(d=d, k=k, observed=obs)
    slack = float(m) ** cfg.slack_exponent
    regime = "below" if H < REGIME_THRESHOLD else "ok"
    rows = []
    for name in ("thm31", "heuristic"):
        try:
            if name == "thm31" and (k < 2 or F.leading_gcd() != 1):
                raise ValueError("needs degree >= 2 with a unit top coefficient")
            bound = evaluate_bound(name, H=H, R=R, m=m, k=k, d=d, slack=slack)
            rows.append(_row(**base, bound_name=name, slack=slack, bound=bound, ratio=obs / bound,
                             regime=regime, status="ok"))
        except ValueError as exc:
            rows.append(_row(**base, bound_name=name, status=f"n/a: {exc}"))
    return rows


def run_experiment(cfg: ExperimentConfig, threads: int | None = None) -> str:
    """CSV text for the whole grid, in the order polys x regions x moduli, then boxes."""
    cfg.validate()
    lines = [f"# {cfg.name} seed={cfg.seed}", CSV_HEADER]
    for poly in cfg.polys:
        for spec in cfg.regions:
            for m in cfg.moduli:
                lines += _region_rows(cfg, poly, spec, int(m), threads)
        for m in cfg.moduli:
            for H in cfg.H:
                for R in cfg.R:
                    lines += _box_rows(cfg, poly, int(m), int(H), R, threads)
    return "\n".join(lines) + "\n"


def geometric_moduli(lo: int, hi: int, n: int) -> list[int]:
    """``n`` distinct integers spaced geometrically over ``[lo, hi]``."""
    out: list[int] = []
    for j in range(n):
        v = round(lo * (hi / lo) ** (j / (n - 1))) if n > 1 else lo
        v = max(v, out[-1] + 1) if out else v
        out.append(int(v))
    if out[-1] > hi:
        raise ValueError("range too narrow for that many distinct moduli")
    return out

