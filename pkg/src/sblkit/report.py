"""Verification pipelines and deterministic report serialization."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import SingularJacobian
from .linalg import definiteness
from .model import BalanceSystem, density_jacobian, eval_array
from .potential import Potential
from .sampling import sample_box
from .sbl import Infeasible, SblCandidate, ll_residual, solve_main_fields

SCHEMA_VERSION = 1


@dataclass
class RunConfig:
    samples: int = 200
    seed: int = 0
    tol_reg: float = 1e-10
    tol_ll: float = 1e-8
    tol_def: float = 1e-9
    tol_path: float = 1e-7
    tol_eig: float = 1e-8
    tol_ineq: float = 1e-12
    output: str = None
    format: str = "json"

    def validate(self) -> "RunConfig":
        if self.samples < 1:
            raise ValueError("sample count must be at least 1")
        for k in ("tol_reg", "tol_ll", "tol_def", "tol_path", "tol_eig", "tol_ineq"):
            if not getattr(self, k) > 0:
                raise ValueError(f"{k} must be positive")
        if self.format not in ("json", "text"):
            raise ValueError("format must be json or text")
        return self

    def to_dict(self):
        d = asdict(self)
        d.pop("output")
        d.pop("format")
        return d


def clean(obj):
    """Convert numpy scalars/arrays and non-finite floats to plain JSON values."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    return obj


def to_json(report: dict) -> str:
    return json.dumps(clean(report), indent=2, sort_keys=True) + "\n"


@dataclass
class VerifyResult:
    feasible_points: int
    regular_points: int
    samples: int
    max_flux_residual: float
    max_source_residual: float
    max_ll_residual: float
    worst_point: list
    first_infeasible: dict
    convexity: str
    min_production: float
    argmin_production: list
    checks: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_dict(self):
        d = asdict(self)
        d["passed"] = self.passed
        return d


def verify_candidate(
    sys: BalanceSystem,
    cand: SblCandidate,
    cfg: RunConfig,
    require_definite: bool = False,
    require_inequality: bool = False,
) -> VerifyResult:
    cand.check(sys)
    pts = sample_box(sys.domain_box, cfg.samples, cfg.seed)
    feasible = 0
    regular = 0
    max_flux = max_src = max_ll = 0.0
    worst = None
    first_bad = None
    verdicts = set()
    min_q, arg_q = math.inf, None
    pot = Potential(sys, cand.K0, "y")
    for p in pts:
        sol = solve_main_fields(sys, cand, p, cfg.tol_ll)
        if isinstance(sol, Infeasible):
            if first_bad is None:
                first_bad = {"point": p.tolist(), "residual": sol.residual, "threshold": sol.threshold}
            max_flux = max(max_flux, sol.residual)
        else:
            feasible += 1
            r = ll_residual(sys, cand, sol, p)
            max_flux = max(max_flux, r.r_flux)
            max_src = max(max_src, r.r_source)
            if max(r.r_flux, r.r_source) >= max_ll:
                max_ll = max(r.r_flux, r.r_source)
                worst = p.tolist()
        q = float(eval_array(cand.Q, sys.env(p)))
        if q < min_q:
            min_q, arg_q = q, p.tolist()
        if density_jacobian(sys, p, cfg.tol_reg).regular:
            regular += 1
            try:
                verdicts.add(definiteness(pot.at(p).hess_w))
            except (SingularJacobian, ArithmeticError):
                verdicts.add("Undefined")
    convexity = verdicts.pop() if len(verdicts) == 1 else ("Mixed" if verdicts else "Undefined")
    # flux residuals of feasible points are already within the relative threshold
    checks = {"ll": feasible == len(pts) and max_src <= cfg.tol_ll}
    if require_definite:
        checks["definite"] = convexity in ("PosDef", "NegDef")
    if require_inequality:
        checks["inequality"] = min_q >= -cfg.tol_ineq
    return VerifyResult(
        feasible_points=feasible,
        regular_points=regular,
        samples=len(pts),
        max_flux_residual=max_flux,
        max_source_residual=max_src,
        max_ll_residual=max_ll,
        worst_point=worst,
        first_infeasible=first_bad,
        convexity=convexity,
        min_production=min_q,
        argmin_production=arg_q,
        checks=checks,
    )
