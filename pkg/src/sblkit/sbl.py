"""Supplementary balance laws: Lagrange-Liu checks, main fields, reconstruction.

A candidate ``(K0, K^A, Q)`` is a supplementary law of a system iff there are
multipliers ``lambda`` with

    sum_i lambda_i dF^mu_i/dy = dK^mu/dy   (mu = 0..n)
    sum_i lambda_i Pi_i = Q

(autonomous systems). For regular systems ``lambda = dh0/dw``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.integrate import quad_vec

from .defining import residual_from_matrices
from .errors import DimensionMismatch, NonConvergence, NotClosed, PathDisagreement, SingularHessian
from .expr import Expr, ZERO, add, as_expr, diff, free_vars, integral, mul, simplify, substitute
from .linalg import definiteness, lstsq_pivoted
from .model import (
    BalanceSystem,
    density_jacobian,
    eval_array,
    flux_jacobian_w,
    fluxes_at,
    productions_at,
    to_w,
)
from .potential import Potential, derivative_exprs, w_potential_at

LL_TOL = 1e-8
PATH_ABS_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class SblCandidate:
    K0: Expr
    KA: tuple
    Q: Expr

    def __post_init__(self):
        object.__setattr__(self, "K0", as_expr(self.K0))
        object.__setattr__(self, "KA", tuple(as_expr(k) for k in self.KA))
        object.__setattr__(self, "Q", as_expr(self.Q))

    def check(self, sys: BalanceSystem) -> "SblCandidate":
        if len(self.KA) != sys.n:
            raise DimensionMismatch(f"candidate has {len(self.KA)} fluxes, system has {sys.n} directions")
        allowed = set(sys.field_names)
        for e in (self.K0, *self.KA, self.Q):
            extra = free_vars(e) - allowed
            if extra:
                raise DimensionMismatch(f"candidate uses {sorted(extra)} which are not fields")
        return self

    @property
    def densities(self):
        return (self.K0,) + self.KA

    def grads(self, sys: BalanceSystem):
        return _grad_cache(self, sys.field_names)


@lru_cache(maxsize=128)
def _grad_cache(cand, names):
    return tuple(tuple(diff(k, y) for y in names) for k in cand.densities)


@dataclass
class MainFields:
    lam: np.ndarray
    origin: str  # "FromH0" or "SolvedPointwise"
    flux_residual: float = 0.0
    source_residual: float = 0.0


@dataclass
class Infeasible:
    residual: float
    lam_lstsq: np.ndarray
    threshold: float


@dataclass
class LLResidual:
    r_flux: float
    r_source: float

    def ok(self, tol: float) -> bool:
        return self.r_flux <= tol and self.r_source <= tol


def _all_flux_jacobians(sys, p):
    """Stack ``[W, F^1_y, ..., F^n_y]`` (shape ``(n+1, m, m)``)."""
    jac = density_jacobian(sys, p)
    return np.concatenate([jac.W[None], jac.Fy])


def ll_residual(sys: BalanceSystem, cand: SblCandidate, lam, p) -> LLResidual:
    lam = np.asarray(lam.lam if isinstance(lam, MainFields) else lam, dtype=float)
    env = sys.env(p)
    F = _all_flux_jacobians(sys, p)
    gK = eval_array(cand.grads(sys), env)
    r_flux = np.einsum("i,aij->aj", lam, F) - gK
    r_src = float(lam @ productions_at(sys, p)) - float(eval_array(cand.Q, env))
    return LLResidual(r_flux=float(np.max(np.abs(r_flux))), r_source=abs(r_src))


def solve_main_fields(sys: BalanceSystem, cand: SblCandidate, p, tol: float = LL_TOL):
    """Least-squares multipliers for the flux part of the LL system."""
    env = sys.env(p)
    F = _all_flux_jacobians(sys, p)
    A = np.vstack([Fa.T for Fa in F])
    b = eval_array(cand.grads(sys), env).reshape(-1)
    lam, _ = lstsq_pivoted(A, b)
    res = float(np.max(np.abs(A @ lam - b))) if b.size else 0.0
    thr = tol * (1.0 + float(np.max(np.abs(b))) if b.size else 1.0)
    if res > thr:
        return Infeasible(residual=res, lam_lstsq=lam, threshold=thr)
    src = abs(float(lam @ productions_at(sys, p)) - float(eval_array(cand.Q, env)))
    return MainFields(lam=lam, origin="SolvedPointwise", flux_residual=res, source_residual=src)


def _potential(sys, h0, coords):
    if isinstance(h0, Potential):
        return h0
    return Potential(sys, as_expr(h0), coords)


def main_fields_from_h0(sys: BalanceSystem, h0, p, coords: str = "w") -> MainFields:
    return MainFields(lam=_potential(sys, h0, coords).at(p).grad_w, origin="FromH0")


# -- flux reconstruction ---------------------------------------------------

@dataclass
class CandidateValues:
    """Candidate generated by ``h0`` evaluated at one state."""

    K0: float
    KA: np.ndarray
    Q: float
    lam: np.ndarray
    path_difference: float
    max_defining_residual: Optional[float]


def _flux_increment(sys, pot, a, b):
    """``int_a^b sum_i lambda_i dF^A_i`` along the straight segment in y."""
    a = np.asarray(a, dtype=float)
    d = np.asarray(b, dtype=float) - a
    if not np.any(d):
        return np.zeros(sys.n)

    def integrand(t):
        y = a + t * d
        lam = pot.at(y).grad_w
        Fy = eval_array(sys.flux_grad, sys.env(y))
        return np.einsum("i,aij,j->a", lam, Fy, d)

    val, _ = quad_vec(integrand, 0.0, 1.0, epsabs=PATH_ABS_TOL, epsrel=1e-12, limit=200)
    return val


def _closedness_along(sys, pot, legs, nodes: int = 9):
    worst = 0.0
    for a, b in legs:
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        for t in np.linspace(0.0, 1.0, nodes):
            y = a + t * (b - a)
            L = flux_jacobian_w(sys, y)
            H = pot.at(y).hess_w
            scale = 1.0 + np.max(np.abs(H)) * max(1.0, np.max(np.abs(L)))
            worst = max(worst, residual_from_matrices(L, H).max_abs / scale)
    return worst


def build_candidate(
    sys: BalanceSystem,
    h0,
    base,
    p,
    coords: str = "w",
    check_closed: bool = True,
    tol_defining: float = 1e-9,
    tol_path: float = 1e-7,
) -> CandidateValues:
    """``K0 = h0(F0(p))``, ``K^A(p)`` by path integration from ``base`` (where ``K^A = 0``)."""
    pot = _potential(sys, h0, coords)
    base = sys.point(base)
    y = sys.point(p)
    corner = base.copy()
    corner[0] = y[0]
    worst = None
    if check_closed:
        worst = _closedness_along(sys, pot, [(base, y), (base, corner), (corner, y)])
        if worst > tol_defining:
            raise NotClosed(worst)
    k_straight = _flux_increment(sys, pot, base, y)
    k_legs = _flux_increment(sys, pot, base, corner) + _flux_increment(sys, pot, corner, y)
    diff_ = float(np.max(np.abs(k_straight - k_legs))) if sys.n else 0.0
    if diff_ > tol_path * (1.0 + float(np.max(np.abs(k_straight)))):
        raise PathDisagreement(diff_)
    at = pot.at(y)
    return CandidateValues(
        K0=at.value,
        KA=k_straight,
        Q=float(at.grad_w @ productions_at(sys, y)),
        lam=at.grad_w,
        path_difference=diff_,
        max_defining_residual=worst,
    )


# -- convexity and duality -------------------------------------------------

def hessian_and_convexity(h0: Expr, p: dict, rtol: float = 1e-10):
    """Hessian of ``h0`` at the named point ``p`` and its definiteness."""
    _, _, H = w_potential_at(as_expr(h0), dict(p))
    return H, definiteness(H, rtol)


@dataclass
class DualPotential:
    h_hat0: float
    lam: np.ndarray
    w: np.ndarray
    h0: float


def legendre_dual(h0: Expr, p: dict) -> DualPotential:
    h0 = as_expr(h0)
    val, g, _ = w_potential_at(h0, dict(p))
    w = np.array([float(v) for v in p.values()])
    return DualPotential(h_hat0=float(g @ w - val), lam=g, w=w, h0=val)


def invert_w_gradient(h0: Expr, names, lam, guess, max_iter: int = 60, tol: float = 1e-13) -> np.ndarray:
    """Solve ``grad h0(w) = lam`` for ``w`` by Newton from ``guess``."""
    h0 = as_expr(h0)
    names = tuple(names)
    grad_e, hess_e = derivative_exprs(h0, names)
    lam = np.asarray(lam, dtype=float)
    w = np.asarray(guess, dtype=float).copy()
    target = tol * (1.0 + np.linalg.norm(lam))
    for _ in range(max_iter):
        env = dict(zip(names, w))
        r = eval_array(grad_e, env) - lam
        if np.linalg.norm(r) <= target:
            return w
        try:
            step = np.linalg.solve(eval_array(hess_e, env), r)
        except np.linalg.LinAlgError:
            raise SingularHessian("Hessian of h0 is singular") from None
        w = w - step
    env = dict(zip(names, w))
    rn = np.linalg.norm(eval_array(grad_e, env) - lam)
    if rn <= 1e3 * target:
        return w
    raise NonConvergence(f"gradient inversion stalled at residual {rn:.3e}")


def dual_hessian(h0: Expr, p: dict, step: float = 1e-5) -> np.ndarray:
    """Hessian of the dual potential by central differences of ``lambda -> w``."""
    names = tuple(p)
    w0 = np.array([float(v) for v in p.values()])
    _, lam0, H = w_potential_at(as_expr(h0), dict(p))
    if abs(np.linalg.det(H)) <= 1e-14 * max(1.0, np.linalg.norm(H, 2)) ** len(names):
        raise SingularHessian("Hessian of h0 is singular")
    m = len(names)
    D = np.zeros((m, m))
    for i in range(m):
        e = np.zeros(m)
        e[i] = step
        wp = invert_w_gradient(h0, names, lam0 + e, w0)
        wm = invert_w_gradient(h0, names, lam0 - e, w0)
        D[:, i] = (wp - wm) / (2 * step)
    return D


def dual_hessian_residual(h0: Expr, p: dict, step: float = 1e-5) -> float:
    """``max |Hess h_hat0 . Hess h0 - I|``."""
    _, _, H = w_potential_at(as_expr(h0), dict(p))
    D = dual_hessian(h0, p, step)
    return float(np.max(np.abs(D @ H - np.eye(len(p)))))


def dual_flux_check(sys: BalanceSystem, h0, p, coords: str = "w", step: float = 1e-5) -> float:
    """Max deviation of ``d h_hat^mu / d lambda`` from ``F~^mu`` at ``p``.

    ``h_hat^0 = lambda.w - h0`` and ``h_hat^A = lambda.F~^A - K^A`` with ``K^A``
    reconstructed locally from ``p``.
    """
    pot = _potential(sys, h0, coords)
    y0 = sys.point(p)
    at0 = pot.at(y0)
    m = sys.m

    def hats(y):
        at = pot.at(y)
        K = _flux_increment(sys, pot, y0, y)
        lam = at.grad_w
        return np.concatenate([[lam @ at.w - at.value], fluxes_at(sys, y) @ lam - K])

    D = np.zeros((sys.n + 1, m))
    for i in range(m):
        e = np.zeros(m)
        e[i] = step
        yp = pot.invert_gradient(at0.grad_w + e, y0)
        ym = pot.invert_gradient(at0.grad_w - e, y0)
        D[:, i] = (hats(yp) - hats(ym)) / (2 * step)
    expected = np.vstack([at0.w[None], fluxes_at(sys, y0)])
    return float(np.max(np.abs(D - expected)))


@dataclass
class SymmetricHyperbolicReport:
    symmetric: bool
    asymmetry: list  # relative asymmetry per mu
    A0_definiteness: str
    ok: bool

    def to_dict(self):
        return {
            "symmetric": self.symmetric,
            "asymmetry": self.asymmetry,
            "A0": self.A0_definiteness,
            "ok": self.ok,
        }


def symmetric_hyperbolic_check(sys: BalanceSystem, h0, p, coords: str = "w", tol: float = 1e-7):
    """``A^mu = L^mu (Hess h0)^-1`` with ``L^0 = I``: symmetric, ``A^0`` definite."""
    pot = _potential(sys, h0, coords)
    H = pot.at(p).hess_w
    try:
        Hinv = np.linalg.inv(H)
    except np.linalg.LinAlgError:
        raise SingularHessian("Hessian of h0 is singular") from None
    if not np.all(np.isfinite(Hinv)) or np.linalg.cond(H) > 1e14:
        raise SingularHessian("Hessian of h0 is singular")
    mats = [Hinv] + [La @ Hinv for La in flux_jacobian_w(sys, p)]
    asym = []
    for A in mats:
        nrm = np.linalg.norm(A)
        asym.append(float(np.linalg.norm(A - A.T) / nrm) if nrm > 0 else 0.0)
    sym = all(a <= tol for a in asym)
    d0 = definiteness(mats[0])
    return SymmetricHyperbolicReport(
        symmetric=sym, asymmetry=asym, A0_definiteness=d0, ok=sym and d0 in ("PosDef", "NegDef")
    )


@dataclass
class InequalityReport:
    min_sigma: float
    argmin: list
    holds: bool

    def to_dict(self):
        return {"min": self.min_sigma, "argmin": self.argmin, "holds": self.holds}


def residual_inequality(sys: BalanceSystem, h0, samples, coords: str = "w", tol: float = 1e-12):
    """Minimum of ``Sigma = lambda . Pi`` over the sampled states."""
    pot = _potential(sys, h0, coords)
    best, arg = np.inf, None
    for p in samples:
        s = float(pot.at(p).grad_w @ productions_at(sys, p))
        if s < best:
            best, arg = s, sys.point(p).tolist()
    return InequalityReport(min_sigma=float(best), argmin=arg, holds=bool(best >= -tol))


def production_inequality(sys: BalanceSystem, cand: SblCandidate, samples, tol: float = 1e-12):
    """Minimum of the candidate's own source ``Q`` over the sampled states."""
    best, arg = np.inf, None
    for p in samples:
        q = float(eval_array(cand.Q, sys.env(p)))
        if q < best:
            best, arg = q, sys.point(p).tolist()
    return InequalityReport(min_sigma=float(best), argmin=arg, holds=bool(best >= -tol))


# -- symmetry-generated laws -----------------------------------------------

def symmetry_sbl_check(sys: BalanceSystem, xi, p) -> float:
    """``max |sum_i F^mu_i dxi^i/dy^j|`` over ``mu = 0..n`` and ``j``."""
    xi = tuple(as_expr(x) for x in xi)
    if len(xi) != sys.m:
        raise DimensionMismatch(f"xi needs {sys.m} components")
    env = sys.env(p)
    dxi = eval_array(tuple(tuple(diff(x, y) for y in sys.field_names) for x in xi), env)
    F = np.vstack([eval_array(sys.densities, env)[None], fluxes_at(sys, p)])
    return float(np.max(np.abs(F @ dxi)))


def symmetry_candidate(sys: BalanceSystem, xi) -> SblCandidate:
    """Candidate ``(xi.F0, xi.F^A, xi.Pi)`` induced by a vertical field ``xi``."""
    xi = tuple(as_expr(x) for x in xi)

    def dot(row):
        return add(*[mul(a, b) for a, b in zip(xi, row)]) if row else ZERO

    return SblCandidate(
        K0=dot(sys.densities), KA=tuple(dot(r) for r in sys.fluxes), Q=dot(sys.productions)
    )


def candidate_from_h0(sys: BalanceSystem, h0_w, base, var_name: str = "t_") -> SblCandidate:
    """Symbolic candidate generated by ``h0`` (in w): fluxes as path integrals.

    ``K^A(y) = int_0^1 lambda_i(g(t)) dF^A_i/dy^j(g(t)) (y^j - b^j) dt`` with
    ``g(t) = b + t (y - b)``; evaluation and differentiation go through the
    quadrature node, so the result plugs into :func:`solve_main_fields`.
    """
    h0_w = as_expr(h0_w)
    Potential(sys, h0_w, "w")  # validates the variables
    base = sys.point(base)
    while var_name in sys.field_names:
        var_name += "_"
    t = as_expr(var_name)
    to_y = {w: f for w, f in zip(sys.w_names, sys.densities)}
    lam = [substitute(diff(h0_w, w), to_y) for w in sys.w_names]
    path = {y: add(b, mul(t, add(y, -b))) for y, b in zip(sys.field_names, base)}
    KA = []
    for A in range(sys.n):
        terms = []
        for i in range(sys.m):
            for j, yj in enumerate(sys.field_names):
                dF = sys.flux_grad[A][i][j]
                coeff = substitute(simplify(mul(lam[i], dF)), path)
                terms.append(mul(coeff, add(yj, -base[j])))
        integrand = simplify(add(*terms))
        KA.append(integral(integrand, var_name, 0.0, 1.0))
    K0 = substitute(h0_w, to_y)
    Q = add(*[mul(l, pi) for l, pi in zip(lam, sys.productions)])
    return SblCandidate(K0=K0, KA=tuple(KA), Q=simplify(Q))


def dual_hessian_check(sys: BalanceSystem, h0, p, coords: str = "w", step: float = 1e-5) -> float:
    """``max |Hess h_hat0 . Hess h0 - I|`` for a potential attached to a system.

    The dual Hessian ``dw/dlambda`` comes from central differences of the
    numerically inverted gradient map.
    """
    pot = _potential(sys, h0, coords)
    y0 = sys.point(p)
    at0 = pot.at(y0)
    m = sys.m
    D = np.zeros((m, m))
    for i in range(m):
        e = np.zeros(m)
        e[i] = step
        wp = to_w(sys, pot.invert_gradient(at0.grad_w + e, y0))
        wm = to_w(sys, pot.invert_gradient(at0.grad_w - e, y0))
        D[:, i] = (wp - wm) / (2 * step)
    return float(np.max(np.abs(D @ at0.hess_w - np.eye(m))))
