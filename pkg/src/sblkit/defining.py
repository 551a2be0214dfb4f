"""The defining system for SBL densities and its classification.

For a regular system the density ``h0(w)`` of a supplementary law exists iff
the flux 1-forms ``lambda_i dF~^A_i`` are closed, i.e. iff for every ``A``

    r^A_jk = sum_i L^A_ij H_ik - L^A_ik H_ij = 0,   H = Hess_w h0,

with ``L^A = dF~^A/dw``. Everything here is pointwise linear algebra on the
matrices ``L^A`` plus a few sampled aggregates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionMismatch, NotHyperbolic, SingularEpsMatrix, SingularJacobian
from .expr import Expr, as_expr, diff
from .linalg import real_eigenvalues
from .model import BalanceSystem, density_jacobian, eval_array, flux_jacobian_w
from .potential import Potential
from .sampling import sample_box

ELLIPTIC_TOL = 1e-10
EIG_TOL = 1e-8
C_REG_TOL = 1e-10


def _potential(sys, h0, coords):
    if isinstance(h0, Potential):
        return h0
    return Potential(sys, as_expr(h0), coords)


@dataclass
class DefiningResidual:
    r: np.ndarray  # (n, m, m), r[A, j, k]
    max_abs: float

    def to_dict(self):
        return {"max_abs": self.max_abs, "r": self.r.tolist()}


def residual_from_matrices(L: np.ndarray, H: np.ndarray) -> DefiningResidual:
    """Residual of the defining system from ``L^A`` and ``Hess_w h0``."""
    r = np.array([La.T @ H for La in L])
    r = r - np.transpose(r, (0, 2, 1))
    return DefiningResidual(r=r, max_abs=float(np.max(np.abs(r))) if r.size else 0.0)


def defining_residual(sys: BalanceSystem, h0, p, coords: str = "w") -> DefiningResidual:
    """Evaluate the defining system on ``h0`` at the state ``p``.

    ``h0`` is an expression in ``sys.w_names`` (default) or, with
    ``coords="y"``, in the field variables.
    """
    pot = _potential(sys, h0, coords)
    L = flux_jacobian_w(sys, p)
    return residual_from_matrices(L, pot.at(p).hess_w)


def ellipticity_check(sys: BalanceSystem, p, tol: float = ELLIPTIC_TOL) -> bool:
    """True iff the kernels of the transposed flux Jacobians meet only in 0."""
    jac = density_jacobian(sys, p)
    mats = flux_jacobian_w(sys, p) if jac.regular else jac.Fy
    return _stack_full_rank(mats, tol)


def _stack_full_rank(mats, tol):
    stacked = np.vstack([M.T for M in mats])
    s = np.linalg.svd(stacked, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return False
    return bool(np.sum(s > tol * s[0]) == stacked.shape[1])


@dataclass
class CommonEigenvector:
    vector: np.ndarray
    eigenvalues: tuple  # one per spatial direction

    def to_dict(self):
        return {"vector": [float(v) for v in self.vector], "eigenvalues": list(self.eigenvalues)}


def common_eigenvectors_of(mats: Sequence[np.ndarray], tol: float = EIG_TOL) -> list:
    """Common real eigenvectors of the transposes of ``mats``.

    Returns an orthonormal basis of each joint eigenspace, tagged with the
    eigenvalue for every matrix.
    """
    mats = [np.asarray(M, dtype=float).T for M in mats]
    m = mats[0].shape[0]
    out = []
    _joint(mats, np.eye(m), (), tol, out)
    return out


def _joint(mats, B, mus, tol, out):
    if not mats:
        for col in B.T:
            out.append(CommonEigenvector(vector=col / np.linalg.norm(col), eigenvalues=mus))
        return
    M = mats[0]
    scale = max(1.0, np.linalg.norm(M, 2))
    for mu in real_eigenvalues(M):
        C = _restricted_eigenspace(M, B, mu, tol * scale)
        if C.shape[1]:
            _joint(mats[1:], C, mus + (float(mu),), tol, out)


def _restricted_eigenspace(M, B, mu, tol):
    """Orthonormal basis of ``{B c : |(M - mu) B c| <= tol |c|}``."""
    A = (M - mu * np.eye(M.shape[0])) @ B
    _, s, Vt = np.linalg.svd(A, full_matrices=True)
    s_full = np.zeros(B.shape[1])
    s_full[: s.size] = s
    keep = s_full <= tol
    if not keep.any():
        return np.zeros((B.shape[0], 0))
    Q, _ = np.linalg.qr(B @ Vt[keep].T)
    return Q


def common_eigenvectors(sys: BalanceSystem, p, tol: float = EIG_TOL) -> list:
    return common_eigenvectors_of(list(flux_jacobian_w(sys, p)), tol)


# -- two fields, one space dimension ---------------------------------------

def _require_two_field(sys):
    if sys.m != 2 or sys.n != 1:
        raise DimensionMismatch("two-field analysis needs m = 2 fields and one space dimension")


def two_field_J(sys: BalanceSystem, p):
    """Coefficient matrix ``J`` of ``a h11 + 2b h12 + c h22 = 0`` and its determinant."""
    _require_two_field(sys)
    L = flux_jacobian_w(sys, p)[0]
    off = 0.5 * (L[0, 0] - L[1, 1])
    J = np.array([[-L[0, 1], off], [off, L[1, 0]]])
    return J, float(np.linalg.det(J))


def two_field_type(det: float, tol: float = 1e-12) -> str:
    if det < -tol:
        return "Hyperbolic"
    if det > tol:
        return "Elliptic"
    return "Parabolic"


def characteristic_roots(sys: BalanceSystem, p):
    """Roots ``l1 >= l2`` of ``a l^2 + 2 b l + c = 0``."""
    J, det = two_field_J(sys, p)
    if det >= 0:
        raise NotHyperbolic(f"det J = {det:.3e} >= 0 at {sys.point(p).tolist()}")
    return _roots(J)


def _roots(J):
    a, b, c = J[0, 0], J[0, 1], J[1, 1]
    disc = np.sqrt(b * b - a * c)
    if abs(a) <= 1e-14 * max(abs(b), abs(c), 1.0):
        raise NotHyperbolic("a = 0: one family of characteristics is parallel to the y2 axis")
    r1, r2 = (-b + disc) / a, (-b - disc) / a
    return (r1, r2) if r1 >= r2 else (r2, r1)


@dataclass
class RiemannGrid:
    y1: np.ndarray
    y2: np.ndarray
    values: np.ndarray  # values[i, j] at (y1[i], y2[j]); NaN where truncated
    truncated: np.ndarray  # bool mask: characteristic left the box

    def to_csv(self) -> str:
        lines = ["y1,y2,value,truncated"]
        for i, a in enumerate(self.y1):
            for j, b in enumerate(self.y2):
                v = self.values[i, j]
                lines.append(f"{float(a)!r},{float(b)!r},{'' if np.isnan(v) else repr(float(v))},{int(self.truncated[i, j])}")
        return "\n".join(lines) + "\n"


def riemann_invariant_grid(sys: BalanceSystem, grid, which: int = 1, steps_per_cell: int = 8) -> RiemannGrid:
    """Riemann invariant on a rectangular grid by characteristic integration.

    ``grid`` is ``(y1_values, y2_values)``. The invariant at a node is the
    ``y2`` coordinate where the characteristic ``dy2/dy1 = -l_which`` through
    the node meets the left edge ``y1 = y1_values[0]`` (classical RK4).
    """
    _require_two_field(sys)
    if which not in (1, 2):
        raise ValueError("which must be 1 or 2")
    y1s = np.asarray(grid[0], dtype=float)
    y2s = np.asarray(grid[1], dtype=float)
    for a in y1s:
        for b in y2s:
            det = two_field_J(sys, (a, b))[1]
            if det >= 0:
                raise NotHyperbolic(f"det J = {det:.3e} >= 0 at ({a}, {b})")
    lo2, hi2 = y2s.min(), y2s.max()
    slack = 1e-9 * max(1.0, hi2 - lo2)

    def slope(a, b):
        return -_roots(two_field_J(sys, (a, b))[0])[which - 1]

    x0 = y1s[0]
    dx_cell = (y1s.max() - y1s.min()) / max(len(y1s) - 1, 1)
    values = np.full((len(y1s), len(y2s)), np.nan)
    trunc = np.zeros_like(values, dtype=bool)
    for i, a in enumerate(y1s):
        nsteps = max(1, int(np.ceil(abs(a - x0) / max(dx_cell, 1e-300) * steps_per_cell))) if a != x0 else 0
        for j, b in enumerate(y2s):
            x, y = a, b
            if nsteps:
                hstep = (x0 - a) / nsteps
                ok = True
                for _ in range(nsteps):
                    try:
                        k1 = slope(x, y)
                        k2 = slope(x + hstep / 2, y + hstep / 2 * k1)
                        k3 = slope(x + hstep / 2, y + hstep / 2 * k2)
                        k4 = slope(x + hstep, y + hstep * k3)
                    except (ArithmeticError, NotHyperbolic):
                        ok = False
                        break
                    y = y + hstep / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
                    x = x + hstep
                    if y < lo2 - slack or y > hi2 + slack:
                        ok = False
                        break
                if not ok:
                    trunc[i, j] = True
                    continue
            values[i, j] = y
    return RiemannGrid(y1=y1s, y2=y2s, values=values, truncated=trunc)


# -- sampled classification ------------------------------------------------

@dataclass
class ClassificationReport:
    elliptic: bool
    common_eigenvectors: list  # (point, CommonEigenvector) pairs
    holonomic_verdict: str
    two_field: Optional[dict]
    sampled_points: int
    regular_points: int = 0
    elliptic_points: int = 0
    tolerances: dict = field(default_factory=dict)
    note: str = "holonomy is a sampled verdict over the state box, not a proof"

    def to_dict(self):
        return {
            "elliptic": self.elliptic,
            "holonomic": self.holonomic_verdict,
            "common_eigenvectors": [
                {"point": [float(v) for v in pt], **ev.to_dict()} for pt, ev in self.common_eigenvectors
            ],
            "two_field": self.two_field,
            "samples": self.sampled_points,
            "regular_points": self.regular_points,
            "elliptic_points": self.elliptic_points,
            "tolerances": dict(self.tolerances),
            "note": self.note,
        }


def classify(
    sys: BalanceSystem,
    sample_count: int = 200,
    seed: int = 0,
    tol_eig: float = EIG_TOL,
    tol_elliptic: float = ELLIPTIC_TOL,
    max_reported: int = 20,
) -> ClassificationReport:
    pts = sample_box(sys.domain_box, sample_count, seed)
    elliptic_pts = 0
    regular = 0
    found_any = False
    persistent = False
    reported = []
    dets = []
    for p in pts:
        jac = density_jacobian(sys, p)
        if not jac.regular:
            continue
        regular += 1
        Winv = np.linalg.inv(jac.W)
        L = [F @ Winv for F in jac.Fy]
        if _stack_full_rank(L, tol_elliptic):
            elliptic_pts += 1
        evs = common_eigenvectors_of(L, tol_eig)
        if evs:
            found_any = True
            if common_eigenvectors_of(L, tol_eig / 10):
                persistent = True
            for ev in evs:
                if len(reported) < max_reported:
                    reported.append((p, ev))
        if sys.m == 2 and sys.n == 1:
            dets.append(two_field_J(sys, p)[1])
    if regular == 0:
        verdict = "Inconclusive"
    elif not found_any:
        verdict = "Holonomic"
    elif persistent:
        verdict = "NonHolonomic"
    else:
        verdict = "Inconclusive"
    two = None
    if sys.m == 2 and sys.n == 1:
        center = sys.box_center()
        det_c = two_field_J(sys, center)[1]
        types = {two_field_type(d) for d in dets} or {two_field_type(det_c)}
        two = {
            "detJ": det_c,
            "detJ_min": float(min(dets)) if dets else det_c,
            "detJ_max": float(max(dets)) if dets else det_c,
            "type": types.pop() if len(types) == 1 else "Mixed",
        }
    return ClassificationReport(
        elliptic=regular > 0 and elliptic_pts == regular,
        common_eigenvectors=reported,
        holonomic_verdict=verdict,
        two_field=two,
        sampled_points=len(pts),
        regular_points=regular,
        elliptic_points=elliptic_pts,
        tolerances={"eig": tol_eig, "elliptic": tol_elliptic},
    )


# -- first-order reformulation ---------------------------------------------

def eps_matrix(sys: BalanceSystem, eps, p) -> np.ndarray:
    eps = np.asarray(eps, dtype=float)
    if eps.shape != (sys.n,):
        raise DimensionMismatch(f"eps needs {sys.n} components")
    L = flux_jacobian_w(sys, p)
    return np.tensordot(eps, L, axes=1)


def c_regularity(sys: BalanceSystem, eps, p, tol: float = C_REG_TOL) -> bool:
    """True iff ``|det sum_A eps_A L^A| > tol * |L_eps|^m``."""
    Le = eps_matrix(sys, eps, p)
    scale = np.linalg.norm(Le, 2)
    return bool(scale > 0 and abs(np.linalg.det(Le)) > tol * scale ** sys.m)


def _hA_grad_y(sys, hA):
    hA = tuple(as_expr(h) for h in hA)
    if len(hA) != sys.n:
        raise DimensionMismatch(f"need {sys.n} flux potentials, got {len(hA)}")
    return tuple(tuple(diff(h, y) for y in sys.field_names) for h in hA)


def first_order_gradient(sys: BalanceSystem, eps, hA, p, tol: float = C_REG_TOL) -> np.ndarray:
    """``d h0/dw`` recovered from the flux potentials ``hA`` (expressions in y)."""
    if not c_regularity(sys, eps, p, tol):
        raise SingularEpsMatrix(f"sum eps_A L^A singular for eps={list(eps)}")
    grads = _hA_grad_y(sys, hA)
    env = sys.env(p)
    jac = density_jacobian(sys, p)
    if not jac.regular:
        raise SingularJacobian("density Jacobian singular")
    Winv = np.linalg.inv(jac.W)
    gy = np.tensordot(np.asarray(eps, dtype=float), eval_array(grads, env), axes=1)
    gw = Winv.T @ gy
    Le = np.tensordot(np.asarray(eps, dtype=float), np.array([F @ Winv for F in jac.Fy]), axes=1)
    return np.linalg.solve(Le.T, gw)


def gradient_closedness(sys: BalanceSystem, eps, hA, p, h: float = 1e-5) -> float:
    """Max antisymmetric part of ``d(lambda)/dw`` by central differences."""
    y = sys.point(p)
    m = sys.m
    D = np.zeros((m, m))
    for j in range(m):
        e = np.zeros(m)
        e[j] = h
        D[:, j] = (first_order_gradient(sys, eps, hA, y + e) - first_order_gradient(sys, eps, hA, y - e)) / (2 * h)
    Dw = D @ np.linalg.inv(density_jacobian(sys, y).W)
    return float(np.max(np.abs(Dw - Dw.T)))


@dataclass
class EpsIndependence:
    spread: float
    eps_ref: list
    per_eps: list

    def to_dict(self):
        return {"spread": self.spread, "eps_ref": self.eps_ref, "per_eps": self.per_eps}


def epsilon_independence_check(sys: BalanceSystem, hA, eps_samples, points=None, seed: int = 0) -> EpsIndependence:
    eps_samples = [np.asarray(e, dtype=float) for e in eps_samples]
    if points is None:
        points = sample_box(sys.domain_box, 20, seed)
    per = []
    for e in eps_samples:
        worst = 0.0
        for p in points:
            ref = first_order_gradient(sys, eps_samples[0], hA, p)
            worst = max(worst, float(np.max(np.abs(first_order_gradient(sys, e, hA, p) - ref))))
        per.append(worst)
    return EpsIndependence(spread=max(per), eps_ref=eps_samples[0].tolist(), per_eps=per)
