"""Zero-order balance systems and their first-derivative data.

A system is ``d_t F0_i(y) + d_{x^A} F^A_i(y) = Pi_i(y)`` for ``i = 1..m``.
Constitutive functions never depend on space-time explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import DimensionMismatch, NonConvergence, SingularJacobian
from .expr import Expr, ZERO, as_expr, diff, evaluate, free_vars

REGULARITY_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class BalanceSystem:
    field_names: tuple
    spatial_dim: int
    densities: tuple
    fluxes: tuple  # fluxes[A][i] for A = 0..spatial_dim-1
    productions: tuple
    domain_box: tuple  # ((lo, hi), ...) per field
    name: str = "system"

    def __post_init__(self):
        set_ = object.__setattr__
        set_(self, "field_names", tuple(self.field_names))
        set_(self, "densities", tuple(as_expr(e) for e in self.densities))
        set_(self, "fluxes", tuple(tuple(as_expr(e) for e in row) for row in self.fluxes))
        prods = self.productions
        if prods is None:
            prods = (ZERO,) * len(self.field_names)
        set_(self, "productions", tuple(as_expr(e) for e in prods))
        set_(self, "domain_box", tuple((float(lo), float(hi)) for lo, hi in self.domain_box))
        m = len(self.field_names)
        if m < 1:
            raise DimensionMismatch("a balance system needs at least one field")
        if len(set(self.field_names)) != m:
            raise DimensionMismatch("field names must be distinct")
        if not 1 <= self.spatial_dim <= 3:
            raise DimensionMismatch("spatial_dim must be 1, 2 or 3")
        if len(self.densities) != m or len(self.productions) != m or len(self.domain_box) != m:
            raise DimensionMismatch("densities, productions and domain_box need one entry per field")
        if len(self.fluxes) != self.spatial_dim or any(len(r) != m for r in self.fluxes):
            raise DimensionMismatch("fluxes must be spatial_dim rows of m expressions")
        allowed = set(self.field_names)
        for e in self.all_exprs():
            extra = free_vars(e) - allowed
            if extra:
                raise DimensionMismatch(
                    f"expression {e} uses {sorted(extra)} which are not fields"
                )
        for lo, hi in self.domain_box:
            if not lo <= hi:
                raise DimensionMismatch("domain intervals must satisfy lo <= hi")

    @property
    def m(self) -> int:
        return len(self.field_names)

    @property
    def n(self) -> int:
        return self.spatial_dim

    @property
    def w_names(self) -> tuple:
        """Variable names used for density coordinates ``w_i = F0_i(y)``."""
        return tuple(f"w{i + 1}" for i in range(self.m))

    def all_exprs(self):
        yield from self.densities
        for row in self.fluxes:
            yield from row
        yield from self.productions

    def point(self, p) -> np.ndarray:
        """Normalize a state given as mapping or sequence to a float array."""
        if isinstance(p, Mapping):
            try:
                return np.array([float(p[k]) for k in self.field_names])
            except KeyError as exc:
                raise DimensionMismatch(f"state point misses field {exc.args[0]!r}") from None
        arr = np.asarray(p, dtype=float).reshape(-1)
        if arr.shape[0] != self.m:
            raise DimensionMismatch(f"expected {self.m} state values, got {arr.shape[0]}")
        return arr

    def env(self, p) -> dict:
        return dict(zip(self.field_names, self.point(p)))

    def box_center(self) -> np.ndarray:
        return np.array([(lo + hi) / 2 for lo, hi in self.domain_box])

    def box_lower(self) -> np.ndarray:
        return np.array([lo for lo, _ in self.domain_box])

    # symbolic first and second derivatives, built once per system
    @cached_property
    def density_grad(self):
        return tuple(tuple(diff(f, y) for y in self.field_names) for f in self.densities)

    @cached_property
    def density_hess(self):
        return tuple(
            tuple(tuple(diff(d, y) for y in self.field_names) for d in row)
            for row in self.density_grad
        )

    @cached_property
    def flux_grad(self):
        return tuple(
            tuple(tuple(diff(f, y) for y in self.field_names) for f in row)
            for row in self.fluxes
        )

    @cached_property
    def flux_hess(self):
        return tuple(
            tuple(
                tuple(tuple(diff(d, y) for y in self.field_names) for d in grad_row)
                for grad_row in per_field
            )
            for per_field in self.flux_grad
        )


def eval_array(exprs, env) -> np.ndarray:
    """Evaluate a nested tuple of expressions into an ndarray of the same shape."""
    if isinstance(exprs, Expr):
        return np.array(evaluate(exprs, env))
    return np.array([eval_array(e, env) for e in exprs], dtype=float)


@dataclass
class JacobianSet:
    W: np.ndarray
    Fy: np.ndarray  # (n, m, m), Fy[A][i, j] = dF^A_i/dy^j
    Psi: Optional[np.ndarray]  # (n, m, m) = W^-1 Fy W, None when W singular
    det_W: float
    regular: bool


def density_jacobian(sys: BalanceSystem, p, tol: float = REGULARITY_TOL) -> JacobianSet:
    env = sys.env(p)
    W = eval_array(sys.density_grad, env)
    Fy = eval_array(sys.flux_grad, env)
    det = float(np.linalg.det(W))
    regular = _regular(W, det, tol)
    Psi = None
    if regular:
        Winv = np.linalg.inv(W)
        Psi = np.array([Winv @ F @ W for F in Fy])
    return JacobianSet(W=W, Fy=Fy, Psi=Psi, det_W=det, regular=regular)


def _regular(W, det, tol):
    scale = np.linalg.norm(W, 2)
    return bool(scale > 0 and abs(det) > tol * scale)


def is_regular(sys: BalanceSystem, p, tol: float = REGULARITY_TOL) -> bool:
    W = eval_array(sys.density_grad, sys.env(p))
    return _regular(W, float(np.linalg.det(W)), tol)


def to_w(sys: BalanceSystem, p) -> np.ndarray:
    return eval_array(sys.densities, sys.env(p))


def from_w(sys: BalanceSystem, w, guess, max_iter: int = 50, tol: float = 1e-10) -> np.ndarray:
    """Invert ``w = F0(y)`` by damped Newton iteration started at ``guess``."""
    w = np.asarray(w, dtype=float)
    y = sys.point(guess).copy()
    target = tol * (1.0 + np.linalg.norm(w))
    r = to_w(sys, y) - w
    rn = np.linalg.norm(r)
    for _ in range(max_iter):
        if rn <= 1e-3 * target:
            return y
        W = eval_array(sys.density_grad, sys.env(y))
        if not _regular(W, np.linalg.det(W), REGULARITY_TOL):
            raise SingularJacobian(f"density Jacobian singular at {y.tolist()}")
        step = np.linalg.solve(W, r)
        t = 1.0
        rn_new = np.inf
        while t >= 1e-4:
            y_new = y - t * step
            try:
                r_new = to_w(sys, y_new) - w
                rn_new = np.linalg.norm(r_new)
            except ArithmeticError:
                rn_new = np.inf
            if rn_new < rn:
                break
            t *= 0.5
        if not rn_new < rn:
            break  # no further progress at machine precision
        y, r, rn = y_new, r_new, rn_new
    if rn <= target:
        return y
    raise NonConvergence(f"Newton inversion of the densities stalled at residual {rn:.3e}")


def flux_jacobian_w(sys: BalanceSystem, p) -> np.ndarray:
    """Matrices ``L^A = dF^A/dw`` evaluated at the state ``p`` (chain rule)."""
    jac = density_jacobian(sys, p)
    if not jac.regular:
        raise SingularJacobian(f"density Jacobian singular at {sys.point(p).tolist()}")
    Winv = np.linalg.inv(jac.W)
    return np.array([F @ Winv for F in jac.Fy])


def productions_at(sys: BalanceSystem, p) -> np.ndarray:
    return eval_array(sys.productions, sys.env(p))


def fluxes_at(sys: BalanceSystem, p) -> np.ndarray:
    return eval_array(sys.fluxes, sys.env(p))


def make_system(
    fields: Sequence[str],
    densities,
    fluxes,
    productions=None,
    box=None,
    name: str = "system",
) -> BalanceSystem:
    """Convenience constructor accepting expression text or Expr objects."""
    fluxes = [list(row) for row in fluxes]
    if box is None:
        box = [(-1.0, 1.0)] * len(fields)
    return BalanceSystem(
        field_names=tuple(fields),
        spatial_dim=len(fluxes),
        densities=tuple(densities),
        fluxes=tuple(tuple(r) for r in fluxes),
        productions=None if productions is None else tuple(productions),
        domain_box=tuple(box),
        name=name,
    )
