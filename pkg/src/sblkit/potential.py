"""Density potentials ``h0`` given either in density coordinates or in fields.

Every quantity is reported in density coordinates ``w``. When ``h0`` is an
expression of the fields ``y`` the gradient and Hessian in ``w`` follow from
the exact chain rule with the symbolic second derivatives of ``F0``::

    grad_w = W^-T grad_y
    Hess_w = W^-T (Hess_y - sum_k grad_w[k] d2F0_k) W^-1
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DimensionMismatch, NonConvergence, SingularHessian, SingularJacobian
from .expr import Expr, as_expr, diff, evaluate, free_vars
from .model import BalanceSystem, REGULARITY_TOL, _regular, eval_array


@lru_cache(maxsize=256)
def derivative_exprs(h0: Expr, names: tuple):
    grad = tuple(diff(h0, v) for v in names)
    hess = tuple(tuple(diff(g, v) for v in names) for g in grad)
    return grad, hess


@dataclass
class PotentialAt:
    value: float
    grad_w: np.ndarray
    hess_w: np.ndarray
    w: np.ndarray
    W: np.ndarray


@dataclass(frozen=True, eq=False)
class Potential:
    sys: BalanceSystem
    expr: Expr
    coords: str = "w"

    def __post_init__(self):
        object.__setattr__(self, "expr", as_expr(self.expr))
        if self.coords not in ("w", "y"):
            raise ValueError("coords must be 'w' or 'y'")
        names = self.names
        extra = free_vars(self.expr) - set(names)
        if extra:
            raise DimensionMismatch(
                f"potential uses {sorted(extra)}; expected variables among {list(names)}"
            )

    @property
    def names(self) -> tuple:
        return self.sys.w_names if self.coords == "w" else self.sys.field_names

    def at(self, p) -> PotentialAt:
        sys = self.sys
        y = sys.point(p)
        yenv = sys.env(y)
        W = eval_array(sys.density_grad, yenv)
        w = eval_array(sys.densities, yenv)
        grad_e, hess_e = derivative_exprs(self.expr, self.names)
        if self.coords == "w":
            env = dict(zip(sys.w_names, w))
            return PotentialAt(
                value=evaluate(self.expr, env),
                grad_w=eval_array(grad_e, env),
                hess_w=eval_array(hess_e, env),
                w=w,
                W=W,
            )
        if not _regular(W, np.linalg.det(W), REGULARITY_TOL):
            raise SingularJacobian(f"density Jacobian singular at {y.tolist()}")
        Winv = np.linalg.inv(W)
        gy = eval_array(grad_e, yenv)
        Hy = eval_array(hess_e, yenv)
        gw = Winv.T @ gy
        D2 = eval_array(sys.density_hess, yenv)  # (m, m, m)
        Hw = Winv.T @ (Hy - np.tensordot(gw, D2, axes=1)) @ Winv
        return PotentialAt(
            value=evaluate(self.expr, yenv), grad_w=gw, hess_w=0.5 * (Hw + Hw.T), w=w, W=W
        )

    def main_fields(self, p) -> np.ndarray:
        return self.at(p).grad_w

    def invert_gradient(self, lam, guess, max_iter: int = 60, tol: float = 1e-12) -> np.ndarray:
        """State ``y`` whose main fields equal ``lam`` (Newton from ``guess``)."""
        lam = np.asarray(lam, dtype=float)
        y = self.sys.point(guess).copy()
        target = tol * (1.0 + np.linalg.norm(lam))
        at = self.at(y)
        r = at.grad_w - lam
        rn = np.linalg.norm(r)
        for _ in range(max_iter):
            if rn <= target:
                return y
            J = at.hess_w @ at.W
            try:
                step = np.linalg.solve(J, r)
            except np.linalg.LinAlgError:
                raise SingularHessian("Hessian of the potential is singular") from None
            t = 1.0
            improved = False
            while t >= 1e-4:
                y_new = y - t * step
                try:
                    at_new = self.at(y_new)
                    r_new = at_new.grad_w - lam
                    rn_new = np.linalg.norm(r_new)
                except ArithmeticError:
                    rn_new = np.inf
                if rn_new < rn:
                    improved = True
                    break
                t *= 0.5
            if not improved:
                break
            y, at, r, rn = y_new, at_new, r_new, rn_new
        if rn <= 1e2 * target:
            return y
        raise NonConvergence(f"gradient-map inversion stalled at residual {rn:.3e}")


def w_potential_at(h0: Expr, point: dict):
    """Value, gradient and Hessian of a bare expression at a named point."""
    names = tuple(point)
    grad_e, hess_e = derivative_exprs(as_expr(h0), names)
    return evaluate(h0, point), eval_array(grad_e, point), eval_array(hess_e, point)
