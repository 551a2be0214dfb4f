"""Scalar balance law ``u_t + c(u)_x = Pi(u)`` and its supplementary laws."""

from __future__ import annotations

from ..expr import as_expr, diff, integral, simplify, substitute, var
from ..model import BalanceSystem, make_system
from ..sbl import SblCandidate


def scalar_law(c, Pi=0.0, box=(-1.0, 1.0), name: str = "scalar") -> BalanceSystem:
    return make_system(["u"], ["u"], [[as_expr(c)]], [as_expr(Pi)], [box], name=name)


def scalar_sbl(c, K0, u0: float = 0.0, Pi=0.0) -> SblCandidate:
    """``K1 = c' K0 - int_{u0}^u c'' K0``, ``Q = K0' Pi``; main field ``K0'``."""
    c, K0, Pi = as_expr(c), as_expr(K0), as_expr(Pi)
    c1 = diff(c, "u")
    c2 = diff(c1, "u")
    s = var("s")
    K1 = c1 * K0
    inner = simplify(substitute(c2 * K0, {"u": s}))
    if inner != as_expr(0.0):
        K1 = K1 - integral(inner, "s", u0, var("u"))
    return SblCandidate(K0=K0, KA=(simplify(K1),), Q=simplify(diff(K0, "u") * Pi))


def burgers(Pi=0.0, box=(-1.0, 2.0)) -> BalanceSystem:
    return scalar_law("u^2/2", Pi, box, name="burgers")
