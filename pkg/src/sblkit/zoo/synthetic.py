"""Small synthetic systems with known densities.

The Cattaneo system is never C-regular (every combination of its spatial flux
Jacobians has rank two), so the first-order reformulation is exercised on
these instead.
"""

from __future__ import annotations

from ..expr import add, as_expr, diff, mul, var
from ..model import BalanceSystem, make_system


def linear_symmetric_system(S, box=None, name: str = "linear_symmetric") -> BalanceSystem:
    """``F^A = S_A y`` with symmetric ``S_A``; ``h0 = |w|^2/2`` is admissible."""
    n = len(S)
    m = len(S[0])
    ys = [var(f"y{i + 1}") for i in range(m)]
    fluxes = [[add(*[mul(S[A][i][j], ys[j]) for j in range(m)]) for i in range(m)] for A in range(n)]
    box = box or [(-1.0, 1.0)] * m
    return make_system([y.name for y in ys], ys, fluxes, None, box, name=name)


def gradient_flux_system(potentials, fields=("y1", "y2"), box=None, name: str = "gradient_flux") -> BalanceSystem:
    """``F^A_i = d phi_A / d y^i`` with identity densities (``h0 = |w|^2/2`` closes)."""
    potentials = [as_expr(p) for p in potentials]
    fluxes = [[diff(p, f) for f in fields] for p in potentials]
    box = box or [(-1.0, 1.0)] * len(fields)
    return make_system(fields, [var(f) for f in fields], fluxes, None, box, name=name)


def gradient_flux_potentials(potentials, fields=("y1", "y2")):
    """Closed-form ``K^A = y . grad phi_A - phi_A`` for ``h0 = |w|^2/2``."""
    out = []
    for p in potentials:
        p = as_expr(p)
        out.append(add(*[mul(var(f), diff(p, f)) for f in fields], -p))
    return out


def default_gradient_flux() -> BalanceSystem:
    return gradient_flux_system(
        ["exp(y1) + y2^2/2 + y1*y2/4", "y1^2/2 + exp(y2) + y1*y2/5"], box=[(-0.8, 0.8), (-0.8, 0.8)]
    )


def coupled_relaxation() -> BalanceSystem:
    """Two-field system with relaxation, used for the residual inequality."""
    return make_system(
        ["y1", "y2"], ["y1", "y2"], [["y2", "y1"]], ["0", "-y2"], [(-1.0, 1.0), (-1.0, 1.0)],
        name="relaxation",
    )
