"""Two fields in one space dimension with constant flux matrices.

With identity densities the defining system is the single equation
``a h11 + 2b h12 + c h22 = 0`` where ``a = -F_1,y2``, ``2b = F_1,y1 - F_2,y2``
and ``c = F_2,y1``. The five tabulated cases and solution generators live here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..expr import Expr, ZERO, add, as_expr, cos, exp, mul, sin, var
from ..model import BalanceSystem, make_system

W1, W2 = var("w1"), var("w2")


@dataclass
class TableCase:
    row: int
    system: BalanceSystem
    equation: str
    expected_type: str
    solutions: list  # h0 expressions in (w1, w2)


def complex_power_parts(X: Expr, Y: Expr, k: int):
    """Real and imaginary parts of ``(X + iY)^k`` as polynomials."""
    re_terms, im_terms = [], []
    for j in range(k + 1):
        coeff = math.comb(k, j)
        term = mul(coeff, X ** (k - j) if k - j else 1.0, Y ** j if j else 1.0)
        r = j % 4
        if r == 0:
            re_terms.append(term)
        elif r == 1:
            im_terms.append(term)
        elif r == 2:
            re_terms.append(-term)
        else:
            im_terms.append(-term)
    return add(*re_terms) if re_terms else ZERO, add(*im_terms) if im_terms else ZERO


def harmonic_family(count: int = 50) -> list:
    """Harmonic functions of ``(w1, w2)``: polynomial and exponential families."""
    out = []
    k = 2
    while len(out) < count:
        re, im = complex_power_parts(W1, W2, k)
        out += [re, im]
        s = 0.5 * (k - 1)
        out += [mul(exp(s * W1), cos(s * W2)), mul(exp(-s * W2), sin(s * W1))]
        k += 1
    return out[:count]


def _linear_flux_system(M, box, name):
    """Flux ``F1 = M^T y`` for the tabulated matrix ``M`` (identity densities)."""
    y1, y2 = var("y1"), var("y2")
    f1 = add(mul(M[0][0], y1), mul(M[1][0], y2))
    f2 = add(mul(M[0][1], y1), mul(M[1][1], y2))
    return make_system(["y1", "y2"], [y1, y2], [[f1, f2]], None, box, name=name)


def table_one_case(row: int, a: float = 2.0, b: float = 1.0, box=((-1.0, 1.0), (-1.0, 1.0))) -> TableCase:
    if row == 1:
        # diag(a, b): h12 = 0
        sys = _linear_flux_system([[a, 0.0], [0.0, b]], box, "table1_row1")
        sols = [add(exp(W1), W2 ** 4), add(W1 ** 2, mul(-1.0, W2 ** 2)), add(sin(W1), cos(W2)), mul(3.0, W1 ** 3)]
        kind = "Parabolic" if a == b else "Hyperbolic"
        return TableCase(1, sys, "h12 = 0", kind, sols)
    if row == 2:
        # Jordan block: h22 = 0
        sys = _linear_flux_system([[0.0, a], [0.0, 0.0]], box, "table1_row2")
        sols = [add(mul(exp(W1), W2), W1 ** 3), add(mul(sin(W1), W2), cos(W1)), mul(W1 ** 2, W2)]
        return TableCase(2, sys, "h22 = 0", "Parabolic", sols)
    if row == 3:
        sys = _linear_flux_system([[0.0, 1.0], [-1.0, 0.0]], box, "table1_row3")
        return TableCase(3, sys, "h11 + h22 = 0", "Elliptic", harmonic_family(8))
    if row == 4:
        sys = _linear_flux_system([[0.0, 1.0], [1.0, 0.0]], box, "table1_row4")
        phi, psi = W1 + W2, W1 - W2
        sols = [add(exp(phi), psi ** 4), add(phi ** 2, psi ** 2), add(sin(phi), cos(psi))]
        return TableCase(4, sys, "h11 - h22 = 0", "Hyperbolic", sols)
    if row == 5:
        if b == 0:
            raise ValueError("row 5 needs b != 0")
        sys = _linear_flux_system([[a, b], [-b, -a]], box, "table1_row5")
        disc = a * a - b * b
        sols = []
        if disc > 0:
            for mu in ((-a + math.sqrt(disc)) / b, (-a - math.sqrt(disc)) / b):
                z = add(W1, mul(mu, W2))
                sols += [exp(z), z ** 3]
            kind = "Hyperbolic"
        elif disc < 0:
            re_mu, im_mu = -a / b, math.sqrt(-disc) / abs(b)
            X, Y = add(W1, mul(re_mu, W2)), mul(im_mu, W2)
            for k in (2, 3):
                sols += list(complex_power_parts(X, Y, k))
            kind = "Elliptic"
        else:
            mu = -a / b
            z = add(W1, mul(mu, W2))
            sols += [exp(z), mul(W2, exp(z))]
            kind = "Parabolic"
        return TableCase(5, sys, f"h11 + 2({a / b:g})h12 + h22 = 0", kind, sols)
    raise ValueError("row must be in 1..5")


def wave_system(box=((-1.0, 1.0), (-1.0, 1.0))) -> BalanceSystem:
    return table_one_case(4, box=box).system


def laplace_system(box=((-1.0, 1.0), (-1.0, 1.0))) -> BalanceSystem:
    return table_one_case(3, box=box).system


def wave_convex_density(h1: str = "exp", h2: str = "square") -> Expr:
    """``h1(phi) + h2(psi)`` with ``phi = w1 + w2``, ``psi = w1 - w2`` (both convex)."""
    phi, psi = W1 + W2, W1 - W2
    gens = {"exp": exp, "square": lambda z: z ** 2, "cosh": lambda z: 0.5 * (exp(z) + exp(-z)), "quartic": lambda z: z ** 4 + z ** 2}
    return add(gens[h1](phi), gens[h2](psi))
