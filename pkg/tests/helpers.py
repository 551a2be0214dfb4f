"""Shared test utilities: random expressions and finite differences."""

from __future__ import annotations

import numpy as np

from sblkit.expr import Expr, add, as_expr, cos, exp, ln, mul, sin, sqrt, tanh, var

VARS = ("x", "y", "z")


def random_expr(rng: np.random.Generator, depth: int = 3, names=VARS) -> Expr:
    """Random expression that is smooth and finite on ``[-1, 1]^3``."""
    if depth == 0 or rng.random() < 0.25:
        if rng.random() < 0.7:
            return var(names[rng.integers(len(names))])
        return as_expr(float(np.round(rng.uniform(-2, 2), 3)))
    kind = rng.integers(10)
    a = random_expr(rng, depth - 1, names)
    if kind == 0:
        return add(a, random_expr(rng, depth - 1, names))
    if kind == 1:
        return a - random_expr(rng, depth - 1, names)
    if kind == 2:
        return mul(a, random_expr(rng, depth - 1, names))
    if kind == 3:
        return a / (2.5 + cos(random_expr(rng, depth - 1, names)))
    if kind == 4:
        return a ** int(rng.integers(2, 4))
    if kind == 5:
        return exp(tanh(a))
    if kind == 6:
        return ln(1.5 + sin(a))
    if kind == 7:
        return sqrt(1.0 + a ** 2)
    if kind == 8:
        return (2.0 + tanh(a)) ** rng.choice([-1, 0.5, -1.5])
    return -a


def random_point(rng, names=VARS, lo=-1.0, hi=1.0) -> dict:
    return {n: float(rng.uniform(lo, hi)) for n in names}


def central_fd(e: Expr, v: str, b: dict, h: float = 1e-5) -> float:
    bp, bm = dict(b), dict(b)
    bp[v] += h
    bm[v] -= h
    return (e(bp) - e(bm)) / (2 * h)


CRITERIA = []  # lines repeated in the terminal summary


def report(number: int, name: str, ok: bool, detail: str = "") -> None:
    line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}: {name}" + (f" ({detail})" if detail else "")
    CRITERIA.append(line)
    print(line)
