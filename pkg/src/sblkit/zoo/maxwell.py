"""Vacuum Maxwell equations as a six-field balance system in three dimensions."""

from __future__ import annotations

from ..expr import ZERO, add, mul, var
from ..model import BalanceSystem, make_system
from ..sbl import SblCandidate

E = tuple(var(f"E{i}") for i in (1, 2, 3))
B = tuple(var(f"B{i}") for i in (1, 2, 3))


def _levi(i, j, k):
    return (i - j) * (j - k) * (k - i) // 2


def _cross_term(i, A, vec, sign):
    terms = [mul(sign * _levi(i, A, k), vec[k]) for k in range(3) if _levi(i, A, k)]
    return add(*terms) if terms else ZERO


def maxwell_system(box=None) -> BalanceSystem:
    """``d_t E - curl B = 0``, ``d_t B + curl E = 0`` (units with c = 1)."""
    names = [f"E{i}" for i in (1, 2, 3)] + [f"B{i}" for i in (1, 2, 3)]
    fluxes = []
    for A in range(3):
        row = [_cross_term(i, A, B, -1) for i in range(3)] + [_cross_term(i, A, E, 1) for i in range(3)]
        fluxes.append(row)
    box = box or [(-1.0, 1.0)] * 6
    return make_system(names, list(E) + list(B), fluxes, None, box, name="maxwell")


def divergence_candidate(which: str = "E") -> SblCandidate:
    vec = E if which == "E" else B
    return SblCandidate(K0=ZERO, KA=vec, Q=ZERO)


def energy_density():
    """Field energy ``(|E|^2 + |B|^2)/2`` in density coordinates."""
    return mul(0.5, add(*[var(f"w{i}") ** 2 for i in range(1, 7)]))


def poynting_candidate() -> SblCandidate:
    K0 = mul(0.5, add(*[e ** 2 for e in E], *[b ** 2 for b in B]))
    S = tuple(
        add(mul(E[(A + 1) % 3], B[(A + 2) % 3]), -mul(E[(A + 2) % 3], B[(A + 1) % 3]))
        for A in range(3)
    )
    return SblCandidate(K0=K0, KA=S, Q=ZERO)
