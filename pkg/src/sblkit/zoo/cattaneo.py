"""Cattaneo heat propagation and its complete family of supplementary laws.

Fields ``(theta, q1, q2, q3)``; balance system

    d_t eps(theta, q) + div q = 0
    d_t (tau(theta) q^A) + d_A Lambda(theta) = -q^A

Every supplementary law is fixed by ``lambda0 = a0 + alpha*lhat0(theta)`` and
``Kt^A = k^A Lambda + m^A + alpha*Khat^A(theta)``; the internal energy must
then be the one returned by :func:`cattaneo_internal_energy`. All derivatives
are taken in ``theta`` with the chain rule through ``Lambda`` (so the
``d/dLambda`` of the closed forms becomes ``(1/Lambda') d/dtheta``).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DegenerateLambda0, DimensionMismatch, InvalidSpec
from ..expr import ZERO, Expr, add, as_expr, diff, exp, free_vars, integral, mul, simplify, substitute, var
from ..model import BalanceSystem, make_system
from ..sbl import SblCandidate

FIELDS = ("theta", "q1", "q2", "q3")
TH = var("theta")
Q = tuple(var(f"q{a}") for a in (1, 2, 3))


def _theta_only(e, what):
    e = as_expr(e)
    extra = free_vars(e) - {"theta"}
    if extra:
        raise DimensionMismatch(f"{what} may only depend on theta, found {sorted(extra)}")
    return e


@dataclass(frozen=True, eq=False)
class CattaneoSpec:
    tau: Expr
    Lambda: Expr
    eps_eq: Expr
    box: tuple = ((0.5, 2.0), (-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0))
    theta0: float = None  # quadrature base; defaults to the lower theta bound

    def __post_init__(self):
        for name in ("tau", "Lambda", "eps_eq"):
            object.__setattr__(self, name, _theta_only(getattr(self, name), name))
        box = tuple((float(a), float(b)) for a, b in self.box)
        if len(box) != 4:
            raise DimensionMismatch("Cattaneo box needs intervals for theta, q1, q2, q3")
        object.__setattr__(self, "box", box)
        if self.theta0 is None:
            object.__setattr__(self, "theta0", box[0][0])

    @property
    def dLambda(self):
        return diff(self.Lambda, "theta")

    def theta_grid(self, count: int = 65):
        lo, hi = self.box[0]
        return np.linspace(lo, hi, count)

    def validate(self, count: int = 65) -> "CattaneoSpec":
        dL = self.dLambda
        for t in self.theta_grid(count):
            if not dL(theta=t) > 0:
                raise InvalidSpec(f"Lambda must be strictly increasing; Lambda'({t}) <= 0")
            if self.tau(theta=t) == 0:
                raise InvalidSpec(f"tau vanishes at theta={t}")
        return self


@dataclass(frozen=True, eq=False)
class CattaneoSblParams:
    lambda0_hat: Expr
    Khat: tuple = (ZERO, ZERO, ZERO)
    alpha: float = 1.0
    a0: float = 0.0
    k: tuple = (0.0, 0.0, 0.0)
    m: tuple = (0.0, 0.0, 0.0)
    f0: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "lambda0_hat", _theta_only(self.lambda0_hat, "lambda0_hat"))
        if len(self.Khat) != 3 or len(self.k) != 3 or len(self.m) != 3:
            raise DimensionMismatch("Khat, k and m need three components")
        object.__setattr__(self, "Khat", tuple(_theta_only(e, "Khat") for e in self.Khat))
        object.__setattr__(self, "k", tuple(float(v) for v in self.k))
        object.__setattr__(self, "m", tuple(float(v) for v in self.m))
        if self.alpha < 0:
            raise InvalidSpec("alpha must be non-negative")

    @property
    def lambda0(self) -> Expr:
        return simplify(add(self.a0, mul(self.alpha, self.lambda0_hat)))

    def Ktilde(self, spec: CattaneoSpec) -> tuple:
        return tuple(
            simplify(add(mul(k, spec.Lambda), m, mul(self.alpha, Kh)))
            for k, m, Kh in zip(self.k, self.m, self.Khat)
        )


def _qq():
    return add(*[qa ** 2 for qa in Q])


def _check_lambda0(spec, dl0, count: int = 65):
    vals = [dl0(theta=t) for t in spec.theta_grid(count)]
    scale = max(1.0, max(abs(v) for v in vals))
    if min(abs(v) for v in vals) <= 1e-12 * scale or min(vals) < 0 < max(vals):
        raise DegenerateLambda0("lambda0_hat' vanishes on the theta interval")


def cattaneo_internal_energy(spec: CattaneoSpec, params: CattaneoSblParams) -> Expr:
    """Internal energy compatible with the given supplementary-law parameters.

    ``eps = eps_eq + tau'/(2 L')|q|^2 - (tau/l')[ (l'/L')'|q|^2/2 + (Kh'_A/L')' q^A ]``
    with ``l = lhat0``, ``L = Lambda``; independent of ``alpha, a0, k, m``.
    """
    dl = diff(params.lambda0_hat, "theta")
    _check_lambda0(spec, dl)
    dL = spec.dLambda
    dtau = diff(spec.tau, "theta")
    quad = add(
        mul(dtau, 1 / (2 * dL)),
        -mul(spec.tau / dl, 0.5, diff(dl / dL, "theta")),
    )
    lin = [-mul(spec.tau / dl, diff(diff(Kh, "theta") / dL, "theta")) for Kh in params.Khat]
    terms = [spec.eps_eq, mul(simplify(quad), _qq())]
    for c, qa in zip(lin, Q):
        c = simplify(c)
        if c != ZERO:
            terms.append(mul(c, qa))
    return simplify(add(*terms))


def cattaneo_system(spec: CattaneoSpec, internal_energy, name: str = "cattaneo") -> BalanceSystem:
    eps = as_expr(internal_energy)
    extra = free_vars(eps) - set(FIELDS)
    if extra:
        raise DimensionMismatch(f"internal energy uses {sorted(extra)}")
    densities = [eps] + [spec.tau * qa for qa in Q]
    fluxes = []
    for B in range(3):
        row = [Q[B]] + [spec.Lambda if C == B else ZERO for C in range(3)]
        fluxes.append(row)
    productions = [ZERO] + [-qa for qa in Q]
    return make_system(FIELDS, densities, fluxes, productions, spec.box, name=name)


def _theta_integral(f: Expr, theta0: float) -> Expr:
    """``int_{theta0}^{theta} f(s) ds`` as a quadrature node."""
    return integral(substitute(f, {"theta": var("s")}), "s", theta0, TH)


def cattaneo_sbl(spec: CattaneoSpec, params: CattaneoSblParams, base: float = None) -> SblCandidate:
    """The supplementary law of the family selected by ``params``.

    ``K0 = l0 eps - int l0' eps_eq + (tau/L')(l0'|q|^2/2 + Kt'_A q^A) + f0``,
    ``K^A = l0 q^A + Kt^A``, ``Q = -(l0'|q|^2 + Kt'_A q^A)/L'``.
    """
    theta0 = spec.theta0 if base is None else float(base)
    eps = cattaneo_internal_energy(spec, params)
    l0 = params.lambda0
    dl0 = diff(l0, "theta")
    dL = spec.dLambda
    Kt = params.Ktilde(spec)
    dKt = [diff(k, "theta") for k in Kt]
    lin = add(*[mul(d, qa) for d, qa in zip(dKt, Q)])
    bracket = add(mul(0.5, dl0, _qq()), lin)
    K0_terms = [mul(l0, eps)]
    eq_part = simplify(mul(dl0, spec.eps_eq))
    if eq_part != ZERO:
        K0_terms.append(-_theta_integral(eq_part, theta0))
    K0_terms += [mul(spec.tau / dL, bracket), params.f0]
    K0 = simplify(add(*K0_terms))
    KA = tuple(simplify(add(mul(l0, qa), k)) for qa, k in zip(Q, Kt))
    Qs = simplify(-(add(mul(dl0, _qq()), lin) / dL))
    return SblCandidate(K0=K0, KA=KA, Q=Qs)


def cattaneo_main_fields(spec: CattaneoSpec, params: CattaneoSblParams) -> tuple:
    """Closed-form multipliers ``(l0, (l0' q^A + Kt^A')/L')``."""
    l0 = params.lambda0
    dl0 = diff(l0, "theta")
    dL = spec.dLambda
    Kt = params.Ktilde(spec)
    return (l0,) + tuple(simplify((dl0 * qa + diff(k, "theta")) / dL) for qa, k in zip(Q, Kt))


def cattaneo_production(spec: CattaneoSpec, params: CattaneoSblParams) -> Expr:
    return cattaneo_sbl(spec, params).Q


@dataclass
class EntropyVerdict:
    is_entropy_type: bool
    min_production: float
    argmin: list
    kt_vanishes: bool

    def to_dict(self):
        return {
            "is_entropy_type": self.is_entropy_type,
            "min_production": self.min_production,
            "argmin": self.argmin,
            "kt_derivative_vanishes": self.kt_vanishes,
        }


def cattaneo_entropy_check(spec: CattaneoSpec, params: CattaneoSblParams, samples, tol: float = 1e-12):
    """Sign of the production over ``samples`` (rows ``(theta, q1, q2, q3)``)."""
    Qe = cattaneo_production(spec, params)
    best, arg = np.inf, None
    for p in samples:
        val = Qe(dict(zip(FIELDS, p)))
        if val < best:
            best, arg = val, [float(v) for v in p]
    # the linear term Kt'.q has no sign, so it must vanish identically
    dKt = [diff(Kt, "theta") for Kt in params.Ktilde(spec)]
    kt_zero = all(abs(d(theta=float(p[0]))) <= tol for d in dKt for p in samples)
    return EntropyVerdict(
        is_entropy_type=bool(best >= -tol and kt_zero),
        min_production=float(best),
        argmin=arg,
        kt_vanishes=kt_zero,
    )


def cattaneo_lambda0_from_energy(spec: CattaneoSpec, mu, base: float = None, scale: float = 1.0) -> Expr:
    """``lhat0`` reproducing the quadratic energy coefficient ``mu(theta)``.

    ``lhat0(theta) = scale * int_{b}^{theta} L'(u) tau(u) exp(-2 int_b^u mu L'/tau ds) du``.
    """
    mu = _theta_only(mu, "mu")
    b = spec.theta0 if base is None else float(base)
    dL = spec.dLambda
    s, u = var("s"), var("u")
    inner_f = simplify(substitute(mu * dL / spec.tau, {"theta": s}))
    inner = integral(inner_f, "s", b, u) if inner_f != ZERO else ZERO
    outer_f = mul(substitute(dL * spec.tau, {"theta": u}), exp(-2 * inner))
    return simplify(mul(scale, integral(simplify(outer_f), "u", b, TH)))


def quadratic_energy_coefficient(spec: CattaneoSpec, lambda0_hat) -> Expr:
    """``mu = tau'/(2L') - (tau/(2 l'))(l'/L')'`` for a q-symmetric energy."""
    dl = diff(as_expr(lambda0_hat), "theta")
    dL = spec.dLambda
    return simplify(
        diff(spec.tau, "theta") / (2 * dL) - spec.tau / (2 * dl) * diff(dl / dL, "theta")
    )


# -- simplified model: constant tau, equilibrium energy ---------------------

def constant_tau_density(spec: CattaneoSpec, alpha: float, c: float = 0.0, beta=(0.0, 0.0, 0.0), d: float = 0.0) -> Expr:
    """Densities for constant ``tau`` and ``eps = eps(theta)`` (fields as variables).

    ``h0 = 2 alpha int (Lambda/tau) eps' + alpha|q|^2 + c eps + beta.q + d``
    """
    if free_vars(spec.tau):
        raise InvalidSpec("this density family needs a constant relaxation time")
    de = diff(spec.eps_eq, "theta")
    terms = [
        mul(2 * alpha, _theta_integral(simplify(spec.Lambda / spec.tau * de), spec.theta0)),
        mul(alpha, _qq()),
        mul(c, spec.eps_eq),
        add(*[mul(b, qa) for b, qa in zip(beta, Q)]),
        d,
    ]
    return simplify(add(*terms))


def linear_density(c: float = 0.0, beta=(0.0, 0.0, 0.0), d: float = 0.0) -> Expr:
    """For a q-dependent energy only linear densities survive (in ``w``)."""
    return simplify(add(mul(c, "w1"), *[mul(b, f"w{i + 2}") for i, b in enumerate(beta)], d))


def default_spec(kappa: float = 2.0, tau: float = 1.0, cv: float = 1.5) -> CattaneoSpec:
    """``tau`` constant, ``Lambda = kappa theta``, ``eps_eq = cv theta``."""
    return CattaneoSpec(tau=as_expr(tau), Lambda=kappa * TH, eps_eq=cv * TH)
