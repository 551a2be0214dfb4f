"""The ten acceptance criteria, each reporting one PASS/FAIL line.

Expected values are computed here from closed forms written out by hand with
numpy/scipy, not through the library's symbolic engine.
"""

import math
import time

import numpy as np
from scipy.integrate import quad

from helpers import VARS, central_fd, random_expr, random_point, report
from sblkit.defining import classify, defining_residual, epsilon_independence_check
from sblkit.expr import diff, parse_expr
from sblkit.linalg import definiteness
from sblkit.potential import Potential
from sblkit.sampling import sample_box
from sblkit.sbl import (
    MainFields,
    build_candidate,
    candidate_from_h0,
    dual_hessian_check,
    ll_residual,
    solve_main_fields,
    symmetric_hyperbolic_check,
)
from sblkit.zoo import (
    CattaneoSblParams,
    CattaneoSpec,
    all_systems,
    burgers,
    cattaneo_internal_energy,
    cattaneo_sbl,
    cattaneo_system,
    default_cattaneo,
    default_gradient_flux,
    default_spec,
    harmonic_family,
    linear_symmetric_system,
    constant_tau_density,
    scalar_law,
    scalar_sbl,
    table_one_case,
    wave_convex_density,
)
from sblkit.zoo.cattaneo import FIELDS


def test_criterion_01_gradient_fidelity():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(100):
        e = random_expr(rng, 4)
        ds = {v: diff(e, v) for v in VARS}
        for _ in range(100):
            b = random_point(rng)
            v = VARS[rng.integers(3)]
            fd = central_fd(e, v, b, 1e-5)
            worst = max(worst, abs(ds[v](b) - fd) / max(1.0, abs(fd)))
    ok = worst <= 1e-6
    report(1, "symbolic derivatives vs central differences", ok, f"max rel err {worst:.2e}")
    assert ok


def test_criterion_02_linear_density():
    worst = 0.0
    for name, s in all_systems().items():
        h0 = " + ".join(f"{0.5 + 0.25 * i}*{w}" for i, w in enumerate(s.w_names)) + " - 1.5"
        for p in sample_box(s.domain_box, 200, seed=11):
            worst = max(worst, defining_residual(s, h0, p).max_abs)
    ok = worst <= 1e-12
    report(2, "linear h0 has zero residual on every zoo system", ok, f"max residual {worst:.1e}")
    assert ok


def test_criterion_03_cattaneo_classification():
    s = default_cattaneo()
    t0 = time.perf_counter()
    rep = classify(s, 200, seed=0)
    dt = time.perf_counter() - t0
    ok = rep.elliptic and rep.holonomic_verdict == "Holonomic" and rep.regular_points == 200 and dt < 5.0
    report(3, "Cattaneo elliptic and holonomic", ok, f"{rep.holonomic_verdict}, elliptic={rep.elliptic}, {dt:.2f} s")
    assert ok


class _Draw:
    """Random Cattaneo data with hand-coded derivatives for the column oracle."""

    def __init__(self, rng):
        self.t1 = float(rng.uniform(0.0, 0.5))  # tau = 1 + t1 theta
        self.l3 = float(rng.uniform(0.0, 0.5))  # Lambda = theta + l3 theta^3
        self.e = rng.uniform(0.5, 2.0, 2)  # eps_eq = e0 theta + e1 theta^2
        self.c = rng.uniform(0.2, 1.0, 3)  # lhat = c0 ln theta + c1 theta + c2 theta^2
        self.d = rng.normal(size=3)  # Khat_A = d_A theta^2 + g_A sin theta
        self.g = rng.normal(size=3)
        self.a0 = float(rng.normal())
        self.k = rng.normal(size=3)
        self.alpha = float(rng.uniform(0.1, 2.0))
        self.m = rng.normal(size=3)
        self.f0 = float(rng.normal())

    def spec(self):
        return CattaneoSpec(
            tau=parse_expr(f"1 + {self.t1!r}*theta"),
            Lambda=parse_expr(f"theta + {self.l3!r}*theta^3"),
            eps_eq=parse_expr(f"{float(self.e[0])!r}*theta + {float(self.e[1])!r}*theta^2"),
        )

    def params(self):
        c, d, g = ([float(v) for v in a] for a in (self.c, self.d, self.g))
        return CattaneoSblParams(
            lambda0_hat=parse_expr(f"{c[0]!r}*ln(theta) + {c[1]!r}*theta + {c[2]!r}*theta^2"),
            Khat=tuple(parse_expr(f"{d[A]!r}*theta^2 + {g[A]!r}*sin(theta)") for A in range(3)),
            alpha=self.alpha, a0=self.a0, k=tuple(self.k), m=tuple(self.m), f0=self.f0,
        )

    # closed forms in theta
    def tau(self, t): return 1 + self.t1 * t
    def dtau(self, t): return self.t1
    def dL(self, t): return 1 + 3 * self.l3 * t * t
    def ddL(self, t): return 6 * self.l3 * t
    def Lam(self, t): return t + self.l3 * t ** 3
    def eps_eq(self, t): return self.e[0] * t + self.e[1] * t * t
    def lh(self, t): return self.c[0] * math.log(t) + self.c[1] * t + self.c[2] * t * t
    def dlh(self, t): return self.c[0] / t + self.c[1] + 2 * self.c[2] * t
    def ddlh(self, t): return -self.c[0] / t ** 2 + 2 * self.c[2]
    def Kh(self, t): return self.d * t * t + self.g * math.sin(t)
    def dKh(self, t): return 2 * self.d * t + self.g * math.cos(t)
    def ddKh(self, t): return 2 * self.d - self.g * math.sin(t)

    def eps(self, t, q):
        dL, ddL, tau = self.dL(t), self.ddL(t), self.tau(t)
        ratio_l = (self.ddlh(t) * dL - self.dlh(t) * ddL) / dL ** 2
        ratio_k = (self.ddKh(t) * dL - self.dKh(t) * ddL) / dL ** 2
        quad_c = self.dtau(t) / (2 * dL) - tau / self.dlh(t) * 0.5 * ratio_l
        return self.eps_eq(t) + quad_c * (q @ q) - tau / self.dlh(t) * (ratio_k @ q)

    def columns(self, t, q):
        """Rows (K0, K1, K2, K3, Q); columns (a0, k1..3, alpha, m1..3, f0)."""
        eps = self.eps(t, q)
        dL, tau = self.dL(t), self.tau(t)
        cols = np.zeros((5, 9))
        cols[:, 0] = [eps, *q, 0.0]
        for A in range(3):
            col = np.zeros(5)
            col[0] = tau * q[A]
            col[1 + A] = self.Lam(t)
            col[4] = -q[A]
            cols[:, 1 + A] = col
        integ = quad(lambda s: self.dlh(s) * self.eps_eq(s), 0.5, t, epsabs=1e-13, epsrel=1e-12)[0]
        qq, kq = q @ q, self.dKh(t) @ q
        cols[:, 4] = [
            self.lh(t) * eps - integ + tau / dL * (0.5 * self.dlh(t) * qq + kq),
            *(self.lh(t) * q + self.Kh(t)),
            -(self.dlh(t) * qq + kq) / dL,
        ]
        for A in range(3):
            cols[1 + A, 5 + A] = 1.0
        cols[0, 8] = 1.0
        return cols

    def truth(self):
        return np.array([self.a0, *self.k, self.alpha, *self.m, self.f0])


def test_criterion_04_cattaneo_family():
    rng = np.random.default_rng(44)
    worst_ll, worst_coef, worst_eps = 0.0, 0.0, 0.0
    all_feasible = True
    for _ in range(3):
        dr = _Draw(rng)
        spec, params = dr.spec(), dr.params()
        eps = cattaneo_internal_energy(spec, params)
        sys = cattaneo_system(spec, eps)
        cand = cattaneo_sbl(spec, params).check(sys)
        rows, rhs = [], []
        for p in sample_box(spec.box, 100, seed=int(rng.integers(1 << 30))):
            t, q = p[0], p[1:]
            worst_eps = max(worst_eps, abs(eps(dict(zip(FIELDS, p))) - dr.eps(t, q)))
            mf = solve_main_fields(sys, cand, p)
            if not isinstance(mf, MainFields):
                all_feasible = False
                continue
            r = ll_residual(sys, cand, mf, p)
            worst_ll = max(worst_ll, r.r_flux, r.r_source)
            env = dict(zip(FIELDS, p))
            rows.append(dr.columns(t, q))
            rhs.append([cand.K0(env), *(k(env) for k in cand.KA), cand.Q(env)])
        coef = np.linalg.lstsq(np.vstack(rows), np.concatenate(rhs), rcond=None)[0]
        worst_coef = max(worst_coef, float(np.max(np.abs(coef[:5] - dr.truth()[:5]))))
    ok = all_feasible and worst_ll < 1e-9 and worst_coef <= 1e-6 and worst_eps <= 1e-10
    report(4, "Cattaneo family: LL residual and (a0, k, alpha) recovery", ok,
           f"LL {worst_ll:.1e}, coefficients {worst_coef:.1e}, energy {worst_eps:.1e}")
    assert ok


def test_criterion_05_second_law():
    spec = default_spec()
    pts = sample_box(spec.box, 500, seed=5)
    # lhat0' <= 0 with Lambda' > 0 and Kt' = 0 (Khat = 0 and k = 0)
    entropy = CattaneoSblParams(lambda0_hat=parse_expr("-theta - ln(theta)"), alpha=0.7, a0=0.2, m=(0.3, 0.0, -0.1))
    Q = cattaneo_sbl(spec, entropy).Q
    min_q = min(Q(dict(zip(FIELDS, p))) for p in pts)
    changes = []
    for Kh in ("3*theta", "theta^2 + theta", "2*sin(theta)"):
        params = CattaneoSblParams(lambda0_hat=parse_expr("-theta - ln(theta)"), Khat=(parse_expr(Kh), parse_expr("0"), parse_expr("0")))
        vals = [cattaneo_sbl(spec, params).Q(dict(zip(FIELDS, p))) for p in pts]
        changes.append(min(vals) < 0 < max(vals))
    ok = min_q >= -1e-12 and all(changes)
    report(5, "second law when Kt' = 0, sign change when Khat' != 0", ok, f"min production {min_q:.3e}, sign changes {sum(changes)}/3")
    assert ok


def test_criterion_06_scalar_laws():
    rng = np.random.default_rng(66)
    worst = 0.0
    for _ in range(10):
        cc = rng.normal(size=rng.integers(2, 5))
        kc = rng.normal(size=rng.integers(2, 5))
        c = " + ".join(f"{float(v)!r}*u^{i}" for i, v in enumerate(cc))
        K0 = " + ".join(f"{float(v)!r}*u^{i}" for i, v in enumerate(kc))
        sys = scalar_law(c)
        cand = scalar_sbl(c, K0, u0=-1.0)
        for u in np.linspace(-1, 1, 11):
            lam = sum(i * kc[i] * u ** (i - 1) for i in range(1, len(kc)))
            worst = max(worst, ll_residual(sys, cand, [lam], [u]).r_flux)
    K1 = scalar_sbl("u^2/2", "u^2/2").KA[0]
    burg = max(abs(K1(u=u) - u ** 3 / 3) for u in np.linspace(-1, 2, 31))
    ok = worst < 1e-10 and burg <= 1e-10
    report(6, "scalar-law candidates; Burgers K1 = u^3/3", ok, f"LL {worst:.1e}, Burgers {burg:.1e}")
    assert ok


def test_criterion_07_two_field_dichotomy():
    lap = table_one_case(3).system
    pts = sample_box(lap.domain_box, 20, seed=7)
    family = harmonic_family(50)
    definite = 0
    worst = 0.0
    for h in family:
        pot = Potential(lap, h)
        for p in pts:
            worst = max(worst, defining_residual(lap, pot, p).max_abs)
            if definiteness(pot.at(p).hess_w) in ("PosDef", "NegDef"):
                definite += 1
    wave = table_one_case(4).system
    h = wave_convex_density("exp", "cosh")
    pot = Potential(wave, h)
    wpts = sample_box(wave.domain_box, 200, seed=8)
    hyper_ok = all(definiteness(pot.at(p).hess_w) == "PosDef" for p in wpts)
    hyper_res = max(defining_residual(wave, pot, p).max_abs for p in wpts)
    ok = len(family) == 50 and definite == 0 and worst <= 1e-10 and hyper_ok and hyper_res <= 1e-12
    report(7, "elliptic case has no definite density, hyperbolic case does", ok,
           f"{definite} definite harmonic Hessians, wave density definite={hyper_ok}")
    assert ok


def test_criterion_08_duality_and_symmetry():
    cases = [
        (burgers(), "-exp(w1) - w1^2", "w", sample_box(burgers().domain_box, 20, seed=1)),
    ]
    spec = default_spec()
    cat = cattaneo_system(spec, spec.eps_eq)
    cases.append((cat, constant_tau_density(spec, alpha=-1.0, c=0.3, beta=(0.1, 0.0, -0.2)), "y", sample_box(cat.domain_box, 20, seed=2)))
    worst_dual, worst_sym, definite = 0.0, 0.0, True
    for sys, h0, coords, pts in cases:
        pot = Potential(sys, parse_expr(h0) if isinstance(h0, str) else h0, coords)
        for p in pts:
            assert defining_residual(sys, pot, p).max_abs <= 1e-10
            worst_dual = max(worst_dual, dual_hessian_check(sys, pot, p))
            rep = symmetric_hyperbolic_check(sys, pot, p)
            worst_sym = max(worst_sym, max(rep.asymmetry))
            definite &= rep.A0_definiteness == "NegDef"
    ok = worst_dual <= 1e-6 and worst_sym <= 1e-7 and definite
    report(8, "dual Hessian inverse, symmetric A^mu, definite A^0", ok,
           f"duality {worst_dual:.1e}, asymmetry {worst_sym:.1e}")
    assert ok


def test_criterion_09_round_trip():
    S = [[[2.0, 0.5], [0.5, -1.0]], [[0.0, 1.0], [1.0, 3.0]]]
    cat = default_cattaneo()
    cases = [
        (default_gradient_flux(), "(w1^2 + w2^2)/2", [0.1, -0.2], 10),
        (linear_symmetric_system(S), "(w1^2 + w2^2)/2 + w1 - 3*w2", [0.0, 0.0], 10),
        (burgers(), "exp(w1) + w1^4", [0.0], 10),
        (cat, "3*((w1/1.5)^2 - 0.25) + w2^2 + w3^2 + w4^2", [1.0, 0.0, 0.0, 0.0], 6),
    ]
    worst_lam, worst_path, count = 0.0, 0.0, 0
    for sys, h0, base, n in cases:
        cand = candidate_from_h0(sys, h0, base)
        for p in sample_box(sys.domain_box, n, seed=9):
            cv = build_candidate(sys, h0, base, p)
            assert cv.max_defining_residual <= 1e-9
            mf = solve_main_fields(sys, cand, p)
            assert isinstance(mf, MainFields)
            worst_lam = max(worst_lam, float(np.max(np.abs(mf.lam - cv.lam))))
            worst_path = max(worst_path, cv.path_difference)
            count += 1
    ok = worst_lam <= 1e-8 and worst_path <= 1e-7
    report(9, "build_candidate -> solve_main_fields round trip", ok,
           f"{count} states, lambda {worst_lam:.1e}, paths {worst_path:.1e}")
    assert ok


def test_criterion_10_first_order_reformulation():
    s = default_gradient_flux()
    cand = candidate_from_h0(s, "(w1^2 + w2^2)/2", [0.0, 0.0])
    eps = [[1.0, 0.0], [0.0, 1.0], [0.5, 0.5], [0.2, 0.9], [1.3, 0.4]]
    rep = epsilon_independence_check(s, cand.KA, eps, sample_box(s.domain_box, 20, seed=10))
    ok = rep.spread < 1e-7
    report(10, "first-order gradient independent of epsilon", ok, f"spread {rep.spread:.1e}")
    assert ok
