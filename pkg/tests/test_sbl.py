import math

import numpy as np
import pytest

from sblkit.errors import DimensionMismatch, NotClosed, SingularHessian
from sblkit.expr import parse_expr
from sblkit.model import make_system
from sblkit.sampling import sample_box
from sblkit.sbl import (
    Infeasible,
    MainFields,
    SblCandidate,
    build_candidate,
    candidate_from_h0,
    dual_flux_check,
    hessian_and_convexity,
    dual_hessian_check,
    dual_hessian_residual,
    legendre_dual,
    ll_residual,
    main_fields_from_h0,
    production_inequality,
    residual_inequality,
    solve_main_fields,
    symmetric_hyperbolic_check,
    symmetry_candidate,
    symmetry_sbl_check,
)
from sblkit.zoo import (
    burgers,
    default_gradient_flux,
    divergence_candidate,
    linear_symmetric_system,
    maxwell_system,
    poynting_candidate,
    scalar_sbl,
)
from sblkit.zoo.synthetic import coupled_relaxation, gradient_flux_potentials

S = [[[2.0, 0.5], [0.5, -1.0]], [[0.0, 1.0], [1.0, 3.0]]]


def test_burgers_energy_law():
    b = burgers()
    cand = SblCandidate(K0="u^2/2", KA=("u^3/3",), Q="0")
    for u in np.linspace(-1, 2, 7):
        assert ll_residual(b, cand, [u], [u]).ok(1e-14)
        mf = solve_main_fields(b, cand, [u])
        assert isinstance(mf, MainFields) and mf.lam[0] == pytest.approx(u, abs=1e-14)


def test_wrong_flux_is_infeasible():
    b = burgers()
    cand = SblCandidate(K0="u^2/2", KA=("u^3/2",), Q="0")
    out = solve_main_fields(b, cand, [1.0])
    assert isinstance(out, Infeasible) and out.residual > out.threshold


def test_source_residual_reported():
    b = burgers(Pi="-u")
    cand = SblCandidate(K0="u^2/2", KA=("u^3/3",), Q="0")
    mf = solve_main_fields(b, cand, [0.5])
    assert mf.flux_residual <= 1e-14 and mf.source_residual == pytest.approx(0.25)


def test_candidate_dimension_check():
    with pytest.raises(DimensionMismatch):
        SblCandidate(K0="u", KA=("u", "u"), Q="0").check(burgers())
    with pytest.raises(DimensionMismatch):
        SblCandidate(K0="v", KA=("u",), Q="0").check(burgers())


def test_maxwell_poynting_and_divergence():
    mx = maxwell_system()
    cand = poynting_candidate().check(mx)
    for p in sample_box(mx.domain_box, 10, seed=0):
        mf = solve_main_fields(mx, cand, p)
        assert isinstance(mf, MainFields)
        assert np.max(np.abs(mf.lam - p)) <= 1e-12
        assert ll_residual(mx, cand, p, p).r_flux == 0.0
    for which in ("E", "B"):
        out = solve_main_fields(mx, divergence_candidate(which), [0.1] * 6)
        assert isinstance(out, Infeasible)


def test_build_candidate_linear_symmetric():
    s = linear_symmetric_system(S)
    base = [0.0, 0.0]
    for p in sample_box(s.domain_box, 10, seed=2):
        cv = build_candidate(s, "(w1^2 + w2^2)/2", base, p)
        # K^A = y^T S_A y / 2
        for A in range(2):
            assert cv.KA[A] == pytest.approx(0.5 * p @ np.array(S[A]) @ p, abs=1e-12)
        assert cv.K0 == pytest.approx(0.5 * p @ p)
        assert cv.path_difference <= 1e-12 and cv.max_defining_residual <= 1e-14


def test_build_candidate_gradient_flux():
    s = default_gradient_flux()
    Ks = gradient_flux_potentials(["exp(y1) + y2^2/2 + y1*y2/4", "y1^2/2 + exp(y2) + y1*y2/5"])
    base = np.array([-0.3, 0.2])
    for p in sample_box(s.domain_box, 10, seed=3):
        cv = build_candidate(s, "(w1^2 + w2^2)/2", base, p)
        for A in range(2):
            exact = Ks[A](y1=p[0], y2=p[1]) - Ks[A](y1=base[0], y2=base[1])
            assert abs(cv.KA[A] - exact) <= 1e-9
        assert ll_residual(s, candidate_from_h0(s, "(w1^2 + w2^2)/2", base), cv.lam, p).r_flux <= 1e-9


def test_build_candidate_rejects_non_solution():
    s = linear_symmetric_system(S)
    with pytest.raises(NotClosed) as info:
        build_candidate(s, "w1^2*w2", [0.0, 0.0], [0.5, 0.4])
    assert info.value.max_residual > 1e-3


def test_candidate_from_h0_matches_numeric():
    s = default_gradient_flux()
    cand = candidate_from_h0(s, "(w1^2 + w2^2)/2", [0.0, 0.0])
    for p in sample_box(s.domain_box, 5, seed=4):
        cv = build_candidate(s, "(w1^2 + w2^2)/2", [0.0, 0.0], p)
        env = {"y1": p[0], "y2": p[1]}
        assert np.allclose([k(env) for k in cand.KA], cv.KA, atol=1e-10)
        mf = solve_main_fields(s, cand, p)
        assert isinstance(mf, MainFields) and np.allclose(mf.lam, p, atol=1e-8)


def test_main_fields_from_h0():
    b = burgers()
    mf = main_fields_from_h0(b, "w1^3", [0.7])
    assert mf.origin == "FromH0" and mf.lam[0] == pytest.approx(3 * 0.49)


def test_hessian_and_convexity_examples():
    H, d = hessian_and_convexity(parse_expr("w1^2 + w2^2"), {"w1": 0.3, "w2": -0.2})
    assert np.allclose(H, 2 * np.eye(2)) and d == "PosDef"
    _, d = hessian_and_convexity(parse_expr("w1^2 - w2^2"), {"w1": 0.3, "w2": -0.2})
    assert d == "Indefinite"
    _, d = hessian_and_convexity(parse_expr("-exp(w1) - w2^2"), {"w1": 0.3, "w2": -0.2})
    assert d == "NegDef"


def test_legendre_dual_quadratic():
    p = {"w1": 0.4, "w2": -1.2}
    d = legendre_dual(parse_expr("(w1^2 + w2^2)/2"), p)
    assert np.allclose(d.lam, [0.4, -1.2])
    assert d.h_hat0 == pytest.approx(0.5 * (0.16 + 1.44))


def test_dual_hessian_on_convex_and_singular():
    h0 = parse_expr("exp(w1) + w1*w2 + w2^2 + w2^4")
    assert dual_hessian_residual(h0, {"w1": 0.2, "w2": 0.3}) <= 1e-6
    with pytest.raises(SingularHessian):
        dual_hessian_residual(parse_expr("w1 + w2"), {"w1": 0.0, "w2": 0.0})


def test_dual_hessian_check_on_systems():
    b = burgers()
    assert dual_hessian_check(b, "exp(w1)", [0.5]) <= 1e-6
    s = linear_symmetric_system(S)
    assert dual_hessian_check(s, "(w1^2 + w2^2)/2 + w1^4", [0.3, 0.2]) <= 1e-6


def test_dual_flux_check_linear_symmetric():
    s = linear_symmetric_system(S)
    assert dual_flux_check(s, "(w1^2 + w2^2)/2", [0.3, -0.4]) <= 1e-6


def test_symmetric_hyperbolic_examples():
    s = linear_symmetric_system(S)
    rep = symmetric_hyperbolic_check(s, "(w1^2 + w2^2)/2", [0.2, 0.1])
    assert rep.ok and rep.A0_definiteness == "PosDef" and max(rep.asymmetry) <= 1e-14
    wave = make_system(["y1", "y2"], ["y1", "y2"], [["y2", "y1"]])
    rep = symmetric_hyperbolic_check(wave, "w1*w2", [0.2, 0.1])
    assert rep.symmetric and rep.A0_definiteness == "Indefinite" and not rep.ok
    with pytest.raises(SingularHessian):
        symmetric_hyperbolic_check(wave, "w1 + w2", [0.0, 0.0])


def test_non_solution_breaks_symmetry():
    s = linear_symmetric_system(S)
    rep = symmetric_hyperbolic_check(s, "w1^2 + 3*w2^2", [0.2, 0.1])
    assert not rep.symmetric


def test_residual_inequality_relaxation():
    s = coupled_relaxation()
    pts = sample_box(s.domain_box, 64, seed=0)
    # lambda = w, Sigma = -y2^2
    rep = residual_inequality(s, "(w1^2 + w2^2)/2", pts)
    assert not rep.holds and rep.min_sigma == pytest.approx(-max(p[1] ** 2 for p in pts))
    rep = residual_inequality(s, "-(w1^2 + w2^2)/2", pts)
    assert rep.holds and rep.min_sigma >= 0


def test_production_inequality():
    b = burgers(Pi="-u")
    cand = scalar_sbl("u^2/2", "-u^2/2", Pi="-u")
    pts = sample_box(b.domain_box, 32, seed=1)
    rep = production_inequality(b, cand, pts)
    assert rep.holds and rep.min_sigma >= 0


def test_symmetry_generated_laws():
    mx = maxwell_system()
    xi = ["1", "0", "0", "0", "0", "2"]
    assert symmetry_sbl_check(mx, xi, [0.1] * 6) == 0.0
    cand = symmetry_candidate(mx, xi)
    mf = solve_main_fields(mx, cand, [0.3, 0.1, -0.2, 0.4, 0.5, -0.6])
    assert isinstance(mf, MainFields) and np.allclose(mf.lam, [1, 0, 0, 0, 0, 2])
    # a field-dependent xi breaks the closure condition
    assert symmetry_sbl_check(burgers(), ["u"], [0.5]) > 0.1
    with pytest.raises(DimensionMismatch):
        symmetry_sbl_check(mx, ["1"], [0.0] * 6)
