from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from eqweyl.actions import get_action
from eqweyl.blowup import (
    BlowupChart,
    NotResolved,
    OrderError,
    QuadraticSubstitution,
    blow_up,
    blowup_atlas,
    chart_integrals,
    cleanliness_model,
    singular_asymptotics,
    sigma_monomial_check,
    weak_phase_cleanliness,
    xy2_problem,
)
from eqweyl.functions import BumpAmplitude, CallablePhase, PolynomialPhase
from eqweyl.oscquad import QuadratureSpec, integrate
from eqweyl.statphase import (
    PhaseProblem,
    builtin_problem,
    polynomial_equivariant_phase,
    torus_product_amplitude,
    transversal_hessian,
)
from eqweyl.symplectic import EquivariantPhase

SQRT_PI_E8 = np.sqrt(np.pi) * np.exp(1j * np.pi / 4)


def _terms(poly):
    return {tuple(int(v) for v in e): float(c) for c, e in zip(poly.coefs, poly.exps) if c != 0}


def _torus_problem():
    spec = get_action("torus2-rot1")
    amp = torus_product_amplitude(spec)
    return PhaseProblem(5, polynomial_equivariant_phase(EquivariantPhase(spec)), amp, None, "analytic", "torus")


# ---------------------------------------------------------------- charts


@pytest.mark.parametrize("center, rho", [((0, 1), 0), ((0, 1), 1), ((0, 1, 2), 2), ((1,), 1)])
def test_chart_roundtrip_and_jacobian_exponent(center, rho):
    ch = BlowupChart(3, center, rho)
    Y = np.random.default_rng(0).uniform(-1, 1, (500, 3))
    assert ch.roundtrip_error(Y) < 1e-12
    assert ch.jacobian_exponent == len(center) - 1
    # numeric Jacobian determinant of the chart map
    h = 1e-6
    y = Y[7]
    J = np.stack([(ch.map(y + h * e) - ch.map(y - h * e)) / (2 * h) for e in np.eye(3)], axis=1)
    assert abs(np.linalg.det(J)) == pytest.approx(ch.jacobian(y), rel=1e-8)


def test_chart_validation():
    with pytest.raises(ValueError):
        BlowupChart(2, (0, 1), 2)
    with pytest.raises(ValueError):
        BlowupChart(2, (), 0)


# ---------------------------------------------------------------- transforms


def test_xy2_blowup_weak_transform():
    tp = blow_up(xy2_problem(), (0, 1), 0)
    assert _terms(tp.total) == {(4, 2): 1.0}
    assert _terms(tp.weak) == {(0, 2): 1.0}
    assert list(tp.exponents) == [4, 0]
    assert list(tp.jacobian_powers) == [1, 0]
    assert tp.parameter_axes == (0,)


def test_order_errors():
    lin = PhaseProblem(2, PolynomialPhase.from_terms({(1, 0): 1.0, (0, 0): 1.0}), BumpAmplitude.uniform(2))
    with pytest.raises(OrderError):
        blow_up(lin, (0, 1), 0)
    with pytest.raises(OrderError):
        blow_up(xy2_problem(), (0, 1), 0, order=5)
    f = CallablePhase(lambda X: X[..., 0] + 1.0, 2)
    with pytest.raises(OrderError):
        blow_up(PhaseProblem(2, f, BumpAmplitude.uniform(2)), (0, 1), 0, order=1)
    with pytest.raises(OrderError):
        blow_up(PhaseProblem(2, f, BumpAmplitude.uniform(2)), (0, 1), 0)


@pytest.mark.parametrize("perturbed", [False, True])
@pytest.mark.parametrize("rho", [0, 1])
def test_factorization_identity(perturbed, rho):
    tp = blow_up(xy2_problem(perturbed=perturbed), (0, 1), rho)
    Y = np.random.default_rng(rho).uniform(-1.5, 1.5, (10_000, 2))
    assert tp.factorization_error(Y) < 1e-10


def test_factorization_for_callable_phase_with_divided_difference_extension():
    f = CallablePhase(lambda X: (X[..., 0] * X[..., 1]) ** 2, 2)
    tp = blow_up(PhaseProblem(2, f, BumpAmplitude.uniform(2)), (0, 1), 0, order=4)
    Y = np.random.default_rng(3).uniform(-1, 1, (10_000, 2))
    assert tp.factorization_error(Y) < 1e-10
    # removable extension onto the divisor: O(step^2) accurate
    v = np.array([0.3, -0.7, 1.2])
    assert np.allclose(tp.weak(np.stack([np.zeros(3), v], axis=-1)), v**2, atol=1e-6)


def test_torus_phase_is_theta_times_weak():
    prob = _torus_problem()
    tp = blow_up(prob, (4,), 4)
    # codimension-one center: the chart map is the identity and Phi = theta * (-xi_1)
    assert _terms(tp.weak) == {(0, 0, 1, 0, 0): -1.0}
    P = np.random.default_rng(4).uniform(-1, 1, (10_000, 5))
    assert tp.factorization_error(P) < 1e-12
    assert np.allclose(tp.map(P), P)


# ---------------------------------------------------------------- delta substitution


def test_quadratic_substitution_matrices():
    assert QuadraticSubstitution(2).matrix.tolist() == [[2, 1], [1, 1]]
    q3 = QuadraticSubstitution(3)
    assert abs(q3.jacobian_constant) == 1
    assert np.all(q3.jacobian_exponents >= 0)
    with pytest.raises(ValueError):
        QuadraticSubstitution(0)


@pytest.mark.parametrize("N", [1, 2, 3, 4])
def test_delta_maps_box_into_box(N):
    S = np.random.default_rng(N).uniform(0, 1, (5000, N))
    T = QuadraticSubstitution(N)(S)
    assert np.all((T >= 0) & (T <= 1))


@pytest.mark.parametrize("N", [2, 3])
def test_delta_jacobian_is_monomial_symbolically(N):
    s = sp.symbols(f"s1:{N + 1}", positive=True)
    qs = QuadraticSubstitution(N)
    E = qs.matrix
    tau = [sp.Mul(*[s[k] ** int(E[i, k]) for k in range(N)]) for i in range(N)]
    det = sp.factor(sp.Matrix(tau).jacobian(sp.Matrix(s)).det())
    mono = qs.jacobian_constant * sp.Mul(*[s[k] ** int(e) for k, e in enumerate(qs.jacobian_exponents)])
    assert sp.simplify(det - mono) == 0
    # the map itself agrees with the monomial matrix
    S = np.random.default_rng(0).uniform(0.1, 1, (20, N))
    assert np.allclose(qs(S), np.prod(S[:, None, :] ** E[None], axis=-1))


def _pushforward_2(a):
    t1, t2 = sp.symbols("t1 t2", positive=True)
    return sp.integrate(sp.integrate(t1 ** a[0] * t2 ** a[1], (t1, t2**2, t2)), (t2, 0, 1))


def _pushforward_3(a):
    t1, t2, t3 = sp.symbols("t1 t2 t3", positive=True)
    f = t1 ** a[0] * t2 ** a[1] * t3 ** a[2]
    inner = sp.integrate(f, (t2, t1, sp.sqrt(t1 * t3)))
    return sp.integrate(sp.integrate(inner, (t1, t3**2, t3)), (t3, 0, 1))


@pytest.mark.parametrize("a", [(0, 0), (1, 0), (0, 2), (3, 1)])
def test_delta_pushforward_two(a):
    exact = QuadraticSubstitution(2).pullback_monomial_integral(a)
    assert sp.nsimplify(_pushforward_2(a)) == sp.Rational(exact.numerator, exact.denominator)
    num, frac = sigma_monomial_check(2, a)
    assert abs(num - frac) < 1e-12


@pytest.mark.parametrize("a", [(0, 0, 0), (1, 0, 0), (0, 1, 2), (2, 1, 0)])
def test_delta_pushforward_three(a):
    exact = QuadraticSubstitution(3).pullback_monomial_integral(a)
    assert sp.simplify(_pushforward_3(a) - sp.Rational(exact.numerator, exact.denominator)) == 0
    num, frac = sigma_monomial_check(3, a)
    assert abs(num - frac) < 1e-12


# ---------------------------------------------------------------- cleanliness


@pytest.mark.parametrize("name, chart", [("xy2", 0), ("xy2", 1), ("xy2_perturbed", 0), ("torus", 0),
                                         ("s2_pole", 0)])
def test_weak_phase_cleanliness(name, chart):
    rep = weak_phase_cleanliness(cleanliness_model(name, chart), samples=1000)
    assert rep.clean, rep.violations[:3]
    assert rep.min_singular_value >= 0.1
    assert rep.max_gradient_on_set < 1e-8
    assert rep.divisor_samples > 0


def test_xy2_weak_hessian_on_divisor():
    rep = weak_phase_cleanliness(cleanliness_model("xy2", 0), samples=400)
    assert np.allclose(rep.divisor_dets, 2.0)


def test_perturbed_second_chart_reports_extra_critical_branch():
    # u^2 + t u^5 has critical points u^3 = -2 / (5 t) inside the box when |t| > 0.12
    rep = weak_phase_cleanliness(cleanliness_model("xy2_perturbed", 1), samples=400)
    assert not rep.clean
    kinds = {v[0] for v in rep.violations}
    assert kinds == {"unexpected-critical"}
    for _, _, (u, t) in rep.violations:  # chart 1 coordinates: x = u t, y = t
        assert abs(5 * t * u**3 + 2) < 1e-6


def test_torus_transversal_block_has_det_minus_one():
    model = cleanliness_model("torus")
    rep = weak_phase_cleanliness(model, samples=400)
    assert np.allclose(rep.divisor_dets, -1.0)
    T0 = model.tangent(np.zeros((1, 5)))[0]
    P = model.sample_critical(np.random.default_rng(0), 20, False)
    for p in P:
        h = transversal_hessian(model.transformed.base, p, T0)
        assert h.det == pytest.approx(-1.0) and h.signature == 0


def test_unknown_model():
    with pytest.raises(ValueError):
        cleanliness_model("nope")


# ---------------------------------------------------------------- asymptotics


def test_xy2_prediction():
    p = xy2_problem()
    pred = singular_asymptotics(p, blowup_atlas(p))
    assert pred.terms == ((Fraction(1, 2), 1),)
    assert abs(pred.coefficients[0] - SQRT_PI_E8) < 1e-6
    # each chart carries half
    assert all(abs(c - SQRT_PI_E8 / 2) < 1e-6 for _, _, _, c in pred.chart_terms)


def test_perturbed_prediction_matches_unperturbed():
    p = xy2_problem(perturbed=True)
    pred = singular_asymptotics(p, blowup_atlas(p))
    assert pred.terms == ((Fraction(1, 2), 1),)
    assert abs(pred.coefficients[0] - SQRT_PI_E8) < 1e-6


def test_prediction_scales_with_amplitude():
    p = xy2_problem(scale=2.5)
    pred = singular_asymptotics(p, blowup_atlas(p))
    assert abs(pred.coefficients[0] - 2.5 * SQRT_PI_E8) < 1e-5


def test_clean_phase_reduces_to_q0():
    pred = singular_asymptotics(builtin_problem("saddle"))
    # s-convention: (2 pi s)^{c/2} Q0 with c = 2 and Q0 = 1/2
    assert pred.terms == ((Fraction(1), 0),)
    assert abs(pred.coefficients[0] - np.pi) < 1e-10


def test_torus_prediction_is_kappa_and_l0():
    pred = singular_asymptotics(builtin_problem("torus-L0"), points=16, convention="large")
    assert pred.terms == ((Fraction(1), 0),)
    assert abs(pred.coefficients[0] - 2 * np.pi * 3.375) < 1e-8


def test_unresolved_without_atlas():
    with pytest.raises(NotResolved):
        singular_asymptotics(xy2_problem())


def test_chart_contributions_sum_to_direct_value():
    p = xy2_problem()
    atlas = blowup_atlas(p)
    for mu in (0.3, 0.1):
        parts = chart_integrals(atlas, mu)
        direct = integrate(p.phase, p.amplitude, QuadratureSpec(mu=mu, convention="small"))
        assert abs(sum(v for v, _ in parts) - direct.value) < 10 * (sum(e for _, e in parts) + direct.error) + 1e-9


@given(st.floats(0.05, 1.0), st.floats(-1.0, 1.0))
@settings(max_examples=25)
def test_partition_of_unity_sums_to_one(r, angle):
    atlas = blowup_atlas(xy2_problem())
    D = r * np.array([np.cos(angle * np.pi), np.sin(angle * np.pi)])
    assert atlas.chi(0, D) + atlas.chi(1, D) == pytest.approx(1.0, abs=1e-14)
