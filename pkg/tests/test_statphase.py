import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eqweyl.actions import get_action
from eqweyl.functions import BumpAmplitude, CallableAmplitude, PolynomialPhase
from eqweyl.oscquad import QuadratureSpec, integrate
from eqweyl.statphase import (
    BUILTINS,
    CleanlinessViolation,
    PhaseProblem,
    builtin_problem,
    gradient_consistency,
    l0_equivariant,
    load_problem,
    q0,
    torus_l0_closed_form,
    torus_product_amplitude,
    transversal_hessian,
)
from eqweyl.symplectic import EquivariantPhase

E8 = np.exp(1j * np.pi / 4)


def _poly(terms, dim, amp=None):
    return PhaseProblem(dim, PolynomialPhase.from_terms(terms), amp or BumpAmplitude.uniform(dim))


def test_transversal_hessian_fresnel():
    h = transversal_hessian(builtin_problem("fresnel"), [0.0])
    assert h.det == pytest.approx(1.0) and h.signature == 1


def test_transversal_hessian_torus_block():
    # -theta * xi_1: eigenvalues +1 and -1
    h = transversal_hessian(_poly({(1, 1): -1.0}, 2), [0.0, 0.0])
    assert h.det == pytest.approx(-1.0) and h.signature == 0
    assert np.allclose(np.sort(h.eigenvalues), [-1.0, 1.0])


def test_transversal_hessian_saddle():
    h = transversal_hessian(builtin_problem("saddle"), [0.0, 0.0])
    assert h.det == pytest.approx(-4.0) and h.signature == 0


def test_transversal_hessian_with_frame():
    h = transversal_hessian(builtin_problem("fresnel2d"), [0.0, 0.3], frame=[[0.0], [1.0]])
    assert h.det == pytest.approx(1.0) and h.signature == 1 and h.eigenvalues.size == 1


def test_transversal_hessian_errors():
    with pytest.raises(CleanlinessViolation):
        transversal_hessian(builtin_problem("fresnel"), [0.1])  # not critical
    with pytest.raises(CleanlinessViolation):
        transversal_hessian(builtin_problem("xy2"), [0.0, 0.0])  # zero Hessian
    with pytest.raises(ValueError):
        transversal_hessian(builtin_problem("fresnel2d"), [0.0, 0.0], frame=[[0.0, 0.0], [1.0, 2.0]])


def test_q0_fresnel():
    r = q0(builtin_problem("fresnel"))
    assert abs(r.Q0 - E8) < 1e-12
    assert r.order == 0.5 and r.signature == 1 and abs(r.psi0) < 1e-20


def test_q0_fresnel2d_manifold():
    r = q0(builtin_problem("fresnel2d"))
    # int a(0, y) dy for the plateau bump is inner + outer
    assert abs(r.Q0 - 1.5 * E8) < 1e-10
    assert r.order == 0.5


def test_q0_saddle():
    r = q0(builtin_problem("saddle"))
    assert abs(r.Q0 - 0.5) < 1e-12 and r.order == 1


def test_signature_bounded_by_normal_rank():
    for name in ("fresnel", "fresnel2d", "saddle"):
        r = q0(builtin_problem(name))
        assert abs(r.signature) <= 2 * r.order


def test_xy2_is_not_clean():
    with pytest.raises(CleanlinessViolation):
        q0(builtin_problem("xy2"))


def test_no_critical_point_gives_zero():
    r = q0(_poly({(1,): 1.0}, 1))
    assert r.Q0 == 0 and r.samples == 0


@pytest.mark.parametrize("name", ["fresnel", "saddle"])
def test_leading_term_matches_quadrature(name):
    prob = builtin_problem(name)
    r = q0(prob)
    I = integrate(prob.phase, prob.amplitude, QuadratureSpec(mu=400.0)).value
    assert abs(I / r.leading(400.0) - 1) < 2e-2


def test_torus_l0_value_and_closed_form():
    prob = builtin_problem("torus-L0")
    r = q0(prob, 16)
    spec = get_action("torus2-rot1")
    assert r.Q0 == pytest.approx(3.375, abs=1e-10)
    assert torus_l0_closed_form(spec, torus_product_amplitude(spec)) == pytest.approx(3.375, rel=1e-14)
    assert r.order == 1  # kappa


def test_l0_equivariant_torus_matches_q0():
    spec = get_action("torus2-rot1")
    res = l0_equivariant(EquivariantPhase(spec), torus_product_amplitude(spec), points=16)
    assert res.value == pytest.approx(3.375, abs=1e-8)
    assert not res.singular_stratum


def test_l0_vanishes_when_amplitude_vanishes_on_zero_level():
    spec = get_action("torus2-rot1")
    base = torus_product_amplitude(spec)
    centers = base.centers.copy()
    centers[2] = 5.0  # c(xi) = 0 on xi_1 = 0
    amp = BumpAmplitude(centers, base.inner, base.outer)
    assert torus_l0_closed_form(spec, amp) == 0.0
    assert abs(l0_equivariant(EquivariantPhase(spec), amp, points=16).value) < 1e-14


@pytest.mark.slow
def test_sphere_cutoff_sequence_is_cauchy_and_monotone():
    phi = EquivariantPhase(get_action("s2-rot"))
    res = l0_equivariant(phi, BumpAmplitude(np.zeros(5), 0.5, 1.0), points=16, halvings=5)
    assert res.singular_stratum and res.cauchy
    d = np.abs(np.diff(res.sequence))
    assert np.all(d[1:] < d[:-1])
    assert np.all(np.diff(res.sequence.real) > 0)


@pytest.mark.parametrize("name", ["fresnel", "fresnel2d", "saddle", "xy2", "torus-L0"])
def test_gradients_agree_with_finite_differences(name):
    assert gradient_consistency(builtin_problem(name), 200) < 1e-6


@given(st.floats(0.0, np.pi), st.floats(0.5, 2.0), st.floats(-3.0, -0.5))
@settings(max_examples=15)
def test_q0_rotation_invariance(angle, a, b):
    # psi = a u^2 + b v^2 with (u, v) = R(x, y): det and signature do not depend on the frame
    c, s = np.cos(angle), np.sin(angle)
    terms = {(2, 0): a * c * c + b * s * s, (1, 1): 2 * (a - b) * c * s, (0, 2): a * s * s + b * c * c}
    r = q0(_poly(terms, 2))
    ref = q0(_poly({(2, 0): a, (0, 2): b}, 2))
    assert abs(r.Q0 - ref.Q0) < 1e-8 and r.signature == ref.signature


def test_q0_frame_scaling_changes_det_by_square():
    s = 3.0
    base = transversal_hessian(builtin_problem("saddle"), [0.0, 0.0])
    scaled = transversal_hessian(_poly({(2, 0): s * s, (0, 2): -s * s}, 2), [0.0, 0.0])
    assert scaled.det == pytest.approx(base.det * s**4)


def test_q0_linear_in_amplitude():
    b1 = BumpAmplitude.uniform(1, scale=2.0)
    b2 = BumpAmplitude.uniform(1, 0.3, 0.6, center=0.1)
    ph = PolynomialPhase.from_terms({(2,): 0.5})
    both = CallableAmplitude(lambda X: b1(X) - 3 * b2(X), np.array([[-1.0, 1.0]]))
    r1, r2 = q0(PhaseProblem(1, ph, b1)), q0(PhaseProblem(1, ph, b2))
    r = q0(PhaseProblem(1, ph, both))
    assert abs(r.Q0 - (r1.Q0 - 3 * r2.Q0)) < 1e-12


@pytest.mark.parametrize("name", ["fresnel", "fresnel2d", "saddle"])
def test_conjugate_phase_conjugates_q0(name):
    prob = builtin_problem(name)
    neg = PolynomialPhase(-prob.phase.coefs, prob.phase.exps)
    r = q0(prob)
    rn = q0(PhaseProblem(prob.dim, neg, prob.amplitude, prob.critical_manifold))
    assert abs(rn.Q0 - np.conj(r.Q0)) < 1e-12


def test_result_json_fields():
    js = q0(builtin_problem("fresnel")).as_json()
    assert {"q0_re", "q0_im", "signature", "order", "samples"} <= set(js)
    assert js["order"] == "1/2"


def test_load_problem_from_config(tmp_path):
    path = tmp_path / "p.ini"
    path.write_text("[phase]\nbuiltin = fresnel\n\n[amplitude]\ninner = 0.25\nouter = 0.75\nscale = 2\n")
    prob = load_problem(path)
    assert prob.name == "fresnel" and prob.amplitude.scale == 2.0
    assert abs(q0(prob).Q0 - 2 * E8) < 1e-12
    bad = tmp_path / "bad.ini"
    bad.write_text("[phase]\nbuiltin = nope\n")
    with pytest.raises(ValueError):
        load_problem(bad)
    with pytest.raises(FileNotFoundError):
        load_problem(tmp_path / "missing.ini")


def test_builtins_listed():
    for name in BUILTINS:
        assert builtin_problem(name).name == name
