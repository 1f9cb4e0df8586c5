import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eqweyl.blowup import blowup_atlas, chart_integrals, xy2_problem
from eqweyl.functions import BumpAmplitude, CallableAmplitude, PolynomialPhase
from eqweyl.oscquad import (
    COMPILED_AVAILABLE,
    FitError,
    QuadratureError,
    QuadratureSpec,
    fit_asymptotics,
    integrate,
    read_samples,
    write_samples,
)
from eqweyl.oscquad.quadrature import korobov_lattice

HALF_X2 = PolynomialPhase(np.array([0.5]), np.array([[2]]))
XY2 = PolynomialPhase(np.array([1.0]), np.array([[2, 2]]))


def _fresnel(mu):
    return np.sqrt(2 * np.pi / mu) * np.exp(1j * np.pi / 4)


def test_fresnel_at_mu_200():
    r = integrate(HALF_X2, BumpAmplitude.uniform(1), QuadratureSpec(mu=200.0))
    # the bump is 1 near 0, so only O(mu^-infinity) separates I from the Fresnel value
    assert abs(r.value / _fresnel(200.0) - 1) < 1e-3
    assert r.error <= r.tolerance


def test_zero_amplitude_is_exactly_zero():
    r = integrate(XY2, BumpAmplitude.uniform(2, scale=0.0), QuadratureSpec(mu=50.0))
    assert r.value == 0 and r.error == 0 and r.nodes == 0


def test_gauss_rule_convergence_order():
    vals = [integrate(HALF_X2, BumpAmplitude.uniform(1),
                      QuadratureSpec(mu=20.0, order=3, panels_per_wavelength=p, richardson=False, tolerance=1.0)).value
            for p in (6, 12, 24)]
    d1, d2 = abs(vals[0] - vals[1]), abs(vals[1] - vals[2])
    assert d1 / d2 >= 2**4


@pytest.mark.parametrize("phase, dim", [(HALF_X2, 1), (XY2, 2),
                                        (PolynomialPhase(np.array([1.0, 0.3]), np.array([[1, 1], [3, 0]])), 2)])
def test_conjugation_symmetry(phase, dim):
    neg = PolynomialPhase(-phase.coefs, phase.exps)
    amp = BumpAmplitude.uniform(dim)
    spec = QuadratureSpec(mu=40.0)
    assert abs(integrate(neg, amp, spec).value - np.conj(integrate(phase, amp, spec).value)) < 1e-12


@given(st.floats(1.0, 300.0))
@settings(max_examples=10)
def test_mu_convention_bridge_is_exact(mu):
    amp = BumpAmplitude.uniform(1)
    a = integrate(HALF_X2, amp, QuadratureSpec(mu=mu, convention="large"))
    b = integrate(HALF_X2, amp, QuadratureSpec(mu=1.0 / mu, convention="small"))
    if 1.0 / (1.0 / mu) == mu:
        assert a.value == b.value and a.nodes == b.nodes
    else:
        assert abs(a.value - b.value) < 1e-12


def test_node_budget_refusal():
    with pytest.raises(QuadratureError, match="budget"):
        integrate(XY2, BumpAmplitude.uniform(2), QuadratureSpec(mu=1e5, max_nodes=10**5))


def test_non_finite_values_refused():
    amp = CallableAmplitude(lambda X: np.where(np.abs(X[..., 0]) < 0.1, np.nan, 1.0), np.array([[-1.0, 1.0]]))
    with pytest.raises(QuadratureError):
        integrate(HALF_X2, amp, QuadratureSpec(mu=10.0))


def test_error_above_tolerance_refused():
    with pytest.raises(QuadratureError, match="tolerance") as exc:
        # a single line integral cannot be refined further: round-off alone exceeds 1e-20
        integrate(HALF_X2, BumpAmplitude.uniform(1), QuadratureSpec(mu=200.0, tolerance=1e-20))
    assert exc.value.result is not None


def test_passive_axes_factor_out():
    phase = PolynomialPhase(np.array([0.5]), np.array([[2, 0]]))
    r = integrate(phase, BumpAmplitude.uniform(2), QuadratureSpec(mu=200.0))
    assert r.passive_axes == (1,)
    assert r.passive_factor == pytest.approx(1.5, rel=1e-13)
    assert abs(r.value / (1.5 * _fresnel(200.0)) - 1) < 1e-3


@pytest.mark.skipif(not COMPILED_AVAILABLE, reason="compiled kernels not built")
def test_compiled_and_python_backends_agree():
    amp = BumpAmplitude.uniform(2)
    a = integrate(XY2, amp, QuadratureSpec(mu=300.0, backend="compiled"))
    b = integrate(XY2, amp, QuadratureSpec(mu=300.0, backend="python"))
    assert a.backend == "compiled" and b.backend == "python"
    assert abs(a.value - b.value) < 1e-12
    assert a.nodes == b.nodes


def test_result_record_surfaces_tolerances():
    r = integrate(HALF_X2, BumpAmplitude.uniform(1), QuadratureSpec(mu=50.0))
    js = r.as_json()
    assert {"re", "im", "error", "nodes", "tolerance", "method", "backend"} <= set(js)
    assert js["tolerance"] == pytest.approx(1e-7 * 1.5)


def test_spec_validation():
    with pytest.raises(ValueError):
        QuadratureSpec(mu=1.0, panels_per_wavelength=4)
    with pytest.raises(ValueError):
        QuadratureSpec(mu=-1.0)
    with pytest.raises(ValueError):
        QuadratureSpec(mu=1.0, rule="simpson")


def test_tanh_sinh_rule_agrees():
    amp = BumpAmplitude.uniform(1)
    a = integrate(HALF_X2, amp, QuadratureSpec(mu=100.0))
    b = integrate(HALF_X2, amp, QuadratureSpec(mu=100.0, rule="tanh_sinh"))
    assert abs(a.value - b.value) < 1e-8


def _separable_reference(mu, d):
    q = integrate(HALF_X2, BumpAmplitude.uniform(1), QuadratureSpec(mu=mu)).value
    w = integrate(PolynomialPhase(np.array([0.02]), np.array([[1]])), BumpAmplitude.uniform(1),
                  QuadratureSpec(mu=mu)).value
    return q * q * w ** (d - 2)


@pytest.mark.parametrize("d, qmc_points", [(4, 256), pytest.param(5, 1024, marks=pytest.mark.slow)])
def test_lattice_path_in_higher_dimensions(d, qmc_points):
    coefs = np.array([0.5, 0.5] + [0.02] * (d - 2))
    exps = np.eye(d, dtype=int)
    exps[0, 0] = exps[1, 1] = 2
    r = integrate(PolynomialPhase(coefs, exps), BumpAmplitude.uniform(d),
                  QuadratureSpec(mu=20.0, qmc_points=qmc_points))
    ref = _separable_reference(20.0, d)
    assert r.method == "iterated+qmc"
    assert abs(r.value - ref) < max(r.error, 1e-3 * abs(ref))
    assert abs(r.value / ref - 1) < 1e-3


def test_korobov_lattice_integrates_periodic_bump():
    # smooth periodic integrand: product of 1 + cos(2 pi x) has integral 1
    P = korobov_lattice(251, 3)
    assert P.shape == (251, 3) and np.all((P >= 0) & (P < 1))
    assert np.mean(np.prod(1 + np.cos(2 * np.pi * P), axis=-1)) == pytest.approx(1.0, abs=1e-12)


# ---------------------------------------------------------------- fits


MUS = np.geomspace(1e-4, 1e-2, 12)


def test_fit_recovers_exact_log_model():
    data = [(m, 3 * m**0.5 * np.log(1 / m) + 5 * m**0.5) for m in MUS]
    fit = fit_asymptotics(data, [("1/2", 1), ("1/2", 0)])
    assert fit.coefficient("1/2", 1) == pytest.approx(3, abs=1e-8)
    assert fit.coefficient("1/2", 0) == pytest.approx(5, abs=1e-8)
    assert fit.cond < 1e8 and fit.residual < 1e-12


def test_spurious_log_term_is_negligible():
    data = [(m, (2 - 1j) * m**0.5) for m in MUS]
    fit = fit_asymptotics(data, [("1/2", 1), ("1/2", 0)])
    assert abs(fit.coefficient("1/2", 1)) < 1e-6 * abs(fit.coefficient("1/2", 0))


def test_large_convention_fit():
    mus = np.geomspace(1e2, 1e4, 10)
    data = [(m, 2.0 * m**-0.5) for m in mus]
    fit = fit_asymptotics(data, [("1/2", 0)], convention="large")
    assert fit.coefficient(0.5, 0) == pytest.approx(2.0, rel=1e-12)
    assert fit.evaluate(mus[3]) == pytest.approx(data[3][1], rel=1e-12)


def test_fit_refusals():
    data = [(m, m**0.5) for m in MUS]
    terms = [("1/2", 0), ("501/1000", 0)]
    cond = fit_asymptotics([(m, v * (1 + 1e-3 * m)) for m, v in data], terms, max_cond=np.inf).cond
    with pytest.raises(FitError, match="condition"):
        fit_asymptotics(data, terms, max_cond=cond / 2)
    with pytest.raises(FitError, match="samples"):
        fit_asymptotics(data[:3], [("1/2", 0), ("1", 0)])
    with pytest.raises(FitError):
        fit_asymptotics(data, [("1/2", -1)])
    with pytest.raises(FitError):
        fit_asymptotics(data, [("1/2", 0), ("1/2", 0)])


def test_sample_csv_roundtrip(tmp_path):
    data = [(float(m), complex(np.sin(i), np.cos(i) / 3)) for i, m in enumerate(MUS)]
    path = tmp_path / "s.csv"
    write_samples(path, data)
    assert read_samples(path) == data
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b,c\n1,2,3\n")
    with pytest.raises(FitError):
        read_samples(bad)


def test_xy2_chart_sum_matches_direct_quadrature_small():
    p = xy2_problem()
    atlas = blowup_atlas(p)
    parts = chart_integrals(atlas, 1e-2)
    direct = integrate(p.phase, p.amplitude, QuadratureSpec(mu=1e-2, convention="small", tolerance=1e-6))
    total = sum(v for v, _ in parts)
    assert abs(total - direct.value) < 10 * (sum(e for _, e in parts) + direct.error)


@pytest.mark.slow
def test_xy2_chart_sum_matches_direct_quadrature_at_1e3():
    p = xy2_problem()
    parts = chart_integrals(blowup_atlas(p), 1e-3)
    direct = integrate(p.phase, p.amplitude, QuadratureSpec(mu=1e-3, convention="small", tolerance=1e-6))
    total = sum(v for v, _ in parts)
    assert abs(total - direct.value) < sum(e for _, e in parts) + direct.error
