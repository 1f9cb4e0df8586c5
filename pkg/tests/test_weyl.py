import numpy as np
import pytest

from eqweyl.actions import CharacterLabel, get_action
from eqweyl.spectral import IncompleteSpectrum, build_spectrum, count_reduced, count_total, gaussian_config
from eqweyl.symplectic import ReducedVolumeEstimate, default_cover, reduced_volume
from eqweyl.weyl import (
    UnsupportedError,
    exact_volume_estimate,
    fit_exponent,
    full_law_check,
    predict,
    smoothed_check,
    verify,
)

C = lambda m: CharacterLabel("Circle", m)  # noqa: E731


@pytest.fixture(scope="module")
def torus_1e6():
    return build_spectrum(get_action("torus2-rot1"), 1e6)


@pytest.fixture(scope="module")
def s3_1e6():
    return build_spectrum(get_action("s3-hopf"), 1e6)


@pytest.fixture(scope="module")
def lens3_1e6():
    return build_spectrum(get_action("lens-p3-right"), 1e6)


def _exact(key):
    spec = get_action(key)
    return spec, exact_volume_estimate(spec)


def test_predict_torus():
    spec, vol = _exact("torus2-rot1")
    p = predict(spec, C(4), vol)
    assert p.leading_coefficient == pytest.approx(2.0, rel=1e-12)
    assert p.growth_exponent == 0.5 and p.remainder_exponent == 0.0
    assert (p.log_power_bound, p.log_power_refined) == (1, 1)


def test_predict_sphere():
    spec, vol = _exact("s2-rot")
    p = predict(spec, C(-3), vol)
    assert p.leading_coefficient == pytest.approx(1.0, rel=1e-12)
    assert p.growth_exponent == 0.5


def test_predict_s3_log_bounds():
    spec, vol = _exact("s3-hopf")
    p = predict(spec, C(0), vol)
    assert p.growth_exponent == 1.0
    # n - kappa = 2: the refined log power is Lambda - 1
    assert p.log_power_refined == p.log_power_bound - 1


@pytest.mark.parametrize("m", [1, 3, -5])
def test_zero_restriction_multiplicity_has_no_growth(m):
    spec, vol = _exact("lens-p4-right")
    p = predict(spec, C(m), vol)
    assert p.restriction_mult == 0 and p.leading_coefficient == 0.0
    v = verify(spec, C(m), 1e4, prediction=p)
    assert v.empirical_coefficient == 0.0 and v.passed


def test_coefficient_positive_when_restriction_positive():
    spec, vol = _exact("lens-p4-right")
    assert predict(spec, C(2), vol).leading_coefficient > 0


def test_predict_propagates_standard_error():
    spec = get_action("s2-rot")
    vol = ReducedVolumeEstimate(2 * np.pi, 0.1, 1000, "fibered", "mc")
    p = predict(spec, C(0), vol)
    assert p.coefficient_stderr == pytest.approx(0.1 / (2 * np.pi), rel=1e-12)


def test_unsupported_when_orbits_fill_manifold():
    spec = get_action("torus2-rot12")
    with pytest.raises(UnsupportedError):
        predict(spec, CharacterLabel("Torus2", (0, 0)), exact_volume_estimate(get_action("torus2-rot1")))


def test_verify_torus_weight_three(torus_1e6):
    spec, vol = _exact("torus2-rot1")
    v = verify(spec, C(3), 1e6, prediction=predict(spec, C(3), vol), table=torus_1e6)
    assert abs(v.empirical_coefficient / 2 - 1) < 0.02
    assert v.passed
    assert len(v.diagnostics.window_lambdas) >= 20
    assert abs(v.exponent_fit - 0.5) < 0.02


def test_verify_s3_exponent(s3_1e6):
    spec, vol = _exact("s3-hopf")
    v = verify(spec, C(0), 1e6, prediction=predict(spec, C(0), vol), table=s3_1e6)
    assert abs(v.exponent_fit - 1.0) < 0.02
    assert v.passed


def test_lens_coefficient_is_a_third_of_s3(s3_1e6, lens3_1e6):
    s3, v3 = _exact("s3-hopf")
    l3, vl = _exact("lens-p3-right")
    assert predict(l3, C(0), vl).leading_coefficient / predict(s3, C(0), v3).leading_coefficient == pytest.approx(
        1 / 3, rel=1e-12)
    a = verify(s3, C(0), 1e6, prediction=predict(s3, C(0), v3), table=s3_1e6).empirical_coefficient
    b = verify(l3, C(0), 1e6, prediction=predict(l3, C(0), vl), table=lens3_1e6)
    assert b.empirical_coefficient / a == pytest.approx(1 / 3, rel=0.02)
    assert abs(b.exponent_fit - 1.0) < 0.02


def test_verify_refuses_incomplete_table():
    spec, vol = _exact("s2-rot")
    with pytest.raises(IncompleteSpectrum):
        verify(spec, C(0), 1e4, prediction=predict(spec, C(0), vol), table=build_spectrum(spec, 100))
    with pytest.raises(ValueError):
        verify(spec, C(0), 1e2, prediction=predict(spec, C(0), vol), windows=10)


def test_verdict_json_fields(torus_1e6):
    spec, vol = _exact("torus2-rot1")
    js = verify(spec, C(0), 1e6, prediction=predict(spec, C(0), vol), table=torus_1e6).as_json()
    assert {"predicted", "empirical", "stderr", "exponent_fit", "pass"} <= set(js)


def test_torus_weights_equidistributed(torus_1e6):
    spec, vol = _exact("torus2-rot1")
    preds = {m: predict(spec, C(m), vol).leading_coefficient for m in (0, 1, 5, 10)}
    assert len(set(preds.values())) == 1
    emp = {m: count_reduced(torus_1e6, C(m), [1e6]).values[0] / 1e3 for m in preds}
    vals = list(emp.values())
    for a in vals:
        for b in vals:
            assert abs(a / b - 1) < 0.03


@pytest.mark.parametrize("key, weights", [("torus2-rot1", range(-5, 6)), ("s2-rot", range(-5, 6)),
                                          ("lens-p3-right", range(-4, 5))])
def test_predicted_isotypic_sum_bounded_by_total(key, weights):
    spec, vol = _exact(key)
    lam = 1e5
    table = build_spectrum(spec, lam)
    total = count_total(table, [lam])[0]
    pred = sum(predict(spec, C(m), vol).leading_coefficient for m in weights) * lam ** ((spec.dim_M - 1) / 2)
    assert pred <= total


def test_prediction_invariant_under_chart_cover():
    spec = get_action("s2-rot")
    a = predict(spec, C(1), reduced_volume(spec, 40_000, seed=9))
    b = predict(spec, C(1), reduced_volume(spec, 40_000, seed=9, cover=default_cover(spec, 1)))
    tol = 3 * np.hypot(a.coefficient_stderr, b.coefficient_stderr)
    assert abs(a.leading_coefficient - b.leading_coefficient) < tol


def test_full_law_torus_and_sphere(torus_1e6):
    r = full_law_check(get_action("torus2-rot1"), 1e6, torus_1e6)
    assert r.passed and abs(r.ratio - 1) < 0.01
    assert r.predicted == pytest.approx(np.pi * 1e6, rel=1e-12)
    s = full_law_check(get_action("s2-rot"), 1e6)
    assert s.passed and s.predicted == pytest.approx(1e6, rel=1e-12)
    # closed form sum (2 l + 1) over l (l + 1) <= lambda
    L = int((-1 + np.sqrt(1 + 4e6)) / 2)
    assert s.count == (L + 1) ** 2


def test_full_law_insufficient_range():
    r = full_law_check(get_action("s2-rot"), 10.0)
    assert r.insufficient_range and not r.passed


def test_fit_exponent_exact_power():
    lam = np.geomspace(10, 1e4, 12)
    assert fit_exponent(lam, 3 * lam**0.75) == pytest.approx(0.75, abs=1e-12)
    assert np.isnan(fit_exponent(lam[:1], lam[:1]))


def test_smoothed_check_torus(torus_1e6):
    spec = get_action("torus2-rot1")
    rep = smoothed_check(spec, C(0), torus_1e6, np.linspace(100, 300, 11), 4 * np.pi, gaussian_config())
    assert rep.passed
    assert np.all(np.abs(rep.ratio - 1) < 0.1)
