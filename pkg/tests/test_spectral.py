import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from eqweyl.actions import CharacterLabel, get_action
from eqweyl.spectral import (
    IncompleteSpectrum,
    SpectrumTooLarge,
    build_spectrum,
    count_reduced,
    count_total,
    gaussian_config,
    plateau_config,
    smoothed_count,
    tauberian_remainder,
)

C = lambda m: CharacterLabel("Circle", m)  # noqa: E731


@pytest.fixture(scope="module")
def torus_table():
    return build_spectrum(get_action("torus2-rot1"), 3e5)


@pytest.fixture(scope="module")
def s2_table():
    return build_spectrum(get_action("s2-rot"), 1e5)


def _entries(table):
    return [(t, tot, w) for t, tot, w in table.entries()]


def test_sphere2_small_table():
    e = _entries(build_spectrum(get_action("s2-rot"), 10))
    assert [t for t, _, _ in e] == [0, 2, 6]
    assert e[2][2] == {m: 1 for m in range(-2, 3)}


def test_torus2_small_table():
    e = _entries(build_spectrum(get_action("torus2-rot1"), 2))
    assert [(t, tot) for t, tot, _ in e] == [(0, 1), (1, 4), (2, 4)]


@pytest.mark.parametrize("key", ["torus2-rot1", "s2-rot", "s3-hopf", "lens-p3-right", "torus3-rot12"])
def test_below_first_eigenvalue_only_constants(key):
    e = _entries(build_spectrum(get_action(key), 1))
    if key.startswith("torus"):  # the torus has eigenvalue 1 <= lambda_max
        e = [x for x in e if x[0] == 0]
    assert len(e) == 1 and e[0][0] == 0 and e[0][1] == 1
    assert set(e[0][2].values()) == {1}


@pytest.mark.parametrize("n", [2, 3])
def test_torus_table_matches_brute_force_lattice(n):
    L = 30
    table = build_spectrum(get_action(f"torus{n}-rot1"), L)
    brute = {}
    r = int(np.sqrt(L)) + 1
    for k in itertools.product(range(-r, r + 1), repeat=n):
        t = sum(v * v for v in k)
        if t <= L:
            brute.setdefault(t, {}).setdefault(k[0], 0)
            brute[t][k[0]] += 1
    got = {t: w for t, _, w in table.entries()}
    assert got == brute


def test_torus2_rot12_weights_are_pairs():
    table = build_spectrum(get_action("torus3-rot12"), 5)
    for t, tot, w in table.entries():
        assert all(isinstance(k, tuple) and len(k) == 2 for k in w)
        assert sum(w.values()) == tot


def _su2_weights(k):
    return range(-k, k + 1, 2)


@pytest.mark.parametrize("p", [1, 2, 3, 4, 5])
def test_lens_table_matches_weight_enumeration(p):
    # V_k (x) V_k with left Z_p acting through the left weight, right circle through the right weight
    L = 400
    key = "s3-hopf" if p == 1 else f"lens-p{p}-right"
    table = build_spectrum(get_action(key), L)
    brute = {}
    k = 0
    while k * (k + 2) <= L:
        inv = sum(1 for a in _su2_weights(k) if a % p == 0)
        if inv:
            brute[k * (k + 2)] = {b: inv for b in _su2_weights(k)}
        k += 1
    got = {t: w for t, _, w in table.entries()}
    assert got == brute


@pytest.mark.parametrize("key", ["torus2-rot1", "s2-rot", "lens-p3-right"])
def test_isotypic_sum_equals_total(key):
    table = build_spectrum(get_action(key), 2000)
    for t, tot, w in table.entries():
        assert sum(w.values()) == tot  # d_chi = 1 for abelian groups


def test_torus_count_matches_lattice(torus_table):
    v = count_reduced(torus_table, C(0), [1e4]).values[0]
    assert abs(v - 2 * 100) <= 2
    assert v == sum(1 for k in range(-101, 102) if k * k <= 1e4)


@given(st.integers(-20, 20), st.floats(0.0, 1e4))
def test_sphere_count_closed_form(m, lam):
    table = build_spectrum(get_action("s2-rot"), 1e4)
    expected = sum(1 for l in range(abs(m), 101) if l * (l + 1) <= lam)
    assert count_reduced(table, C(m), [lam]).values[0] == expected


def test_unreachable_weight_counts_zero(s2_table):
    assert count_reduced(s2_table, C(10_000), [1e5]).values[0] == 0


def test_counting_monotone_and_starts_at_zero(s2_table):
    grid = np.linspace(0, 1e5, 2001)
    r = count_reduced(s2_table, C(3), grid)
    assert np.all(np.diff(r.values) >= 0)
    assert count_reduced(s2_table, C(0), [-1e-9]).values[0] == 0
    # right-continuity: the jump belongs to the eigenvalue itself
    assert count_reduced(s2_table, C(0), [2.0]).values[0] == 2
    assert count_reduced(s2_table, C(0), [2.0 - 1e-9]).values[0] == 1


def test_count_beyond_completeness_refused(s2_table):
    with pytest.raises(IncompleteSpectrum):
        count_reduced(s2_table, C(0), [2e5])


def test_sum_over_characters_is_full_count():
    table = build_spectrum(get_action("torus2-rot1"), 1e4)
    total = sum(count_reduced(table, C(m), [1e4]).values[0] for m in table.weights())
    assert total == count_total(table, [1e4])[0]


def test_memory_guard():
    with pytest.raises(SpectrumTooLarge):
        build_spectrum(get_action("torus2-rot1"), 1e12)
    with pytest.raises(ValueError):
        build_spectrum(get_action("torus2-rot1"), 0.5)


def test_gaussian_config_contract():
    cfg = gaussian_config()
    s = np.linspace(-20, 20, 4001)
    assert np.all(cfg.rho_hat(s) >= 0)
    assert np.all(cfg.rho_hat(s[np.abs(s) > cfg.support_radius]) < 1e-12)
    assert cfg.rho0 == pytest.approx(1 / (2 * np.pi))


def test_smoothed_count_far_below_spectrum_is_zero():
    table = build_spectrum(get_action("s3-hopf"), 400)
    cfg = plateau_config(0.1, 0.2)
    assert smoothed_count(table, C(0), cfg, 1.5).value == 0.0


def test_smoothed_count_sampling_property():
    table = build_spectrum(get_action("s2-rot"), 400)
    mu_j = np.sqrt(6.0)  # l = 2, isolated
    cfg = plateau_config(0.05, 0.1, height=1.0)
    assert smoothed_count(table, C(1), cfg, mu_j).value == pytest.approx(1.0, abs=1e-10)


def test_smoothed_weightings_agree_for_abelian(s2_table):
    cfg = gaussian_config()
    a = smoothed_count(s2_table, C(2), cfg, 100.0, "distinct").value
    b = smoothed_count(s2_table, C(2), cfg, 100.0, "repeated").value
    assert a == pytest.approx(b, rel=1e-12)


def test_smoothed_truncation_bound_small(torus_table):
    assert smoothed_count(torus_table, C(0), gaussian_config(), 200.0).truncation_bound < 1e-12


def test_tauberian_remainder_envelope(torus_table):
    # torus2-rot1: n - kappa - 1 = 0, so the remainder stays bounded over mu in [50, 500]
    mus = np.linspace(50, 500, 46)
    R = tauberian_remainder(torus_table, C(0), gaussian_config(), mus)
    lo, hi = np.abs(R[:23]).max(), np.abs(R[23:]).max()
    assert hi < 3.0 and lo < 3.0
    assert hi / lo < 3.0
