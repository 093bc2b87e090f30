import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kummerflow.alemodel import ALEModel, eh_jets, radial_points
from kummerflow.flatforms import OMEGA0
from kummerflow.gluing import (
    DegenerateGluingError,
    WeightFunction,
    annulus_bounds,
    build_glued_metric,
    chi_jets,
    cutoff,
    decay_sweep,
    f_sup_ratios,
    fit_slope,
    glued_deviation_form,
    glued_jets,
    rho_jets,
    w_epsilon_exact,
    w_epsilon_quadrature,
    weighted_ck_norm,
)
from kummerflow.alemodel import RadialProfile

EPS = [0.1, 0.05, 0.02, 0.01]


@pytest.fixture(scope="module")
def eh():
    return ALEModel(a=1.0)


def test_cutoff_plateaus_and_monotonicity():
    r = np.linspace(0, 3, 3001)
    chi = cutoff(1.0, r)
    assert np.all(chi[r <= 1.1] == 1.0)
    assert np.all(chi[r >= 1.9] == 0.0)
    assert np.all(np.diff(chi) <= 0)
    assert np.all((chi >= 0) & (chi <= 1))
    with pytest.raises(ValueError):
        cutoff(0.0, r)


def test_cutoff_is_c2_at_the_joins():
    for u in (1.1, 1.9):
        left = rho_jets(u - 1e-9)
        right = rho_jets(u + 1e-9)
        for k in range(3):
            assert left[k] == pytest.approx(right[k], abs=1e-6)


def test_chi_jets_match_finite_differences():
    eps = 0.05
    s = np.linspace(1.3 * eps, 3.5 * eps, 50)
    h = 1e-7
    c0, c1, c2, _ = chi_jets(s, eps)
    fd1 = (chi_jets(s + h, eps)[0] - chi_jets(s - h, eps)[0]) / (2 * h)
    fd2 = (chi_jets(s + h, eps)[1] - chi_jets(s - h, eps)[1]) / (2 * h)
    assert np.allclose(c1, fd1, rtol=1e-5, atol=1e-6)
    assert np.allclose(c2, fd2, rtol=1e-5, atol=1e-4)


def test_flat_model_glues_trivially():
    m = build_glued_metric(ALEModel(a=0.0), 0.01)
    assert np.allclose(m.glued_potential.values, m.s / 2, rtol=0, atol=0)
    assert not np.any(m.f_profile.values)


def test_regions(eh):
    eps = 0.02
    m = build_glued_metric(eh, eps)
    s = m.s
    inner = s <= eps
    phi_inner = eps**2 * eh_jets(s[inner] / eps**2, 1.0)[0]
    assert np.allclose(m.glued_potential.values[inner], phi_inner, rtol=1e-12, atol=1e-16)
    outer = s >= 4 * eps
    assert np.array_equal(m.glued_potential.values[outer], s[outer] / 2)
    # Ricci-flat core
    ratio = 4 * m.glued_potential.dt1 * m.glued_potential.dt2 / s**2
    assert np.max(np.abs(ratio[inner] - 1)) < 1e-10


def test_f_support(eh):
    for eps in EPS:
        m = build_glued_metric(eh, eps)
        lo, hi = annulus_bounds(eps)
        off = (m.s < eps) | (m.s > 4 * eps)
        assert not np.any(m.f_profile.values[off])
        assert eps <= lo and hi <= 4 * eps


def test_f_over_eps_squared_is_stable(eh):
    ratios = f_sup_ratios(eh, EPS)
    assert max(ratios) / min(ratios) < 2


def test_weight_function():
    w = WeightFunction(0.01)
    s = np.geomspace(1e-8, 10, 100)
    vals = w(s)
    assert vals.min() == 0.01 and vals.max() == 1.0
    mid = (s > 1e-4) & (s < 1)
    assert np.allclose(vals[mid], np.sqrt(s[mid]))


def test_weighted_norm_trivial_cases(eh):
    m = build_glued_metric(eh, 0.01)
    ones = RadialProfile(m.s, np.ones_like(m.s))
    assert weighted_ck_norm(ones, m, 0, -1.0) == pytest.approx(1.0)
    for delta in (-1.0, -0.5, 0.5):
        prof = RadialProfile(m.s, m.weight(m.s) ** delta)
        assert weighted_ck_norm(prof, m, 0, delta) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        weighted_ck_norm(ones, m, 3, -1.0)


def test_f_weighted_norm_scales_at_least_like_the_bound(eh):
    # f is a source term, so it is measured with the weight shifted by two: delta - 2 = -3
    norms = []
    for e in EPS:
        m = build_glued_metric(eh, e)
        norms.append(weighted_ck_norm(m.f_profile, m, 0, -3.0))
    slope, _ = fit_slope(EPS, norms)
    assert slope >= 3.5 - 0.25


def test_w_epsilon_quadrature_and_quartic_rate(eh):
    ks = []
    for eps in EPS:
        m = build_glued_metric(eh, eps)
        wq = w_epsilon_quadrature(m)
        assert abs(wq - w_epsilon_exact(m)) < 5e-9
        ks.append(abs(wq - 1) / eps**4)
    assert max(ks) / min(ks) < 1.5


def test_deviation_form_is_difference_of_kahler_forms(eh):
    eps = 0.05
    rng = np.random.default_rng(2)
    dirs = rng.normal(size=(50, 4))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    pts = dirs * np.sqrt(np.linspace(0.5 * eps, 5 * eps, 50))[:, None]
    m = build_glued_metric(eh, eps)
    assert np.allclose(glued_deviation_form(pts, eh, eps), m.kahler_form(pts) - OMEGA0, atol=1e-12)


def test_potential_difference_rates_on_annulus(eh):
    sups = {0: [], 1: [], 2: []}
    for eps in EPS:
        s = np.linspace(eps, 4 * eps, 400)
        j = glued_jets(s, eh, eps)
        r = np.sqrt(s)
        h0 = j["phi"] - s / 2
        h1 = j["d1"] - 0.5
        sups[0].append(np.max(np.abs(h0)))
        sups[1].append(np.max(np.abs(2 * r * h1)))
        sups[2].append(np.max(np.abs(2 * h1 + 4 * s * j["d2"])))
    for k in range(3):
        slope, _ = fit_slope(EPS, sups[k])
        assert abs(slope - (3 - k / 2)) < 0.15, (k, slope)


def test_decay_sweep_slopes(eh):
    r0 = decay_sweep(eh, EPS, 0)
    r1 = decay_sweep(eh, EPS, 1)
    assert abs(r0.slopes["sup"] - 2.0) <= 0.15
    assert abs(r1.slopes["sup"] - 1.5) <= 0.2
    assert [row["epsilon"] for row in r0.rows] == EPS


def test_decay_sweep_flat_model_vanishes():
    rep = decay_sweep(ALEModel(a=0.0), EPS, 0)
    assert "exact vanishing" in rep.notes
    assert all(row["sup_value"] == 0 for row in rep.rows)


def test_decay_sweep_rejects_unsorted(eh):
    with pytest.raises(ValueError):
        decay_sweep(eh, [0.01, 0.1], 0)


def test_too_large_epsilon_rejected(eh):
    with pytest.raises(DegenerateGluingError):
        build_glued_metric(eh, 0.5)


@given(st.floats(-4, 6), st.floats(0.1, 10))
@settings(max_examples=40, deadline=None)
def test_fit_slope_recovers_power_laws(p, c):
    eps = np.array(EPS)
    slope, err = fit_slope(eps, c * eps**p)
    assert slope == pytest.approx(p, abs=1e-9)
    assert err < 1e-6


def test_fit_slope_needs_two_points():
    with pytest.raises(ValueError):
        fit_slope([0.1, 0.05], [1.0, 0.0])


def test_glued_points_helper():
    pts = radial_points(np.array([0.25]))
    assert pts.shape == (1, 4)
