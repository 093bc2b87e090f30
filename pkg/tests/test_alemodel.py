import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kummerflow.alemodel import (
    ALEModel,
    RadialProfile,
    asd_check,
    asd_form,
    asd_potential,
    asd_potential_jets,
    asd_residuals,
    calibrated_normalization,
    circle_generator,
    contract,
    default_grid,
    eh_jets,
    eh_potential,
    flat_hamiltonian,
    hamiltonian_form,
    integrate_eh_ode,
    log_grid,
    moment_map_eh,
    moment_map_flat,
    radial_pairing,
    radial_pairing_closed_form,
    radial_points,
    ricci_flat_residual,
    sample_points,
)
from kummerflow.cohomled import cartan_inverse
from kummerflow.flatforms import OMEGA0, OMEGA_MINUS, TwoFormAtPoint, wedge


@pytest.fixture(scope="module")
def eh():
    return ALEModel(a=1.0)


def stencil_errors(n):
    s = log_grid(0.1, 10.0, n)
    f1, f2 = RadialProfile(s, s**3 - 2 * s).t_derivatives()
    scale = 9 * s[-1] ** 3
    return np.max(np.abs(f1 - (3 * s**3 - 2 * s))) / scale, np.max(np.abs(f2 - (9 * s**3 - 2 * s))) / scale


def test_profile_stencils_converge():
    coarse, fine = stencil_errors(200), stencil_errors(400)
    for c, f in zip(coarse, fine):
        assert f < 1e-5
        assert c / f > 4  # at least second order in the spacing


def test_closed_form_matches_integrated_ode():
    for a in (0.5, 1.0, 2.0):
        grid = default_grid(a)
        numeric = integrate_eh_ode(a, grid)
        exact = eh_jets(grid, a)[1]
        assert np.max(np.abs(numeric / exact - 1)) < 1e-8
        assert ricci_flat_residual(eh_potential(a, grid)) < 1e-10


def test_flat_limit():
    _, p1, p2, _ = eh_jets(default_grid(0.0), 0.0)
    assert np.all(p1 == 0.5) and np.all(p2 == 0)


def test_core_and_tail_asymptotics():
    assert 1e-8 * eh_jets(1e-8, 1.0)[1] == pytest.approx(0.5, rel=1e-8)
    for s in (1e3, 1e4):
        assert s * s * (eh_jets(s, 1.0)[1] - 0.5) == pytest.approx(0.25, rel=1e-6)


def test_potential_deviation_decays_like_inverse_s():
    s = np.geomspace(1e2, 1e4, 20)
    scaled = s * (eh_jets(s, 1.0)[0] - s / 2)
    assert np.all(np.abs(scaled) < 0.26)
    assert scaled[-1] == pytest.approx(-0.25, rel=1e-6)


@given(st.floats(0.3, 3.0), st.floats(0.3, 3.0))
@settings(max_examples=25, deadline=None)
def test_scaling_covariance(lam, a):
    s = np.geomspace(1e-2, 1e2, 50)
    lhs = eh_jets(lam * lam * s, lam * a)[0]
    rhs = lam * lam * eh_jets(s, a)[0]
    diff = lhs - rhs
    assert np.ptp(diff) < 1e-10 * max(1.0, np.abs(lhs).max())


def test_eh_form_is_ricci_flat_at_random_points(eh):
    pts = sample_points(np.random.default_rng(3), 200, 1e-3, 1e3)
    omega = eh.kahler_form(pts)
    # omega^2 = 1/2 Omega ^ conj(Omega) = omega_0^2
    assert np.allclose(wedge(omega, omega), wedge(OMEGA0, OMEGA0), rtol=1e-10)


def test_flat_moment_map_examples():
    assert moment_map_flat(1, 0) == (0.5, 0.0, 0.0)
    assert moment_map_flat(1, 1) == (0.0, 0.0, 1.0)
    assert moment_map_flat(0, 0) == (0.0, 0.0, 0.0)


def test_eh_moment_map_flat_limit_and_decay():
    pts = sample_points(np.random.default_rng(5), 100, 1e-2, 1e2)
    flat = ALEModel(a=0.0)
    assert np.array_equal(moment_map_eh(flat, pts), flat_hamiltonian(pts, 1))
    outer = sample_points(np.random.default_rng(6), 200, 1e2, 1e4)
    s = np.sum(outer**2, axis=1)
    gap = s * np.abs(moment_map_eh(ALEModel(a=1.0), outer) - flat_hamiltonian(outer, 1))
    assert gap.max() < 1.0


def finite_difference_gradient(fn, pts, h=1e-6):
    grad = np.zeros_like(pts)
    for i in range(4):
        e = np.zeros(4)
        e[i] = h
        grad[:, i] = (fn(pts + e) - fn(pts - e)) / (2 * h)
    return grad


def test_moment_map_generates_circle_action(eh):
    pts = sample_points(np.random.default_rng(7), 100, 1e-1, 1e1)
    dmu = finite_difference_gradient(lambda p: moment_map_eh(eh, p), pts)
    iota = contract(circle_generator(pts), eh.kahler_form(pts))
    rel = np.linalg.norm(dmu - iota, axis=1) / np.linalg.norm(iota, axis=1)
    assert rel.max() < 1e-6


def test_asd_potential_two_term_ode(eh):
    s = eh.grid
    _, d1, _, _ = asd_potential_jets(s, 1.0, 1.0)
    assert np.allclose(s * np.sqrt(s * s + 1) * d1, 2.0, rtol=1e-13)
    # v = psi' phi' satisfies 2 v + s v' = 0
    ss = np.geomspace(1e-2, 1e2, 60)
    h = 1e-5 * ss
    v = lambda x: asd_potential_jets(x, 1.0, 1.0)[1] * eh_jets(x, 1.0)[1]  # noqa: E731
    dv = (v(ss + h) - v(ss - h)) / (2 * h)
    assert np.max(np.abs(2 * v(ss) + ss * dv) / np.abs(2 * v(ss))) < 1e-7


def test_asd_form_wedges_to_zero_against_eh(eh):
    pts = sample_points(np.random.default_rng(8), 100, 1e-2, 1e2)
    alpha = asd_form(eh, 1.0, pts)
    omega = eh.kahler_form(pts)
    scale = np.sqrt(np.abs(wedge(alpha, alpha)) * wedge(omega, omega))
    assert np.max(np.abs(wedge(alpha, omega)) / scale) < 1e-10


def test_radial_pairing_quadrature_matches_boundary_formula(eh):
    for c in (0.5, 1.0):
        assert radial_pairing(eh, c) == pytest.approx(radial_pairing_closed_form(eh, c), abs=1e-8)


def test_calibrated_pairing_is_minus_half(eh):
    target = -float(cartan_inverse("A", 1)[0, 0])
    c = calibrated_normalization(eh, target)
    assert radial_pairing(eh, c) == pytest.approx(-0.5, abs=1e-6)
    with pytest.raises(ValueError):
        calibrated_normalization(eh, 0.5)


def test_asd_check_examples():
    assert asd_check(TwoFormAtPoint(OMEGA_MINUS[0])) == 0
    assert asd_check(TwoFormAtPoint(OMEGA0)) == pytest.approx(2.0)


def test_forms_are_asd_for_eh_metric(eh):
    pts = sample_points(np.random.default_rng(0), 100, 1e-2, 1e2)
    metric = eh.metric(pts)
    c = calibrated_normalization(eh, -0.5)
    assert asd_residuals(asd_form(eh, c, pts), metric).max() < 1e-8
    for alpha in (1, 2, 3):
        assert asd_residuals(hamiltonian_form(eh, pts, alpha), metric).max() < 1e-8


def test_decay_ladder_for_asd_potential(eh):
    s = eh.grid[eh.grid > 1e2]
    psi, d1, _, _ = asd_potential_jets(s, 1.0, 1.0)
    assert np.ptp(s * psi) < 0.1 * np.abs(s * psi).max() + 1e-12
    # |d psi| in the flat metric is 2 sqrt(s) |psi'|
    grad = 2 * np.sqrt(s) * np.abs(d1)
    assert np.max(s**1.5 * grad) < 5.0


def test_unsupported_order_and_bad_parameters():
    with pytest.raises(NotImplementedError):
        ALEModel(a=1.0, gamma_order=3)
    with pytest.raises(ValueError):
        asd_potential(ALEModel(a=0.0), 1.0)
    with pytest.raises(ValueError):
        log_grid(1.0, 0.5)
    assert np.all(radial_points([4.0])[0] == [2.0, 0, 0, 0])
