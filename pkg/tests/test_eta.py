import numpy as np
import pytest

from sympsig import eta as E
from sympsig import symplectic as sp
from sympsig.errors import ConvergenceError, UnsupportedHolonomyError

from conftest import rot


def parabolic(lam, mu):
    return np.array([[lam, mu], [0.0, lam]])


def test_eigenvalue_residual_examples():
    th = 1.1
    h = E.circle_holonomy(rot(th))
    assert E.eigenvalue_residual(th / (2 * np.pi) + 3, h) < 1e-20
    lam = 2.5
    hh = E.circle_holonomy(np.diag([lam, 1 / lam]))
    for k in range(3):
        s = np.sqrt(np.log(lam) ** 2 + (2 * np.pi * k) ** 2) / (2 * np.pi)
        assert E.eigenvalue_residual(s, hh) < 1e-16
        assert E.eigenvalue_residual(-s, hh) < 1e-16
    assert E.eigenvalue_residual(th / (2 * np.pi) + 0.5, h) > 0.1


def test_enumerate_elliptic_quarter():
    spec = E.enumerate_spectrum(E.circle_holonomy(rot(np.pi / 2)), 3)
    values = [s for s, _ in spec.eigenvalues]
    np.testing.assert_allclose(values, [0.25 + k for k in range(-3, 3)], atol=1e-12)
    assert all(m == 2 for _, m in spec.eigenvalues)
    assert not spec.warnings


def test_enumerate_hyperbolic_pattern():
    lam = np.exp(2 * np.pi)
    spec = E.enumerate_spectrum(E.circle_holonomy(np.diag([lam, 1 / lam])), 2)
    expected = [(-np.sqrt(2), 2), (-1.0, 1), (1.0, 1), (np.sqrt(2), 2)]
    assert [m for _, m in spec.eigenvalues] == [m for _, m in expected]
    np.testing.assert_allclose([s for s, _ in spec.eigenvalues], [s for s, _ in expected], atol=1e-10)
    assert E.is_symmetric(spec)


def test_enumerate_minus_identity_half_integers():
    spec = E.enumerate_spectrum(E.circle_holonomy(-np.eye(2)), 2)
    np.testing.assert_allclose([s for s, _ in spec.eigenvalues], [-1.5, -0.5, 0.5, 1.5], atol=1e-12)
    assert all(m == 2 for _, m in spec.eigenvalues)


def test_spectrum_points_are_roots(rng):
    g = sp.random_symplectic(2, rng)
    L = g @ sp.block_diag_symplectic(rot(0.9), rot(2.8)) @ np.linalg.inv(g)
    h = E.circle_holonomy(L)
    spec = E.enumerate_spectrum(h, 12)
    for s, m in spec.eigenvalues:
        assert E.eigenvalue_residual(s, h) <= 1e-8
        assert E.kernel_dimension(s, h) == m


def test_weyl_count(rng):
    for n, L in ((1, rot(0.7)), (2, sp.block_diag_symplectic(rot(0.3), rot(1.9))),
                 (1, np.diag([3.0, 1 / 3])), (1, parabolic(1.0, 2.0))):
        spec = E.enumerate_spectrum(E.circle_holonomy(L), 20)
        assert abs(spec.count - E.weyl_count(n, 20)) <= 4 * n


def test_mode_spectrum_agrees_with_scan(rng):
    g = sp.random_symplectic(1, rng)
    J0 = g @ sp.standard_j(1) @ np.linalg.inv(g)
    h = E.circle_holonomy(parabolic(1.0, -1.3), J0=J0)
    mode = E.mode_spectrum(h, 10)
    full = E.enumerate_spectrum(h, 10)
    np.testing.assert_allclose(full.expanded(), mode.expanded(), atol=1e-8)
    # roots closer than a grid step can cancel in the bare scan
    scan = E.enumerate_spectrum(h, 10, cross_check=False)
    assert set(np.round(scan.expanded(), 8)) <= set(np.round(mode.expanded(), 8))
    assert full.count - scan.count == full.recovered


def test_eta_numeric_examples():
    elliptic = E.eta_numeric(E.enumerate_spectrum(E.circle_holonomy(rot(np.pi / 2)), 40))
    assert elliptic.value == pytest.approx(1.0, abs=1e-3)
    assert elliptic.method == "regularized-numeric"
    hyper = E.eta_numeric(E.enumerate_spectrum(E.circle_holonomy(np.diag([2.0, 0.5])), 40))
    assert abs(hyper.value) < 1e-3


def test_parabolic_numeric_matches_spectral_convention():
    for lam, mu in ((1.0, 3.0), (1.0, -2.0), (-1.0, 1.5)):
        hol = E.circle_holonomy(parabolic(lam, mu))
        num = E.eta_numeric(E.enumerate_spectrum(hol, 40)).value
        assert num == pytest.approx(E.eta_closed_sl2(hol.log, "spectral").value, abs=1e-6)


def test_table_convention_differs_by_one_for_unipotent_plus():
    # the spectral value counts the one-dimensional eigenspace at -mu/2pi once
    for mu in (3.0, -2.0, 0.5):
        log = sp.boundary_log_sl2(parabolic(1.0, mu))
        diff = E.eta_closed_sl2(log, "spectral").value - E.eta_closed_sl2(log, "table").value
        assert diff == pytest.approx(np.sign(mu))


def test_eta_closed_examples():
    assert E.eta_closed_sl2(sp.boundary_log_sl2(rot(np.pi / 2))).value == pytest.approx(1.0)
    assert E.eta_closed_sl2(sp.boundary_log_sl2(parabolic(1.0, -2 * np.pi))).value == pytest.approx(0.0)
    assert E.eta_closed_sl2(sp.boundary_log_sl2(parabolic(-1.0, np.pi))).value == pytest.approx(-1.0)
    r = E.eta_closed_sl2(sp.boundary_log_sl2(np.diag([4.0, 0.25])))
    assert r.value == 0.0 and r.error_estimate == 0.0 and r.method == "closed-form"


def test_eta_closed_needs_canonical():
    log = sp.principal_log_elliptic(sp.block_diag_symplectic(rot(0.2), rot(0.3)))
    with pytest.raises(UnsupportedHolonomyError):
        E.eta_closed_sl2(log)


def test_eta_elliptic_block_examples():
    assert E.eta_elliptic_block([np.pi / 2]).value == pytest.approx(1.0)
    assert E.eta_elliptic_block([np.pi / 2, 3 * np.pi / 2]).value == pytest.approx(0.0)
    assert E.eta_elliptic_block([0.0, 0.0, 0.0]).value == 6.0


def test_eta_block_additivity(rng):
    for _ in range(3):
        angles = rng.uniform(0.1, 2 * np.pi - 0.1, size=2)
        L = sp.block_diag_symplectic(*(rot(t) for t in angles))
        whole = E.eta_numeric(E.enumerate_spectrum(E.circle_holonomy(L), 40)).value
        parts = sum(E.eta_numeric(E.enumerate_spectrum(E.circle_holonomy(rot(t)), 40)).value for t in angles)
        assert whole == pytest.approx(parts, abs=1e-3)
        assert whole == pytest.approx(E.eta_elliptic_block(angles).value, abs=1e-3)


def test_eta_numeric_convergence_error():
    hol = E.circle_holonomy(parabolic(1.0, 3.0), J0=np.array([[0.0, -2.0], [0.5, 0.0]]))
    with pytest.raises(ConvergenceError) as info:
        E.eta_numeric(E.enumerate_spectrum(hol, 40), tol=1e-14)
    assert info.value.partial is not None and info.value.estimate > 1e-14


def test_alpha_closed_examples():
    assert E.boundary_alpha_integral(E.circle_holonomy(rot(0.9))).value == 0.0
    assert E.boundary_alpha_integral(E.circle_holonomy(parabolic(1.0, 3.0))).value == pytest.approx(-3 / np.pi)
    assert E.boundary_alpha_integral(E.circle_holonomy(np.diag([3.0, 1 / 3]))).value == 0.0


@pytest.mark.parametrize("L", [rot(0.9), parabolic(1.0, 3.0), parabolic(-1.0, -0.8), np.diag([3.0, 1 / 3])])
def test_alpha_quadrature_matches_closed(L):
    hol = E.circle_holonomy(L)
    closed = E.boundary_alpha_integral(hol).value
    quad = E.boundary_alpha_integral(hol, closed=False)
    assert quad.method == "quadrature"
    assert quad.value == pytest.approx(closed, abs=1e-7)


def test_rho_examples():
    th = 2.1
    assert E.rho_invariant([E.circle_holonomy(rot(th))]).value == pytest.approx(2 * (1 - th / np.pi))
    assert E.rho_invariant([E.circle_holonomy(np.diag([2.0, 0.5]))]).value == pytest.approx(0.0, abs=1e-12)
    # parabolic lambda = 1: alpha plus the spectral eta gives -sign(mu)
    assert E.rho_invariant([E.circle_holonomy(parabolic(1.0, 3.0))]).value == pytest.approx(-1.0)
    assert E.rho_invariant([E.circle_holonomy(parabolic(1.0, -3.0))]).value == pytest.approx(1.0)
    assert E.rho_invariant([E.circle_holonomy(parabolic(-1.0, 3.0))]).value == pytest.approx(0.0)


@pytest.mark.parametrize("L", [parabolic(1.0, 2.0), parabolic(1.0, -1.0), rot(1.3), np.diag([2.0, 0.5])])
def test_rho_independent_of_initial_structure(L, rng):
    base = E.rho_invariant([E.circle_holonomy(L)]).value
    g = sp.random_symplectic(1, rng)
    J0 = g @ sp.standard_j(1) @ np.linalg.inv(g)
    moved = E.rho_invariant([E.circle_holonomy(L, J0=J0)]).value
    assert moved == pytest.approx(base, abs=1e-5)


def test_rho_conjugation_invariance(rng):
    g = sp.random_symplectic(2, rng)
    L = sp.block_diag_symplectic(rot(0.5), rot(4.0))
    hol = E.circle_holonomy(L)
    a = E.rho_invariant([hol]).value
    b = E.rho_invariant([hol.conjugate(g)]).value
    assert b == pytest.approx(a, abs=1e-6)


def test_higher_rank_hyperbolic_unsupported():
    with pytest.raises(UnsupportedHolonomyError):
        E.circle_holonomy(np.diag([2.0, 3.0, 0.5, 1 / 3]))
