import cmath

import numpy as np
import pytest
import scipy.linalg as sla

from sympsig import siegel as sg
from sympsig import symplectic as sp
from sympsig.errors import (CompatibilityError, DegenerateInputError, PotentialSingularityError,
                            UnsupportedHolonomyError)

from conftest import rot


def test_blocks_examples(rng):
    b = sg.blocks(np.eye(4))
    np.testing.assert_allclose(b.Z1, np.eye(2), atol=1e-14)
    np.testing.assert_allclose(b.Z2, 0, atol=1e-14)
    b = sg.blocks(rot(0.8))
    assert b.Z1[0, 0] == pytest.approx(np.exp(-0.8j))
    assert abs(b.Z2[0, 0]) < 1e-14
    for n in (1, 2, 3):
        L = sp.random_symplectic(n, rng)
        assert np.abs(sg.blocks(L).reassemble() - L).max() < 1e-10


def test_act_examples(rng):
    W = sg.random_point(2, rng)
    np.testing.assert_allclose(sg.act(np.eye(4), W), W, atol=1e-14)
    w = np.array([[0.3 + 0.2j]])
    assert sg.act(rot(0.7), w)[0, 0] == pytest.approx(np.exp(-1.4j) * w[0, 0])


def test_act_group_law(rng):
    for n in (1, 2, 3):
        for _ in range(10):
            L1, L2 = sp.random_symplectic(n, rng), sp.random_symplectic(n, rng)
            W = sg.random_point(n, rng)
            lhs = sg.act(L1 @ L2, W)
            rhs = sg.act(L1, sg.act(L2, W))
            assert np.abs(lhs - rhs).max() < 1e-9


def test_act_preserves_interior_and_shilov(rng):
    for n in (1, 2):
        L = sp.random_symplectic(n, rng)
        assert sg.is_interior(sg.act(L, sg.random_point(n, rng)))
        assert sg.is_shilov(sg.act(L, sg.random_shilov(n, rng)), 1e-8)


def test_jf_examples(rng):
    np.testing.assert_allclose(sg.jF(np.zeros((2, 2))), sp.standard_j(2), atol=1e-14)
    for n in (1, 2, 3):
        W = sg.random_point(n, rng)
        J = sg.jF(W)
        assert np.abs(J @ J + np.eye(2 * n)).max() < 1e-10
        assert sg.is_compatible(J)


def test_jf_equivariance(rng):
    for n in (1, 2):
        L = sp.random_symplectic(n, rng)
        W = sg.random_point(n, rng)
        lhs = sg.jF(sg.act(L, W))
        rhs = L @ sg.jF(W) @ np.linalg.inv(L)
        assert np.abs(lhs - rhs).max() < 1e-8


def test_w_from_j_round_trip(rng):
    np.testing.assert_allclose(sg.w_from_J(sp.standard_j(2)), 0, atol=1e-14)
    for _ in range(500):
        n = int(rng.integers(1, 4))
        W = sg.random_point(n, rng)
        assert np.abs(sg.w_from_J(sg.jF(W)) - W).max() < 1e-8


def test_w_from_j_hyperbolic_loop():
    lam = 3.0
    B = np.log(lam) / (2 * np.pi) * np.diag([1.0, -1.0])
    for x in (0.2, 0.9, 2.5):
        J = sla.expm(-x * B) @ sp.standard_j(1) @ sla.expm(x * B)
        a = np.exp(x * np.log(lam) / np.pi)
        assert sg.w_from_J(J)[0, 0] == pytest.approx((a - 1 / a) / (2 + a + 1 / a), abs=1e-12)


def test_w_from_j_rejects_incompatible():
    with pytest.raises(CompatibilityError):
        sg.w_from_J(-sp.standard_j(1))


def test_kahler_form_examples(rng):
    one, i = np.array([[1.0 + 0j]]), np.array([[1j]])
    assert sg.kahler_form(np.zeros((1, 1)), one, i) == pytest.approx(4.0)
    V = sg.random_tangent(2, rng)
    W = sg.random_point(2, rng)
    assert abs(sg.kahler_form(W, V, V)) < 1e-12


def test_kahler_form_invariance(rng):
    for n in (1, 2, 3):
        L = sp.random_symplectic(n, rng)
        W = sg.random_point(n, rng)
        V1, V2 = sg.random_tangent(n, rng), sg.random_tangent(n, rng)
        lhs = sg.kahler_form(sg.act(L, W), sg.act_differential(L, W, V1), sg.act_differential(L, W, V2))
        assert lhs == pytest.approx(sg.kahler_form(W, V1, V2), rel=1e-8, abs=1e-10)


def test_curvature_examples():
    assert sg.hol_sect_curvature_at_zero(np.eye(3)) == pytest.approx(-1 / 3)
    assert sg.hol_sect_curvature_at_zero(np.array([[2.0 - 1j]])) == pytest.approx(-1.0)
    e11 = np.zeros((2, 2))
    e11[0, 0] = 1
    assert sg.hol_sect_curvature_at_zero(e11) == pytest.approx(-1.0)
    with pytest.raises(DegenerateInputError):
        sg.hol_sect_curvature_at_zero(np.zeros((2, 2)))


def test_ricci_examples():
    assert sg.ricci_check_at_zero(1, 1e-3) < 1e-5
    assert sg.ricci_check_at_zero(2, 1e-3) < 1e-4
    assert sg.ricci_check_at_zero(3, 1e-3) < 1e-3


def test_chern_form_ratio(rng):
    for n in (1, 2, 3):
        W = sg.random_point(n, rng, 0.7)
        assert sg.chern_form_check(W, sg.random_tangent(n, rng)) < 1e-5


def test_kahler_potential_examples(rng):
    z = np.zeros((2, 2))
    assert sg.kahler_potential(z, z) == 0.0
    W = sg.random_point(2, rng)
    _, logdet = np.linalg.slogdet(np.eye(2) - W.conj() @ W)
    assert sg.kahler_potential(z, W) == pytest.approx(-logdet)


def test_kahler_potential_stabilizer_shift(rng):
    n = 2
    W0 = sg.random_point(n, rng, 0.6)
    g = sg.translation(W0)
    u = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))[0]
    L = g @ sp.unitary_to_symplectic(u) @ np.linalg.inv(g)
    b = sg.blocks(L)
    const = 2 * np.log(abs(np.linalg.det(b.Z1.conj() - W0.conj() @ b.Z2)))
    for _ in range(100):
        W = sg.random_point(n, rng)
        shift = sg.kahler_potential(W0, sg.act(L, W)) - sg.kahler_potential(W0, W)
        assert shift == pytest.approx(const, abs=1e-9)


def test_kahler_potential_singular_divisor():
    with pytest.raises(PotentialSingularityError):
        sg.kahler_potential(np.array([[2.0 + 0j]]), np.array([[0.5 + 0j]]))


def test_potential_reproduces_kahler_form(rng):
    # 2i dd-bar psi = omega, tested on the pair (V, iV)
    h = 1e-4
    for n in (1, 2):
        W0 = sg.random_shilov(n, rng)
        W = sg.random_point(n, rng, 0.6)
        V = sg.random_tangent(n, rng)

        def d2(u):
            return (sg.kahler_potential(W0, W + h * u) - 2 * sg.kahler_potential(W0, W)
                    + sg.kahler_potential(W0, W - h * u)) / h ** 2

        lhs = d2(V) + d2(1j * V)
        rhs = sg.kahler_form(W, V, 1j * V)
        assert lhs == pytest.approx(rhs, rel=1e-5)


def test_alpha_examples(rng):
    z = np.zeros((2, 2))
    assert abs(sg.alpha(z, z, sg.random_tangent(2, rng))) < 1e-14


def test_alpha_parabolic_loop():
    lam, mu = 1.0, 3.0
    L = np.array([[lam, mu], [0.0, lam]])
    B = np.array([[0.0, mu / (2 * np.pi * lam)], [0.0, 0.0]])
    wstar = sg.fixed_point(L)
    for x in (0.3, 1.7, 4.0):
        J = sla.expm(-x * B) @ sp.standard_j(1) @ sla.expm(x * B)
        w = sg.w_from_J(J)
        dw = sg.infinitesimal_action(-B, w)
        assert sg._alpha_raw(wstar, w, dw) == pytest.approx(-mu / (2 * np.pi * lam), abs=1e-10)


def test_alpha_is_primitive(rng):
    # d alpha(V1, V2) = V1 alpha(V2) - V2 alpha(V1) by central differences
    h = 1e-4
    for _ in range(5):
        W0 = sg.random_point(2, rng, 0.5)
        W = sg.random_point(2, rng, 0.5)
        V1, V2 = sg.random_tangent(2, rng), sg.random_tangent(2, rng)

        def deriv(u, v):
            return (sg.alpha(W0, W + h * u, v) - sg.alpha(W0, W - h * u, v)) / (2 * h)

        assert deriv(V1, V2) - deriv(V2, V1) == pytest.approx(sg.kahler_form(W, V1, V2), rel=1e-5)


def test_geodesic_examples(rng):
    W = sg.random_point(2, rng)
    np.testing.assert_allclose(sg.geodesic(np.zeros((2, 2)), W, 1.0), W, atol=1e-12)
    t = 0.6
    g = sg.geodesic(np.zeros((1, 1)), np.array([[t]]), 0.5)[0, 0]
    assert g == pytest.approx(np.tanh(np.arctanh(t) / 2))
    p, q = sg.random_point(3, rng), sg.random_point(3, rng)
    assert np.abs(sg.geodesic(p, q, 0.5) - sg.geodesic(q, p, 0.5)).max() < 1e-10


def test_geodesic_needs_interior_endpoint(rng):
    with pytest.raises(DegenerateInputError):
        sg.geodesic(sg.random_shilov(1, rng), sg.random_shilov(1, rng), 0.5)


def _disk_angle(a, b, c):
    def todisk(z):
        return (z - a) / (1 - np.conj(a) * z)
    return abs(cmath.phase(todisk(b) / todisk(c)))


def test_triangle_angle_defect(rng):
    for _ in range(20):
        a, b, c = (complex(sg.random_point(1, rng)[0, 0]) for _ in range(3))
        area = np.pi - _disk_angle(a, b, c) - _disk_angle(b, c, a) - _disk_angle(c, a, b)
        val = sg.triangle_integral(*(np.array([[z]]) for z in (a, b, c)))
        assert abs(val) == pytest.approx(area, abs=1e-8)


def test_triangle_degenerate(rng):
    x, y = sg.random_point(2, rng), sg.random_point(2, rng)
    assert sg.triangle_integral(x, x, y) == 0.0
    assert sg.triangle_integral_2d(x, y, y) == 0.0


def test_ideal_triangle_area():
    pts = [np.array([[np.exp(1j * t)]]) for t in (0.0, 2.0, 4.0)]
    assert abs(sg.triangle_integral(*pts)) == pytest.approx(np.pi, abs=1e-6)


def test_triangle_antisymmetry(rng):
    x, y, z = (sg.random_point(2, rng) for _ in range(3))
    v = sg.triangle_integral(x, y, z)
    assert sg.triangle_integral(y, x, z) == -v
    assert sg.triangle_integral(y, z, x) == v


def test_triangle_edge_vs_2d(rng):
    for n in (1, 2):
        for _ in range(3):
            x, y, z = (sg.random_point(n, rng) for _ in range(3))
            assert sg.triangle_integral(x, y, z) == pytest.approx(sg.triangle_integral_2d(x, y, z), abs=1e-4)


def test_triangle_sp_invariance(rng):
    for n in (1, 2):
        x, y, z = (sg.random_point(n, rng) for _ in range(3))
        L = sp.random_symplectic(n, rng)
        moved = [sg.act(L, p) for p in (x, y, z)]
        assert sg.triangle_integral(*moved) == pytest.approx(sg.triangle_integral(x, y, z), abs=1e-6)


def test_cocycle_examples(rng):
    x = sg.random_point(2, rng, 0.5)
    g0, g1, g2, g3 = (sp.random_symplectic(2, rng) for _ in range(4))
    assert sg.cocycle(g0, g0, g1, x) == 0.0
    assert sg.cocycle(g1, g0, g2, x) == -sg.cocycle(g0, g1, g2, x)
    dc = (sg.cocycle(g1, g2, g3, x) - sg.cocycle(g0, g2, g3, x)
          + sg.cocycle(g0, g1, g3, x) - sg.cocycle(g0, g1, g2, x))
    assert abs(dc) < 1e-6
    assert abs(sg.cocycle(g0, g1, g2, x)) <= 1.0 + 1e-9


def test_fixed_point_examples(rng):
    np.testing.assert_allclose(sg.fixed_point(rot(1.2)), 0, atol=1e-12)
    assert sg.fixed_point(np.array([[1.0, 2.5], [0.0, 1.0]]))[0, 0] == pytest.approx(-1.0)
    w = sg.fixed_point(np.diag([2.0, 0.5]))[0, 0]
    assert abs(abs(w) - 1) < 1e-12 and abs(w.imag) < 1e-12


def test_fixed_point_is_fixed(rng):
    g = sp.random_symplectic(2, rng)
    gi = np.linalg.inv(g)
    ell = g @ sp.block_diag_symplectic(rot(0.4), rot(2.2)) @ gi
    par = g @ sp.block_diag_symplectic(np.array([[1.0, 1.5], [0, 1]]), np.array([[-1.0, 0.7], [0, -1]])) @ gi
    for L in (ell, par):
        W = sg.fixed_point(L)
        assert np.abs(sg.act(L, W) - W).max() < 1e-8


def test_fixed_point_higher_rank_hyperbolic_unsupported():
    with pytest.raises(UnsupportedHolonomyError):
        sg.fixed_point(np.diag([2.0, 3.0, 0.5, 1 / 3]))


def test_edge_alpha_bound(rng):
    # |integral of alpha_x over an edge| equals the triangle area, bounded by n pi
    for n in (1, 2):
        for _ in range(5):
            x = sg.random_shilov(n, rng)
            y, z = sg.random_point(n, rng), sg.random_shilov(n, rng)
            assert abs(sg.edge_integral(x, y, z)) <= n * np.pi + 1e-6
