"""Geometry of the Siegel disk of complex symmetric W with I - conj(W) W > 0.

Points of the closed disk are plain ``n x n`` complex arrays.  A point W
corresponds to the complex Lagrangian spanned by ``U [W; I]``; real
Lagrangians ``[X; Y]`` give the Shilov boundary points
``W = (Y + iX)(Y - iX)^{-1}``, so ``W = -I`` is ``R^n x 0`` and ``W = I``
is ``0 x R^n``.  The upper half space coordinate is ``Z = X Y^{-1}``.

Group elements act through their Moebius matrix ``M = U^{-1} L U``, which
has the block form ``[[Z1, Z2], [conj Z2, conj Z1]]``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy.integrate import quad

from .errors import (ClassificationError, CompatibilityError, ConvergenceError,
                     DegenerateInputError, PotentialSingularityError,
                     SingularActionError, UnsupportedHolonomyError, ValidationError)
from . import symplectic as sp

MARGIN = 1e-12
SYM_TOL = 1e-10
QUAD_TOL = 1e-8
DEGENERATE_TOL = 1e-12


def u_matrix(n: int) -> np.ndarray:
    i = np.eye(n)
    return np.block([[-1j * i, 1j * i], [i, i]])


def u_inverse(n: int) -> np.ndarray:
    i = np.eye(n)
    return np.block([[0.5j * i, 0.5 * i], [-0.5j * i, 0.5 * i]])


def _sym(W: np.ndarray) -> np.ndarray:
    return 0.5 * (W + W.T)


def _dim(W: np.ndarray) -> int:
    W = np.asarray(W)
    if W.ndim != 2 or W.shape[0] != W.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {W.shape}")
    return W.shape[0]


def interior_margin(W: np.ndarray) -> float:
    """Smallest eigenvalue of I - conj(W) W."""
    W = np.asarray(W, dtype=complex)
    m = np.eye(_dim(W)) - W.conj().T @ W
    return float(np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0])


def is_interior(W: np.ndarray, margin: float = MARGIN) -> bool:
    return interior_margin(W) >= margin


def is_shilov(W: np.ndarray, tol: float = 1e-8) -> bool:
    """W symmetric and unitary."""
    W = np.asarray(W, dtype=complex)
    n = _dim(W)
    return (float(np.max(np.abs(W - W.T))) <= tol
            and float(np.max(np.abs(W.conj().T @ W - np.eye(n)))) <= tol)


def check_point(W: np.ndarray, margin: float = MARGIN) -> np.ndarray:
    """Validate a strict interior point and return it symmetrized."""
    W = np.asarray(W, dtype=complex)
    _dim(W)
    if float(np.max(np.abs(W - W.T))) > SYM_TOL:
        raise ValidationError("Siegel point must be symmetric")
    if interior_margin(W) < margin:
        raise ValidationError("point is not in the open Siegel disk")
    return _sym(W)


def check_closure_point(W: np.ndarray) -> np.ndarray:
    W = np.asarray(W, dtype=complex)
    _dim(W)
    if float(np.max(np.abs(W - W.T))) > 1e-8:
        raise ValidationError("Siegel point must be symmetric")
    if interior_margin(W) < -1e-8:
        raise ValidationError("point lies outside the closed Siegel disk")
    return _sym(W)


def random_point(n: int, rng: np.random.Generator, radius: float = 0.9) -> np.ndarray:
    """Interior point with operator norm below ``radius``."""
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    a = a + a.T
    s = rng.uniform(0.0, radius)
    return s * a / np.linalg.norm(a, 2)


def random_tangent(n: int, rng: np.random.Generator) -> np.ndarray:
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return a + a.T


def random_shilov(n: int, rng: np.random.Generator) -> np.ndarray:
    q, _ = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    phases = np.exp(1j * rng.uniform(0, 2 * np.pi, size=n))
    return _sym(q @ np.diag(phases) @ q.T)


# --------------------------------------------------------------------------
# Moebius action


@dataclass(frozen=True)
class MoebiusBlocks:
    Z1: np.ndarray
    Z2: np.ndarray

    def matrix(self) -> np.ndarray:
        return np.block([[self.Z1, self.Z2], [self.Z2.conj(), self.Z1.conj()]])

    def reassemble(self) -> np.ndarray:
        n = self.Z1.shape[0]
        return (u_matrix(n) @ self.matrix() @ u_inverse(n)).real


def moebius_matrix(L: np.ndarray) -> np.ndarray:
    n = sp.half_dim(L)
    return u_inverse(n) @ np.asarray(L, dtype=complex) @ u_matrix(n)


def from_moebius(M: np.ndarray) -> np.ndarray:
    n = M.shape[0] // 2
    return (u_matrix(n) @ M @ u_inverse(n)).real


def blocks(L: np.ndarray) -> MoebiusBlocks:
    M = moebius_matrix(L)
    n = M.shape[0] // 2
    return MoebiusBlocks(M[:n, :n].copy(), M[:n, n:].copy())


def _mobius(M: np.ndarray, W: np.ndarray, check: bool = True) -> np.ndarray:
    n = W.shape[0]
    num = M[:n, :n] @ W + M[:n, n:]
    den = M[n:, :n] @ W + M[n:, n:]
    if check and np.linalg.cond(den) > 1e12:
        raise SingularActionError("Moebius denominator is singular at this point")
    return _sym(np.linalg.solve(den.T, num.T).T)


def act(L: np.ndarray, W: np.ndarray) -> np.ndarray:
    """Image of W under L: (Z1 W + Z2)(conj Z2 W + conj Z1)^{-1}."""
    W = np.asarray(W, dtype=complex)
    if sp.half_dim(L) != _dim(W):
        raise ValidationError("dimension mismatch between L and W")
    return _mobius(moebius_matrix(L), W)


def act_differential(L: np.ndarray, W: np.ndarray, V: np.ndarray) -> np.ndarray:
    """Push-forward of the tangent vector V at W."""
    b = blocks(L)
    den = b.Z2.conj() @ W + b.Z1.conj()
    fw = act(L, W)
    return _sym(np.linalg.solve(den.T, ((b.Z1 - fw @ b.Z2.conj()) @ V).T).T)


def infinitesimal_action(X: np.ndarray, W: np.ndarray) -> np.ndarray:
    """Velocity of t -> act(expm(tX), W) at t = 0."""
    n = _dim(W)
    M = u_inverse(n) @ np.asarray(X, dtype=complex) @ u_matrix(n)
    P, Q = M[:n, :n], M[:n, n:]
    return _sym(P @ W + Q - W @ Q.conj() @ W - W @ P.conj())


def cayley(W: np.ndarray) -> np.ndarray:
    """Upper half space coordinate Z = i (I - W)(I + W)^{-1}."""
    n = _dim(W)
    i = np.eye(n)
    return _sym(1j * np.linalg.solve((i + W).T, (i - W).T).T)


def inverse_cayley(Z: np.ndarray) -> np.ndarray:
    n = _dim(Z)
    i = np.eye(n)
    return _sym(np.linalg.solve(Z + 1j * i, 1j * i - Z))


# --------------------------------------------------------------------------
# complex structures


def _ab(W: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = W.shape[0]
    i = np.eye(n)
    ninv = np.linalg.inv(i - W @ W.conj())
    return -ninv @ (i + W @ W.conj()), 2 * ninv @ W


def jF(W: np.ndarray) -> np.ndarray:
    """Compatible complex structure attached to the interior point W."""
    W = check_point(W)
    n = W.shape[0]
    a, b = _ab(W)
    m = np.block([[1j * a, 1j * b], [-1j * b.conj(), -1j * a.conj()]])
    return (u_matrix(n) @ m @ u_inverse(n)).real


def is_compatible(J: np.ndarray, tol: float = 1e-8) -> bool:
    J = np.asarray(J, dtype=float)
    n = sp.half_dim(J)
    if np.max(np.abs(J @ J + np.eye(2 * n))) > tol * max(1.0, np.linalg.norm(J) ** 2):
        return False
    g = sp.omega(n) @ J
    if np.max(np.abs(g - g.T)) > tol * max(1.0, np.linalg.norm(g)):
        return False
    return bool(np.linalg.eigvalsh(0.5 * (g + g.T))[0] > 0)


def w_from_J(J: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Inverse of :func:`jF`: W = (I - A)^{-1} B."""
    J = np.asarray(J, dtype=float)
    n = sp.half_dim(J)
    if not is_compatible(J, tol):
        raise CompatibilityError("J is not a compatible complex structure")
    M = u_inverse(n) @ J @ u_matrix(n)
    a, b = -1j * M[:n, :n], -1j * M[:n, n:]
    return _sym(np.linalg.solve(np.eye(n) - a, b))


# --------------------------------------------------------------------------
# Kaehler geometry


def _hermitian(W: np.ndarray, V1: np.ndarray, V2: np.ndarray) -> complex:
    n = W.shape[0]
    i = np.eye(n)
    m = i - W.conj() @ W
    nn = i - W @ W.conj()
    return complex(-np.trace(np.linalg.solve(m, V2.conj() @ np.linalg.solve(nn, V1))))


def kahler_form(W: np.ndarray, V1: np.ndarray, V2: np.ndarray) -> float:
    """omega(V1, V2) for the Kaehler form -2i d d-bar log det(I - conj(W) W)."""
    W = check_point(W)
    return 4.0 * _hermitian(W, np.asarray(V1, dtype=complex), np.asarray(V2, dtype=complex)).imag


def metric(W: np.ndarray, V1: np.ndarray, V2: np.ndarray | None = None) -> float:
    """Riemannian metric g(V1, V2) = omega(V1, i V2)."""
    if V2 is None:
        V2 = V1
    W = check_point(W)
    return -4.0 * _hermitian(W, np.asarray(V1, dtype=complex), np.asarray(V2, dtype=complex)).real


def hol_sect_curvature_at_zero(V: np.ndarray) -> float:
    V = np.asarray(V, dtype=complex)
    vv = V.conj() @ V
    t = np.trace(vv).real
    if t <= 1e-300:
        raise DegenerateInputError("holomorphic sectional curvature needs V != 0")
    return float(-np.trace(vv @ vv).real / t ** 2)


def _coordinate_basis(n: int) -> list[np.ndarray]:
    out = []
    for a in range(n):
        for b in range(a, n):
            e = np.zeros((n, n), dtype=complex)
            e[a, b] = 1.0
            e[b, a] = 1.0
            out.append(e)
    return out


def hermitian_metric_matrix(W: np.ndarray) -> np.ndarray:
    """g_{k l-bar} = 4 tr(M^{-1} conj(E_l) N^{-1} E_k) in the coordinates w_ab, a <= b."""
    basis = _coordinate_basis(W.shape[0])
    return np.array([[-4.0 * _hermitian(W, ek, el) for el in basis] for ek in basis])


def ricci_check_at_zero(n: int, h: float = 1e-3) -> float:
    """Max relative deviation of -d d-bar log det g at 0 from -(n+1)/4 g(0)."""
    if not (1 <= n <= 4) or not (0 < h <= 1e-2):
        raise ValidationError("ricci_check_at_zero needs 1 <= n <= 4 and 0 < h <= 1e-2")
    basis = _coordinate_basis(n)
    d = len(basis)

    def f(w: np.ndarray) -> float:
        _, logdet = np.linalg.slogdet(hermitian_metric_matrix(w))
        return float(logdet)

    z = np.zeros((n, n), dtype=complex)

    def second(u: np.ndarray, v: np.ndarray) -> float:
        return (f(z + h * (u + v)) - f(z + h * (u - v))
                - f(z - h * (u - v)) + f(z - h * (u + v))) / (4 * h * h)

    ric = np.zeros((d, d), dtype=complex)
    for k in range(d):
        for l in range(d):
            ek, el = basis[k], basis[l]
            # d_k d_lbar = 1/4 (d_xk - i d_yk)(d_xl + i d_yl)
            xx = second(ek, el)
            yy = second(1j * ek, 1j * el)
            xy = second(ek, 1j * el)
            yx = second(1j * ek, el)
            ric[k, l] = -0.25 * (xx + yy + 1j * (xy - yx))
    target = -(n + 1) / 4.0 * hermitian_metric_matrix(z)
    return float(np.max(np.abs(ric - target)) / np.max(np.abs(target)))


def chern_form_check(W: np.ndarray, V: np.ndarray, h: float = 1e-4) -> float:
    """Relative deviation of (i/2 pi) dbar d log det(I - W conj(W)) from omega/(4 pi) on (V, iV).

    For f = log det(I - conj(W) W) the identity reads
    -(D_V^2 f + D_{iV}^2 f) = omega(V, iV), checked by central differences.
    """
    W = check_point(W)
    V = _sym(np.asarray(V, dtype=complex))

    def f(x: np.ndarray) -> float:
        _, logdet = np.linalg.slogdet(np.eye(x.shape[0]) - x.conj() @ x)
        return float(logdet)

    def d2(u: np.ndarray) -> float:
        return (f(W + h * u) - 2 * f(W) + f(W - h * u)) / (h * h)

    lhs = -(d2(V) + d2(1j * V))
    rhs = kahler_form(W, V, 1j * V)
    if abs(rhs) < 1e-300:
        raise DegenerateInputError("chern_form_check needs V != 0")
    return float(abs(lhs - rhs) / abs(rhs))


def kahler_potential(W0: np.ndarray, W: np.ndarray) -> float:
    """psi_{W0}(W) = 2 log|det(conj(W0) W - I)| - log det(I - conj(W) W)."""
    W0 = np.asarray(W0, dtype=complex)
    W = check_point(W)
    n = W.shape[0]
    d = np.linalg.det(W0.conj() @ W - np.eye(n))
    if abs(d) < 1e-14:
        raise PotentialSingularityError("W lies on the singular divisor of the potential")
    _, logdet = np.linalg.slogdet(np.eye(n) - W.conj() @ W)
    return float(2 * np.log(abs(d)) - logdet.real)


def alpha(W0: np.ndarray, W: np.ndarray, V: np.ndarray) -> float:
    """d^c psi_{W0} evaluated on the real tangent vector V at W."""
    W0 = np.asarray(W0, dtype=complex)
    W = check_point(W)
    V = np.asarray(V, dtype=complex)
    return _alpha_raw(W0, W, V)


def _alpha_raw(W0: np.ndarray, W: np.ndarray, V: np.ndarray) -> float:
    n = W.shape[0]
    i = np.eye(n)
    f = W0.conj() @ W - i
    if abs(np.linalg.det(f)) < 1e-14:
        raise PotentialSingularityError("W lies on the singular divisor of the potential")
    t1 = np.trace(np.linalg.solve(f, W0.conj() @ V))
    t2 = np.trace(np.linalg.solve(i - W.conj() @ W, W.conj() @ V))
    return float(2.0 * (t1 + t2).imag)


# --------------------------------------------------------------------------
# Takagi factorization and transitive elements


def takagi(W: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """W = V diag(s) V^T with V unitary and s >= 0 (descending)."""
    W = np.asarray(W, dtype=complex)
    n = _dim(W)
    a, b = W.real, W.imag
    big = np.block([[a, b], [b, -a]])
    w, q = np.linalg.eigh(0.5 * (big + big.T))
    order = np.argsort(w)[::-1][:n]
    s = np.clip(w[order], 0.0, None)
    V = q[:n, order] + 1j * q[n:, order]
    small = s < 1e-13
    if np.any(small):
        keep = V[:, ~small]
        comp = sla.null_space(keep.conj().T) if keep.shape[1] else np.eye(n, dtype=complex)
        V = np.hstack([keep, comp[:, :int(small.sum())]])
        s = np.concatenate([s[~small], np.zeros(int(small.sum()))])
    return V, s


def _translation_moebius(p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Moebius matrices of an element mapping 0 to p, and of its inverse."""
    n = p.shape[0]
    V, s = takagi(p)
    c = 1.0 / np.sqrt(1.0 - s ** 2)
    A = V @ np.diag(c) @ V.conj().T
    B = V @ np.diag(s * c) @ V.T
    M = np.block([[A, B], [B.conj(), A.conj()]])
    Minv = np.block([[A, -B], [-B.conj(), A.conj()]])
    return M, Minv


def translation(p: np.ndarray) -> np.ndarray:
    """Real symplectic element g with act(g, 0) = p."""
    p = check_point(p)
    return from_moebius(_translation_moebius(p)[0])


def _rotation_moebius(V: np.ndarray) -> np.ndarray:
    """Moebius matrix of W -> V W V^T for unitary V."""
    z = np.zeros_like(V)
    return np.block([[V, z], [z, V.conj()]])


def _distance_free(p: np.ndarray, q: np.ndarray) -> float:
    return float(np.max(np.abs(p - q)))


def geodesic(p: np.ndarray, q: np.ndarray, s: float) -> np.ndarray:
    """Point at parameter s in [0, 1] on the geodesic from p to q.

    p must be interior.  For interior q the parametrization is by
    constant speed; for a Shilov q it is ``g_p(s q')`` with
    ``q' = g_p^{-1}(q)``, which runs along the same geodesic ray.
    """
    p = np.asarray(p, dtype=complex)
    q = np.asarray(q, dtype=complex)
    if not is_interior(p):
        if is_interior(q):
            return geodesic(q, p, 1.0 - s)
        raise DegenerateInputError("geodesic needs at least one interior endpoint")
    M, Minv = _translation_moebius(_sym(p))
    qq = _mobius(Minv, q)
    if is_shilov(qq, 1e-9):
        return _mobius(M, s * qq)
    V, d = takagi(qq)
    r = np.arctanh(np.clip(d, 0.0, 1.0 - 1e-16))
    return _mobius(M, V @ np.diag(np.tanh(s * r)) @ V.T)


# --------------------------------------------------------------------------
# triangle integrals


def _real_lagrangian(W: np.ndarray) -> np.ndarray:
    """Orthonormal real 2n x n basis of the Lagrangian of a Shilov point."""
    n = W.shape[0]
    i = np.eye(n)
    c = np.vstack([1j * (i - W), i + W])
    u, _, _ = np.linalg.svd(np.hstack([c.real, c.imag]))
    return u[:, :n]


def lagrangian_to_point(basis: np.ndarray) -> np.ndarray:
    """Shilov point of the real Lagrangian spanned by the columns [X; Y]."""
    n = basis.shape[1]
    x, y = basis[:n], basis[n:]
    return _sym(np.linalg.solve((y - 1j * x).T, (y + 1j * x).T).T)


def _edge_integrand(xs: np.ndarray, diag: bool = True):
    """u -> 2 Im tr((conj(x) W - I)^{-1} conj(x) W') for real diagonal W(u)."""
    xb = xs.conj()
    n = xs.shape[0]
    i = np.eye(n)

    def f(w: np.ndarray, dw: np.ndarray) -> float:
        m = xb * w[None, :] - i
        return 2.0 * float(np.trace(np.linalg.solve(m, xb * dw[None, :])).imag)

    return f


def _quad(f, a: float, b: float, tol: float) -> float:
    val, err = quad(f, a, b, epsabs=tol, epsrel=1e-10, limit=400)
    if err > tol:
        raise ConvergenceError(f"edge quadrature error estimate {err:.3g} exceeds {tol:.3g}",
                               err, val)
    return float(val)


def _check_transverse(m: np.ndarray, what: str) -> None:
    if np.linalg.svd(m, compute_uv=False)[-1] < 1e-10:
        raise DegenerateInputError(f"{what}: Shilov points are not transverse")


def edge_integral(x: np.ndarray, y: np.ndarray, z: np.ndarray, tol: float = QUAD_TOL) -> float:
    """Integral of alpha_x along the geodesic from y to z."""
    x, y, z = (np.asarray(v, dtype=complex) for v in (x, y, z))
    n = x.shape[0]
    iy, iz = not is_shilov(y), not is_shilov(z)
    if iy and not is_interior(y) or iz and not is_interior(z):
        raise ValidationError("triangle vertices must be interior or Shilov points")
    if not iy and iz:
        return -edge_integral(x, z, y, tol)
    if iy:
        _, Minv = _translation_moebius(_sym(y))
        zz = _mobius(Minv, z)
        V, d = takagi(zz)
        R = _rotation_moebius(V.conj().T)
        G = R @ Minv
        xs = _mobius(G, x)
        f = _edge_integrand(xs)
        if iz:
            r = np.arctanh(np.clip(d, 0.0, 1.0 - 1e-16))
            return _quad(lambda s: f(np.tanh(s * r), r / np.cosh(s * r) ** 2), 0.0, 1.0, tol)
        _check_transverse(xs.conj() - np.eye(n), "edge endpoint and opposite vertex")
        one = np.ones(n)
        return _quad(lambda u: f(u * one, one), 0.0, 1.0, tol)
    # both ends on the Shilov boundary
    P, Q = _real_lagrangian(y), _real_lagrangian(z)
    om = sp.omega(n)
    pq = P.T @ om @ Q
    _check_transverse(pq, "edge endpoints")
    Q = Q @ np.linalg.inv(pq)
    g = np.hstack([P, Q])
    xs = act(sp.symplectic_inverse(g), x)
    i = np.eye(n)
    _check_transverse(xs.conj() - i, "edge endpoint and opposite vertex")
    _check_transverse(xs.conj() + i, "edge endpoint and opposite vertex")
    f = _edge_integrand(xs)
    one = np.ones(n)
    return _quad(lambda u: f(u * one, one), -1.0, 1.0, tol)


def _sort_key(W: np.ndarray) -> tuple:
    flat = np.round(np.asarray(W, dtype=complex).ravel(), 12)
    return tuple(itertools.chain.from_iterable((v.real, v.imag) for v in flat))


def _permutation_sign(perm: list[int]) -> int:
    sign = 1
    p = list(perm)
    for i in range(len(p)):
        while p[i] != i:
            j = p[i]
            p[i], p[j] = p[j], p[i]
            sign = -sign
    return sign


def _canonical_order(verts):
    order = sorted(range(3), key=lambda k: _sort_key(verts[k]))
    return [verts[k] for k in order], _permutation_sign(order)


def _degenerate(x, y, z) -> bool:
    return min(_distance_free(x, y), _distance_free(y, z), _distance_free(x, z)) < DEGENERATE_TOL


def triangle_integral(x: np.ndarray, y: np.ndarray, z: np.ndarray, tol: float = QUAD_TOL) -> float:
    """Integral of omega over the geodesic triangle (x, y, z).

    Computed as the integral of alpha_x over the edge from y to z; alpha_x
    vanishes on the two edges through x.  Positive for counterclockwise
    vertex order.
    """
    verts = [np.asarray(v, dtype=complex) for v in (x, y, z)]
    if _degenerate(*verts):
        return 0.0
    (a, b, c), sign = _canonical_order(verts)
    if is_shilov(a) and not (is_shilov(b) and is_shilov(c)):
        # keep an interior vertex out of the base when possible
        if not is_shilov(b):
            a, b, c, sign = b, c, a, sign
        else:
            a, b, c, sign = c, a, b, sign
    return sign * edge_integral(a, b, c, tol)


def _gauss_legendre(k: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(k)
    return 0.5 * (x + 1), 0.5 * w


def triangle_integral_2d(x: np.ndarray, y: np.ndarray, z: np.ndarray,
                         order: int = 24, h: float = 1e-6) -> float:
    """Tensor Gauss-Legendre quadrature of omega over the ruled triangle.

    The parametrization is (s, t) -> geodesic(x, geodesic(y, z, t), s); all
    vertices must be interior.  Used as an independent check.
    """
    x, y, z = (check_point(v) for v in (x, y, z))
    if _degenerate(x, y, z):
        return 0.0
    nodes, weights = _gauss_legendre(order)
    # omega is invariant, so work in the frame where x sits at the origin
    _, Minv = _translation_moebius(x)
    ys, zs = _mobius(Minv, y), _mobius(Minv, z)

    def ray(t: float) -> tuple[np.ndarray, np.ndarray]:
        V, d = takagi(geodesic(ys, zs, t))
        return V, np.arctanh(np.clip(d, 0.0, 1.0 - 1e-16))

    def point(V: np.ndarray, r: np.ndarray, s: float) -> np.ndarray:
        return (V * np.tanh(s * r)) @ V.T

    total = 0.0
    for t, wt in zip(nodes, weights):
        V, r = ray(t)
        Vp, rp = ray(t + h)
        Vm, rm = ray(t - h)
        for s, ws in zip(nodes, weights):
            w = point(V, r, s)
            ds = (V * (r / np.cosh(s * r) ** 2)) @ V.T
            dt = (point(Vp, rp, s) - point(Vm, rm, s)) / (2 * h)
            total += wt * ws * 4.0 * _hermitian(w, ds, dt).imag
    return float(total)


def cocycle(L0: np.ndarray, L1: np.ndarray, L2: np.ndarray, basepoint: np.ndarray,
            tol: float = QUAD_TOL) -> float:
    """(1/2 pi) times the omega-area of the triangle (L0 x, L1 x, L2 x)."""
    x = check_point(basepoint)
    return triangle_integral(act(L0, x), act(L1, x), act(L2, x), tol) / (2 * np.pi)


# --------------------------------------------------------------------------
# fixed points


def invariant_lagrangian(L: np.ndarray) -> np.ndarray:
    """Real L-invariant Lagrangian for L with spectrum in {1, -1}.

    Built as an isotropic flag: on the quotient of I^Omega by the current
    invariant isotropic I, pick a real eigenvector and lift it.
    """
    L = np.asarray(L, dtype=float)
    n = sp.half_dim(L)
    om = sp.omega(n)
    iso = np.zeros((2 * n, 0))
    for _ in range(n):
        perp = sla.null_space(iso.T @ om) if iso.shape[1] else np.eye(2 * n)
        # orthonormal complement of iso inside perp
        if iso.shape[1]:
            proj = perp - iso @ (iso.T @ perp)
            u, s, _ = np.linalg.svd(proj, full_matrices=False)
            comp = u[:, :perp.shape[1] - iso.shape[1]]
        else:
            comp = perp
        lq = comp.T @ L @ comp
        vec = None
        for lam in (1.0, -1.0):
            k = sla.null_space(lq - lam * np.eye(lq.shape[0]), rcond=1e-6)
            if k.shape[1]:
                vec = comp @ k[:, 0]
                break
        if vec is None:
            raise UnsupportedHolonomyError("no real invariant isotropic vector")
        vec -= iso @ (iso.T @ vec)
        iso = np.hstack([iso, (vec / np.linalg.norm(vec))[:, None]])
    return iso


def fixed_point(L: np.ndarray, tol: float = 1e-7) -> np.ndarray:
    """A fixed point of L in the closed disk.

    Elliptic: the interior point of the commuting complex structure.
    Parabolic: a Shilov point from an invariant Lagrangian.  Hyperbolic
    (n = 1 only): the ideal endpoint of the axis for the eigenvalue with
    modulus above one.
    """
    L = np.asarray(L, dtype=float)
    n = sp.half_dim(L)
    try:
        summary = sp.classify(L, tol).label_summary
    except ClassificationError as exc:
        raise UnsupportedHolonomyError(str(exc)) from exc
    if summary == "elliptic":
        return w_from_J(sp.commuting_complex_structure(L, tol))
    if summary == "parabolic":
        return lagrangian_to_point(invariant_lagrangian(L))
    if summary == "hyperbolic" and n == 1:
        w, v = np.linalg.eig(L)
        k = int(np.argmax(np.abs(w)))
        return lagrangian_to_point(v[:, [k]].real)
    raise UnsupportedHolonomyError(f"no fixed point implemented for {summary} holonomy with n={n}")
