"""Predicates, classification and logarithms in Sp(2n, R).

The symplectic form is ``Omega = [[0, I], [-I, 0]]`` and the standard
compatible complex structure is ``J = [[0, -I], [I, 0]]`` so that
``Omega @ J = I``.  Coordinates are ordered ``(x_1..x_n, y_1..y_n)``;
``U(n)`` sits inside ``Sp(2n, R)`` as ``A + iB -> [[A, -B], [B, A]]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg as sla

from .errors import AmbiguityError, ClassificationError, DimensionError, ValidationError

TOL_SYMPLECTIC = 1e-10
TOL_LOG = 1e-9
GROUP_TOL = 1e-8
# eigenvalues closer than this are treated as one (possibly defective) cluster
CLUSTER_TOL = 1e-4

LABELS = ("hyperbolic", "elliptic-unipotent", "unipotent-plus", "unipotent-minus")


def half_dim(M: np.ndarray) -> int:
    """Return n for a 2n x 2n matrix, raising DimensionError otherwise."""
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {M.shape}")
    if M.shape[0] % 2 or M.shape[0] == 0:
        raise DimensionError(f"symplectic matrices have even dimension, got {M.shape[0]}")
    return M.shape[0] // 2


def omega(n: int) -> np.ndarray:
    z, i = np.zeros((n, n)), np.eye(n)
    return np.block([[z, i], [-i, z]])


def standard_j(n: int) -> np.ndarray:
    z, i = np.zeros((n, n)), np.eye(n)
    return np.block([[z, -i], [i, z]])


def rotation(theta: float) -> np.ndarray:
    """R(theta); equals exp(theta * J) for the standard J on R^2."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def unitary_to_symplectic(u: np.ndarray) -> np.ndarray:
    """Embed a unitary n x n matrix as a real 2n x 2n symplectic matrix."""
    u = np.asarray(u, dtype=complex)
    a, b = u.real, u.imag
    return np.block([[a, -b], [b, a]])


def block_diag_symplectic(*mats: np.ndarray) -> np.ndarray:
    """Symplectic direct sum respecting the (x..., y...) coordinate order."""
    ns = [half_dim(m) for m in mats]
    n = sum(ns)
    out = np.zeros((2 * n, 2 * n), dtype=np.result_type(*mats))
    off = 0
    for m, k in zip(mats, ns):
        idx = np.r_[off:off + k, n + off:n + off + k]
        out[np.ix_(idx, idx)] = m
        off += k
    return out


def symplectic_residual(M: np.ndarray) -> float:
    n = half_dim(M)
    om = omega(n)
    return float(np.max(np.abs(M.T @ om @ M - om)))


def is_symplectic(M: np.ndarray, tol: float = TOL_SYMPLECTIC) -> bool:
    """True iff ||M^T Omega M - Omega||_inf <= tol."""
    return symplectic_residual(np.asarray(M, dtype=float)) <= tol


def is_lie_element(B: np.ndarray, tol: float = TOL_SYMPLECTIC) -> bool:
    n = half_dim(B)
    om = omega(n)
    return float(np.max(np.abs(B.T @ om + om @ B))) <= tol


def random_lie_element(n: int, rng: np.random.Generator, scale: float = 0.5) -> np.ndarray:
    """Omega @ S with S symmetric, entries uniform in [-scale, scale]."""
    s = rng.uniform(-scale, scale, size=(2 * n, 2 * n))
    s = np.triu(s) + np.triu(s, 1).T
    return omega(n) @ s


def random_symplectic(n: int, rng: np.random.Generator, scale: float = 0.5,
                      factors: int = 1) -> np.ndarray:
    out = np.eye(2 * n)
    for _ in range(factors):
        out = out @ sla.expm(random_lie_element(n, rng, scale))
    return out


def symplectic_inverse(M: np.ndarray) -> np.ndarray:
    """M^{-1} = -Omega M^T Omega, exact for symplectic M."""
    om = omega(half_dim(M))
    return -om @ M.T @ om


# --------------------------------------------------------------------------
# classification


@dataclass(frozen=True)
class Part:
    label: str
    basis: np.ndarray  # 2n x k real, orthonormal columns


@dataclass(frozen=True)
class ClassificationResult:
    parts: list[Part]
    label_summary: str
    eigenvalues: np.ndarray
    condition: float = 1.0

    def part(self, label: str) -> Optional[Part]:
        for p in self.parts:
            if p.label == label:
                return p
        return None

    @property
    def dimensions(self) -> dict[str, int]:
        return {p.label: p.basis.shape[1] for p in self.parts}


def _clusters(ev: np.ndarray, tol: float = CLUSTER_TOL) -> list[np.ndarray]:
    """Single-linkage clusters of eigenvalue indices."""
    remaining = list(range(len(ev)))
    out = []
    while remaining:
        group = [remaining.pop(0)]
        grew = True
        while grew:
            grew = False
            for j in list(remaining):
                if min(abs(ev[j] - ev[i]) for i in group) < tol:
                    group.append(j)
                    remaining.remove(j)
                    grew = True
        out.append(np.array(group))
    return out


def _label_of(lam: complex, tol: float) -> str:
    # +-1 first: defective clusters there are the common case
    band = 100.0 * tol
    for target, label in ((1.0, "unipotent-plus"), (-1.0, "unipotent-minus")):
        d = abs(lam - target)
        if d <= tol:
            return label
        if d < band:
            raise AmbiguityError(
                f"eigenvalue {lam:.12g} is {d:.3g} from {target:+.0f}; cannot decide", lam)
    d = abs(abs(lam) - 1.0)
    if d <= tol:
        return "elliptic-unipotent"
    if d < band:
        raise AmbiguityError(
            f"eigenvalue {lam:.12g} has modulus within {d:.3g} of 1; cannot decide", lam)
    return "hyperbolic"


def _cluster_labels(L: np.ndarray, tol: float) -> tuple[np.ndarray, list[tuple[complex, int, str]]]:
    ev = np.linalg.eigvals(L)
    info = []
    band = 100.0 * tol
    for idx in _clusters(ev):
        mean = complex(np.mean(ev[idx]))
        label = _label_of(mean, tol)
        # a snapped cluster whose members sit outside the band is unresolved
        if label == "elliptic-unipotent":
            dev = np.abs(np.abs(ev[idx]) - 1.0)
        elif label != "hyperbolic":
            dev = np.abs(ev[idx] - (1.0 if label == "unipotent-plus" else -1.0))
        else:
            dev = np.zeros(1)
        k = int(np.argmax(dev))
        if dev[k] > band:
            lam = complex(ev[idx][k])
            raise AmbiguityError(
                f"eigenvalue {lam:.12g} lies in a cluster snapped to {label} but is {dev[k]:.3g} away", lam)
        info.append((mean, len(idx), label))
    return ev, info


def _invariant_subspace(L: np.ndarray, select, expected: int) -> np.ndarray:
    """Orthonormal real basis of the L-invariant subspace for selected eigenvalues."""
    if expected == 0:
        return np.zeros((L.shape[0], 0))
    try:
        _, z, sdim = sla.schur(L, output="real", sort=lambda re, im: select(complex(re, im)))
        if sdim == expected:
            return z[:, :sdim]
    except (ValueError, np.linalg.LinAlgError):
        pass
    # fall back: null space of the annihilating real polynomial
    ev = np.linalg.eigvals(L)
    p = np.eye(L.shape[0], dtype=complex)
    for lam in ev:
        if select(complex(lam)):
            p = p @ (L - lam * np.eye(L.shape[0]))
    _, _, vh = np.linalg.svd(p.real)
    return vh[-expected:].T.copy()


def classify(L: np.ndarray, tol: float = 1e-7) -> ClassificationResult:
    """Split R^2n into the hyperbolic, elliptic-unipotent and +-unipotent parts.

    ``tol`` is the snapping distance for ``|lambda| = 1`` and
    ``lambda = +-1``; eigenvalues in the band ``(tol, 100 tol)`` raise
    :class:`AmbiguityError` instead of being guessed.
    """
    L = np.asarray(L, dtype=float)
    n = half_dim(L)
    if not is_symplectic(L, tol=max(TOL_SYMPLECTIC, 1e-8)):
        raise ValidationError("matrix is not symplectic")
    ev, info = _cluster_labels(L, tol)

    def label_for(lam: complex) -> str:
        best = min(info, key=lambda c: abs(c[0] - lam))
        return best[2]

    parts = []
    for label in LABELS:
        count = sum(c[1] for c in info if c[2] == label)
        if count:
            basis = _invariant_subspace(L, lambda lam, lb=label: label_for(lam) == lb, count)
            parts.append(Part(label, basis))
    labels = {p.label for p in parts}
    if labels == {"hyperbolic"}:
        summary = "hyperbolic"
    elif labels == {"elliptic-unipotent"}:
        summary = "elliptic" if _is_semisimple(L, info) else "mixed"
    elif labels <= {"unipotent-plus", "unipotent-minus"}:
        summary = "parabolic"
    else:
        summary = "mixed"
    basis = np.hstack([p.basis for p in parts])
    cond = float(np.linalg.cond(basis)) if basis.size else 1.0
    assert sum(p.basis.shape[1] for p in parts) == 2 * n
    return ClassificationResult(parts, summary, ev, cond)


def _is_semisimple(L: np.ndarray, info) -> bool:
    m = L.shape[0]
    for mean, count, _ in info:
        if count > 1:
            s = np.linalg.svd(L - mean * np.eye(m), compute_uv=False)
            if np.sum(s < 1e-6 * max(1.0, np.linalg.norm(L, 2))) < count:
                return False
    return True


def omega_orthogonality_residual(result: ClassificationResult) -> float:
    om = omega(result.parts[0].basis.shape[0] // 2)
    worst = 0.0
    for i, a in enumerate(result.parts):
        for b in result.parts[i + 1:]:
            worst = max(worst, float(np.max(np.abs(a.basis.T @ om @ b.basis))))
    return worst


# --------------------------------------------------------------------------
# logarithms


@dataclass(frozen=True)
class CanonicalParams:
    """n = 1 normal form: kind in {hyperbolic, elliptic, parabolic}."""

    kind: str
    lam: Optional[float] = None
    theta: Optional[float] = None
    mu: Optional[float] = None


@dataclass(frozen=True)
class BoundaryLog:
    """``L = sign * expm(2 pi B)``.

    ``frame`` (n = 1 only) is the SL(2) conjugator to the normal form and
    ``J`` a compatible complex structure adapted to ``B``: the commuting
    one for elliptic holonomy, ``frame @ J2 @ frame^-1`` otherwise.
    ``angles`` lists the rotation angles theta_j in [0, 2 pi) read on the
    +i eigenspace of ``J`` when the holonomy is elliptic.
    """

    B: np.ndarray
    sign: int
    canonical_params: Optional[CanonicalParams] = None
    J: Optional[np.ndarray] = None
    frame: Optional[np.ndarray] = None
    angles: Optional[tuple[float, ...]] = None

    def residual(self, L: np.ndarray) -> float:
        return float(np.max(np.abs(self.sign * sla.expm(2 * np.pi * self.B) - L)))


def _compatible_on(R: np.ndarray, om: np.ndarray) -> np.ndarray:
    """Compatible complex structure (in R-coordinates) on a symplectic subspace.

    R has orthonormal columns.  With K = (R^T Omega R)^{-1} the polar part
    K (-K^2)^{-1/2} squares to -I and Omega_R J is positive definite.
    """
    om_r = R.T @ om @ R
    k = np.linalg.inv(om_r)
    w, v = np.linalg.eigh(-(k @ k))
    root_inv = v @ np.diag(w ** -0.5) @ v.T
    return k @ root_inv


def principal_log_elliptic(L: np.ndarray, tol: float = 1e-7) -> BoundaryLog:
    """Principal ``B = log(L) / 2 pi`` for semisimple L with spectrum on the circle.

    Eigenvalues +-1 are accepted as long as L is semisimple there (the
    identity gives ``B = 0``).  On the +i eigenspace of the commuting
    complex structure, ``-iB`` has eigenvalues ``theta_j / 2 pi`` in [0, 1).
    """
    L = np.asarray(L, dtype=float)
    n = half_dim(L)
    om = omega(n)
    ev, info = _cluster_labels(L, tol)
    if any(c[2] == "hyperbolic" for c in info):
        raise ClassificationError("holonomy has eigenvalues off the unit circle")
    m = 2 * n
    cols: list[np.ndarray] = []
    jd: list[complex] = []
    bd: list[complex] = []
    real_blocks = []
    angles: list[float] = []
    for mean, count, label in info:
        if label in ("unipotent-plus", "unipotent-minus"):
            lam = 1.0 if label == "unipotent-plus" else -1.0
            R = sla.null_space(L - lam * np.eye(m), rcond=1e-7)
            if R.shape[1] != count:
                raise ClassificationError(f"holonomy is not semisimple at eigenvalue {lam:+.0f}")
            real_blocks.append((R, lam))
            continue
        if mean.imag < 0:
            continue
        V = sla.null_space(L - mean * np.eye(m), rcond=1e-7)
        if V.shape[1] != count:
            raise ClassificationError(f"holonomy is not semisimple at eigenvalue {mean:.6g}")
        g = -1j * (V.conj().T @ om @ V)
        g = 0.5 * (g + g.conj().T)
        w, q = np.linalg.eigh(g)
        V = V @ q
        phi = float(np.angle(mean))
        for k in range(count):
            v = V[:, k]
            if w[k] < 0:    # +i eigenspace of J
                cols += [v, v.conj()]
                jd += [1j, -1j]
                bd += [1j * phi / (2 * np.pi), -1j * phi / (2 * np.pi)]
                angles.append(phi)
            else:
                th = 2 * np.pi - phi
                cols += [v, v.conj()]
                jd += [-1j, 1j]
                bd += [-1j * th / (2 * np.pi), 1j * th / (2 * np.pi)]
                angles.append(th)
    T = np.column_stack(cols) if cols else np.zeros((m, 0), dtype=complex)
    blocks_j = [np.diag(jd)] if cols else []
    blocks_b = [np.diag(bd)] if cols else []
    for R, lam in real_blocks:
        jr = _compatible_on(R, om)
        T = np.hstack([T, R.astype(complex)])
        blocks_j.append(jr)
        blocks_b.append(np.zeros_like(jr) if lam > 0 else 0.5 * jr)
        angles += [0.0 if lam > 0 else np.pi] * (R.shape[1] // 2)
    jt = sla.block_diag(*blocks_j)
    bt = sla.block_diag(*blocks_b)
    tinv = np.linalg.inv(T)
    J = (T @ jt @ tinv).real
    B = (T @ bt @ tinv).real
    params = CanonicalParams("elliptic", theta=angles[0]) if n == 1 else None
    return BoundaryLog(B, 1, params, J=J, angles=tuple(sorted(angles)))


def commuting_complex_structure(L: np.ndarray, tol: float = 1e-7) -> np.ndarray:
    """Compatible J with LJ = JL for elliptic (semisimple, unit-modulus) L."""
    return principal_log_elliptic(L, tol).J


def boundary_log_sl2(L: np.ndarray, tol: float = 1e-7) -> BoundaryLog:
    """Normal form and logarithm of an SL(2, R) boundary holonomy."""
    L = np.asarray(L, dtype=float)
    if half_dim(L) != 1:
        raise DimensionError("boundary_log_sl2 needs a 2 x 2 matrix")
    j2 = standard_j(1)
    summary = classify(L, tol).label_summary
    if summary == "hyperbolic":
        w, v = np.linalg.eig(L)
        w, v = w.real, v.real
        k = int(np.argmax(np.abs(w)))
        lam = float(w[k])
        P = np.column_stack([v[:, k], v[:, 1 - k]])
        P[:, 1] /= np.linalg.det(P)
        B = np.log(abs(lam)) / (2 * np.pi) * P @ np.diag([1.0, -1.0]) @ np.linalg.inv(P)
        return BoundaryLog(B, int(np.sign(lam)), CanonicalParams("hyperbolic", lam=lam),
                           J=P @ j2 @ np.linalg.inv(P), frame=P)
    if summary == "elliptic":
        return principal_log_elliptic(L, tol)
    # parabolic: both eigenvalues equal to lam = +-1
    lam = 1.0 if np.trace(L) > 0 else -1.0
    if np.max(np.abs(L - lam * np.eye(2))) <= 1e-9:
        P = np.eye(2)
        mu = 0.0
    else:
        v = sla.null_space(L - lam * np.eye(2), rcond=1e-6)[:, 0]
        P = np.column_stack([v, [-v[1], v[0]]])
        mu = float((np.linalg.inv(P) @ L @ P)[0, 1])
    B = P @ np.array([[0.0, mu / (2 * np.pi * lam)], [0.0, 0.0]]) @ np.linalg.inv(P)
    return BoundaryLog(B, int(lam), CanonicalParams("parabolic", lam=lam, mu=mu),
                       J=P @ j2 @ np.linalg.inv(P), frame=P)

