"""Spectrum and eta invariant of the boundary operator J d/dx on the circle.

A boundary holonomy ``L = eps * expm(2 pi B)`` with a compatible complex
structure ``J0`` defines the operator through the loop
``J(x) = expm(-x B) J0 expm(x B)``.  Its eigenvalues are the real sigma for
which ``expm(2 pi (B - sigma J0))`` has eigenvalue ``eps``; the multiplicity
is the dimension of that eigenspace.

Two routes to the spectrum are provided.  :func:`enumerate_spectrum` scans
the smallest singular value of ``expm(2 pi (B - sigma J0)) - eps I`` on a
grid and refines local minima.  :func:`mode_spectrum` uses that in the gauge
``f = expm(xB) e`` the operator has constant coefficients, so each Fourier
mode ``exp(i kappa x)`` with ``kappa in Z + delta`` contributes the
eigenvalues of ``J0 (i kappa I - B)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
import scipy.linalg as sla
from scipy.integrate import quad
from scipy.optimize import minimize_scalar
from scipy.special import erfc

from . import siegel
from . import symplectic as sp
from .errors import (ClassificationError, ConvergenceError, UnsupportedHolonomyError,
                     ValidationError)

GRID_STEP = 1.0 / 8.0
MULT_TOL = 1e-6
ZERO_MODE_TOL = 1e-9
DEFAULT_T = (0.02, 0.01, 0.005)


@dataclass(frozen=True)
class CircleHolonomy:
    L: np.ndarray
    log: sp.BoundaryLog
    J0: np.ndarray

    @property
    def n(self) -> int:
        return self.L.shape[0] // 2

    @property
    def adapted(self) -> bool:
        """True when J0 is the complex structure the closed forms assume."""
        return self.log.J is not None and float(np.max(np.abs(self.J0 - self.log.J))) < 1e-9

    def conjugate(self, g: np.ndarray) -> "CircleHolonomy":
        """Transport (L, B, J0) by g; the spectrum is unchanged."""
        gi = np.linalg.inv(g)
        lg = self.log
        new_log = replace(lg, B=g @ lg.B @ gi,
                          J=None if lg.J is None else g @ lg.J @ gi,
                          frame=None if lg.frame is None else g @ lg.frame)
        return CircleHolonomy(g @ self.L @ gi, new_log, g @ self.J0 @ gi)


def circle_holonomy(L: np.ndarray, J0: Optional[np.ndarray] = None,
                    tol: float = 1e-7) -> CircleHolonomy:
    """Logarithm and default complex structure for a boundary holonomy.

    n = 1 covers every element of SL(2, R).  For n > 1 only semisimple
    holonomy with spectrum on the unit circle has an implemented logarithm.
    """
    L = np.asarray(L, dtype=float)
    n = sp.half_dim(L)
    if not sp.is_symplectic(L, 1e-8):
        raise ValidationError("boundary holonomy is not symplectic")
    if n == 1:
        log = sp.boundary_log_sl2(L, tol)
    else:
        try:
            log = sp.principal_log_elliptic(L, tol)
        except ClassificationError as exc:
            raise UnsupportedHolonomyError(
                f"no boundary logarithm implemented for this holonomy with n={n}: {exc}") from exc
    if J0 is None:
        J0 = log.J
    elif not siegel.is_compatible(J0):
        raise ValidationError("J0 is not a compatible complex structure")
    return CircleHolonomy(L, log, np.asarray(J0, dtype=float))


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: list[tuple[float, int]]
    window: float
    method: str = "scan"
    warnings: tuple[str, ...] = ()
    recovered: int = 0
    branches: int = 2

    @property
    def count(self) -> int:
        return sum(m for _, m in self.eigenvalues)

    def expanded(self) -> np.ndarray:
        return np.array([s for s, m in self.eigenvalues for _ in range(m)])


@dataclass(frozen=True)
class EtaResult:
    value: float
    method: str
    error_estimate: float = 0.0
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.error_estimate < 0:
            raise ValueError("error_estimate must be nonnegative")


# --------------------------------------------------------------------------
# spectrum


def _monodromy(sigma: float, hol: CircleHolonomy) -> np.ndarray:
    return sla.expm(2 * np.pi * (hol.log.B - sigma * hol.J0))


def eigenvalue_residual(sigma: float, hol: CircleHolonomy) -> float:
    """|det(expm(2 pi (B - sigma J0)) - eps I)|."""
    m = _monodromy(sigma, hol) - hol.log.sign * np.eye(2 * hol.n)
    return float(abs(np.linalg.det(m)))


def _smallest_sv(sigma: float, hol: CircleHolonomy) -> float:
    m = _monodromy(sigma, hol) - hol.log.sign * np.eye(2 * hol.n)
    return float(np.linalg.svd(m, compute_uv=False)[-1])


def kernel_dimension(sigma: float, hol: CircleHolonomy, tol: float = MULT_TOL) -> int:
    m = _monodromy(sigma, hol) - hol.log.sign * np.eye(2 * hol.n)
    return int(np.sum(np.linalg.svd(m, compute_uv=False) < tol))


def weyl_count(n: int, window: float) -> float:
    return 2 * n * 2 * window


def mode_spectrum(hol: CircleHolonomy, window: float) -> Spectrum:
    """Spectrum in [-window, window] from the Fourier-mode eigenproblems."""
    n = hol.n
    delta = 0.0 if hol.log.sign > 0 else 0.5
    jn = np.linalg.norm(hol.J0, 2)
    kmax = int(math.ceil(window * jn + np.linalg.norm(hol.log.B, 2) * jn)) + 2
    vals = []
    for k in range(-kmax, kmax + 1):
        kappa = k + delta
        ev = np.linalg.eigvals(hol.J0 @ (1j * kappa * np.eye(2 * n) - hol.log.B))
        vals.extend(ev.real[np.abs(ev.real) <= window + 1e-12])
    vals = np.sort(np.array(vals))
    out: list[tuple[float, int]] = []
    i = 0
    while i < len(vals):
        j = i
        while j + 1 < len(vals) and vals[j + 1] - vals[i] < 1e-6:
            j += 1
        out.append((float(np.mean(vals[i:j + 1])), j - i + 1))
        i = j + 1
    return Spectrum(out, window, method="modes", branches=2 * n)


def _refine(hol: CircleHolonomy, a: float, b: float) -> tuple[float, float]:
    f = lambda s: _smallest_sv(s, hol)
    res = minimize_scalar(f, bounds=(a, b), method="bounded",
                          options={"xatol": 1e-12, "maxiter": 500})
    x, fx = float(res.x), float(res.fun)
    # bounded Brent stops near sqrt(eps) relative; polish the V-shaped minimum
    h = max(1e-6, 1e-7 * abs(x))
    lo, hi = max(a, x - h), min(b, x + h)
    if lo < x < hi and fx < min(f(lo), f(hi)):
        res = minimize_scalar(f, bracket=(lo, x, hi), method="golden", tol=1e-14)
        if res.fun <= fx and lo <= res.x <= hi:
            x, fx = float(res.x), float(res.fun)
    return x, fx


def _accept(hol: CircleHolonomy, sigma: float, value: float) -> bool:
    scale = max(1.0, float(np.linalg.norm(_monodromy(sigma, hol), 2)))
    return value < 1e-8 * scale


def enumerate_spectrum(hol: CircleHolonomy, window: float, step: float = GRID_STEP,
                       cross_check: bool = True) -> Spectrum:
    """Eigenvalues in [-window, window] by grid scanning and refinement.

    Local minima of the smallest singular value on a grid of the given step
    are refined to 1e-12.  With ``cross_check`` the result is compared
    against :func:`mode_spectrum`; roots the grid missed (for instance two
    eigenvalues closer than the step) are refined from the mode estimate
    and counted in ``recovered``.
    """
    if window <= 0:
        raise ValidationError("spectrum window must be positive")
    grid = np.arange(-window - 2 * step, window + 2 * step + 1e-12, step)
    vals = np.array([_smallest_sv(s, hol) for s in grid])
    roots: list[float] = []
    for i in range(1, len(grid) - 1):
        if vals[i] <= vals[i - 1] and vals[i] <= vals[i + 1]:
            s, v = _refine(hol, grid[i - 1], grid[i + 1])
            if _accept(hol, s, v) and abs(s) <= window + 1e-12:
                if not roots or abs(s - roots[-1]) > 1e-9:
                    roots.append(s)
    notes: list[str] = []
    recovered = 0
    if cross_check:
        for s_mode, _ in mode_spectrum(hol, window).eigenvalues:
            if roots and min(abs(r - s_mode) for r in roots) < 1e-6:
                continue
            lo, hi = s_mode - 1e-4, s_mode + 1e-4
            s, v = _refine(hol, lo, hi)
            if _accept(hol, s, v) and abs(s) <= window + 1e-12:
                roots.append(s)
                recovered += 1
        roots.sort()
        if recovered:
            notes.append(f"{recovered} root(s) missed by the grid were recovered from mode estimates")
    eig = [(r, max(1, kernel_dimension(r, hol))) for r in roots]
    spec = Spectrum(eig, window, "scan", tuple(notes), recovered, 2 * hol.n)
    expected = weyl_count(hol.n, window)
    if abs(spec.count - expected) > 4 * hol.n:
        msg = f"eigenvalue count {spec.count} differs from the Weyl estimate {expected:.0f}"
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
        spec = replace(spec, warnings=spec.warnings + (msg,))
    return spec


def is_symmetric(spec: Spectrum, tol: float = 1e-7) -> bool:
    """Every sigma has -sigma with the same multiplicity (within the window)."""
    vals = [(s, m) for s, m in spec.eigenvalues if abs(s) < spec.window - 1e-6]
    for s, m in vals:
        match = [mm for ss, mm in vals if abs(ss + s) < tol]
        if match != [m]:
            return False
    return True


# --------------------------------------------------------------------------
# eta


def _branch_tail(edge_values: np.ndarray, prev_values: np.ndarray, cutoff: float) -> list[np.ndarray]:
    """Extrapolated eigenvalues beyond the window, one array per branch.

    Each branch is modeled as sigma(k) = p + k + q/k, with q fitted from the
    last observed spacing.
    """
    out = []
    pair = len(edge_values) == len(prev_values)
    for j, e1 in enumerate(edge_values):
        q = 0.0
        if pair:
            e0 = prev_values[j]
            d = e1 - e0
            if abs(d) > 1e-12 and e0 > 0:
                q = -(d - 1.0) * e0 * e1 / d
        m = np.arange(1, max(2, int(math.ceil(cutoff - e1)) + 2))
        out.append(e1 + m + q * (1.0 / (e1 + m) - 1.0 / e1))
    return out


def _tail_values(spec: Spectrum, cutoff: float) -> tuple[np.ndarray, np.ndarray, bool]:
    ev = spec.expanded()
    lam = spec.window
    ok = True
    tails = []
    for side in (1.0, -1.0):
        vals = np.sort(side * ev[side * ev > 0])
        b = spec.branches
        edge, prev = vals[len(vals) - b:], vals[len(vals) - 2 * b:len(vals) - b]
        if len(prev) != b or np.any(edge - prev < 0.5) or np.any(edge - prev > 1.5):
            ok = False
            prev = prev[:0]
        t = _branch_tail(edge, prev, cutoff)
        tails.append(np.concatenate(t) if t else np.zeros(0))
    return tails[0], tails[1], ok


def smoothed_sum(spec: Spectrum, t: float, include_tail: bool = True) -> float:
    """Sum of sign(sigma) erfc(sqrt(t) |sigma|) over non-zero modes."""
    ev = spec.expanded()
    ev = ev[np.abs(ev) > ZERO_MODE_TOL]
    total = float(np.sum(np.sign(ev) * erfc(np.sqrt(t) * np.abs(ev))))
    if include_tail:
        cutoff = 7.0 / np.sqrt(t)
        pos, neg, _ = _tail_values(spec, cutoff)
        total += float(np.sum(erfc(np.sqrt(t) * pos)) - np.sum(erfc(np.sqrt(t) * neg)))
    return total


def _extrapolate(ts: np.ndarray, vals: np.ndarray, degree: int) -> float:
    coef = np.polyfit(ts, vals, degree)
    return float(coef[-1])


def eta_numeric(spec: Spectrum, t_list: Sequence[float] = DEFAULT_T,
                tol: float = 1e-3) -> EtaResult:
    """Heat-smoothed signed count, Richardson-extrapolated to t = 0.

    The error estimate is the spread between the full-degree polynomial
    extrapolant and the one of degree one lower on the smallest t values.
    """
    if spec.window < 10:
        raise ValidationError("eta_numeric needs a spectrum window of at least 10")
    ts = np.sort(np.asarray(list(t_list), dtype=float))
    if len(ts) < 2 or np.any(ts <= 0):
        raise ValidationError("need at least two positive smoothing parameters")
    vals = np.array([smoothed_sum(spec, t) for t in ts])
    hi = _extrapolate(ts, vals, len(ts) - 1)
    lo = _extrapolate(ts[:-1], vals[:-1], len(ts) - 2)
    err = abs(hi - lo)
    _, _, ok = _tail_values(spec, 1.0)
    details = {"t": ts.tolist(), "smoothed": vals.tolist(), "tail_model_ok": ok}
    if err > tol:
        raise ConvergenceError(f"eta extrapolation spread {err:.3g} exceeds {tol:.3g}", err, hi)
    return EtaResult(hi, "regularized-numeric", err, details)


def _canonical(log: sp.BoundaryLog) -> sp.CanonicalParams:
    if log.canonical_params is None:
        raise UnsupportedHolonomyError("closed-form eta needs n = 1 canonical parameters")
    return log.canonical_params


def eta_closed_sl2(log: sp.BoundaryLog, convention: str = "table") -> EtaResult:
    """Closed-form eta for SL(2, R) holonomy with its adapted complex structure.

    ``convention="table"`` returns the published table.  ``"spectral"``
    differs only for lambda = 1, mu != 0, where the eigenvalue -mu/2pi has
    a one-dimensional eigenspace; it gives mu/pi - sign(mu).
    """
    if convention not in ("table", "spectral"):
        raise ValidationError(f"unknown eta convention {convention!r}")
    p = _canonical(log)
    if p.kind == "hyperbolic":
        v = 0.0
    elif p.kind == "elliptic":
        v = 2.0 * (1.0 - p.theta / np.pi)
    elif abs(p.mu) < 1e-12:
        v = 0.0
    elif p.lam > 0:
        if convention == "table":
            v = 2.0 * (-1.0 + p.mu / (2 * np.pi)) if p.mu > 0 else 2.0 * (1.0 + p.mu / (2 * np.pi))
        else:
            v = p.mu / np.pi - np.sign(p.mu)
    else:
        v = -p.mu / np.pi
    return EtaResult(float(v), "closed-form", 0.0, {"convention": convention})


def eta_elliptic_block(angles: Sequence[float]) -> EtaResult:
    """2n - 2 sum(theta_j) / pi for angles in [0, 2 pi)."""
    a = np.asarray(list(angles), dtype=float)
    if np.any(a < 0) or np.any(a >= 2 * np.pi):
        raise ValidationError("angles must lie in [0, 2 pi)")
    return EtaResult(float(2 * len(a) - 2 * np.sum(a) / np.pi), "closed-form", 0.0)


def eta_elliptic_kernel_excluded(angles: Sequence[float]) -> EtaResult:
    """Elliptic block sum with theta = 0 blocks (kernel) contributing nothing."""
    a = [t for t in angles if t > 1e-12]
    v = eta_elliptic_block(a).value if a else 0.0
    return EtaResult(v, "block-sum", 0.0)


def eta(hol: CircleHolonomy, window: float = 40.0, tol: float = 1e-3) -> EtaResult:
    """Best available eta: closed forms for adapted J0, numeric otherwise."""
    if hol.adapted:
        if hol.n == 1 and hol.log.canonical_params is not None:
            return eta_closed_sl2(hol.log, "spectral")
        if hol.log.angles is not None:
            return eta_elliptic_kernel_excluded(hol.log.angles)
    return eta_numeric(enumerate_spectrum(hol, window), tol=tol)


# --------------------------------------------------------------------------
# boundary alpha integral and rho


def boundary_alpha_integral(hol: CircleHolonomy, tol: float = 1e-8,
                            closed: bool = True) -> EtaResult:
    """(1/pi) times the integral of alpha_{W*} along x -> W(J(x)), x in [0, 2 pi].

    W* is the fixed point of L.  With ``closed`` and an adapted J0 the n = 1
    shortcuts are used (zero for hyperbolic and elliptic holonomy, -mu/(pi
    lambda) for parabolic); elliptic holonomy with its commuting J0 gives zero
    in every dimension since the loop is constant.
    """
    p = hol.log.canonical_params
    if closed and hol.adapted:
        if p is not None and p.kind == "parabolic":
            return EtaResult(-p.mu / (np.pi * p.lam), "closed-form")
        if (p is not None and hol.n == 1) or hol.log.angles is not None:
            return EtaResult(0.0, "closed-form")
    wstar = siegel.fixed_point(hol.L)
    w0 = siegel.w_from_J(hol.J0)
    B = hol.log.B

    def integrand(x: float) -> float:
        w = siegel.act(sla.expm(-x * B), w0)
        dw = siegel.infinitesimal_action(-B, w)
        return siegel._alpha_raw(wstar, w, dw)

    val, err = quad(integrand, 0.0, 2 * np.pi, epsabs=tol, epsrel=1e-10, limit=400)
    if err > tol:
        raise ConvergenceError(f"alpha loop quadrature error {err:.3g} exceeds {tol:.3g}", err, val / np.pi)
    return EtaResult(float(val / np.pi), "quadrature", float(err / np.pi))


@dataclass(frozen=True)
class RhoResult:
    value: float
    alpha_terms: list[EtaResult]
    eta_terms: list[EtaResult]

    @property
    def error_estimate(self) -> float:
        return float(sum(t.error_estimate for t in self.alpha_terms + self.eta_terms))


def rho_invariant(boundaries: Sequence[CircleHolonomy], window: float = 40.0,
                  tol: float = 1e-3) -> RhoResult:
    """Sum over boundaries of the alpha-loop term plus eta."""
    alphas = [boundary_alpha_integral(h) for h in boundaries]
    etas = [eta(h, window, tol) for h in boundaries]
    return RhoResult(float(sum(a.value for a in alphas) + sum(e.value for e in etas)), alphas, etas)
