"""Surface-group representations, triangulations, Toledo invariant and signature.

The fundamental group of a genus ``g`` surface with ``q`` boundary circles
is presented as ``prod [a_i, b_i] * prod c_j = e`` with the commutator
``[a, b] = a b a^-1 b^-1``.  A representation assigns a symplectic matrix
to every generator.

For ``q >= 1`` the surface is cut into a polygon with ``4g + 2q - 2``
corners anchored at fixed points of the boundary holonomies; its fan
triangulation has ``4g + 2q - 4`` triangles.  Closed surfaces use the fan of
the ``4g``-gon spanned by the orbit of a basepoint.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import scipy.linalg as sla

from . import eta as eta_mod
from . import siegel
from . import symplectic as sp
from .errors import (ClassificationError, DimensionError, FixtureError, InconsistencyError,
                     IntegralityError, RelationError, UnsupportedHolonomyError, ValidationError)

RELATION_TOL = 1e-8
H0_TOL = 1e-8
INTEGRALITY_TOL = 1e-2
# global orientation of the fan triangulation, fixed so that the
# thrice-punctured-sphere holonomy generated by [[1,2],[0,1]] and
# [[1,0],[-2,1]] has Toledo invariant +1
ORIENTATION = -1

Word = tuple[tuple[str, int], ...]


@dataclass(frozen=True)
class SurfacePresentation:
    genus: int
    boundary_count: int

    def __post_init__(self):
        if self.genus < 0 or self.boundary_count < 0:
            raise ValidationError("genus and boundary count must be nonnegative")

    @property
    def labels(self) -> list[str]:
        out = []
        for i in range(1, self.genus + 1):
            out += [f"a{i}", f"b{i}"]
        return out + [f"c{j}" for j in range(1, self.boundary_count + 1)]

    @property
    def boundary_labels(self) -> list[str]:
        return [f"c{j}" for j in range(1, self.boundary_count + 1)]

    def relator(self) -> Word:
        w: list[tuple[str, int]] = []
        for i in range(1, self.genus + 1):
            w += [(f"a{i}", 1), (f"b{i}", 1), (f"a{i}", -1), (f"b{i}", -1)]
        w += [(c, 1) for c in self.boundary_labels]
        return tuple(w)

    def commutator_word(self) -> Word:
        return tuple(x for x in self.relator() if not x[0].startswith("c"))


def euler_characteristic(p: SurfacePresentation) -> int:
    return 2 - 2 * p.genus - p.boundary_count


@dataclass(frozen=True)
class SurfaceRepresentation:
    presentation: SurfacePresentation
    images: dict[str, np.ndarray]
    n: int

    def __post_init__(self):
        missing = set(self.presentation.labels) - set(self.images)
        if missing:
            raise ValidationError(f"missing generator images: {sorted(missing)}")
        for k, m in self.images.items():
            if np.shape(m) != (2 * self.n, 2 * self.n):
                raise DimensionError(f"image of {k} has shape {np.shape(m)}, expected {2 * self.n}")

    def word(self, w: Word) -> np.ndarray:
        out = np.eye(2 * self.n)
        for label, e in w:
            m = self.images[label]
            out = out @ (m if e > 0 else sp.symplectic_inverse(m))
        return out

    def boundary(self, j: int) -> np.ndarray:
        return self.images[f"c{j}"]

    def conjugate(self, g: np.ndarray) -> "SurfaceRepresentation":
        gi = np.linalg.inv(g)
        return SurfaceRepresentation(self.presentation,
                                     {k: g @ v @ gi for k, v in self.images.items()}, self.n)


def validate_relation(rep: SurfaceRepresentation) -> float:
    """Sup-norm of the relator image minus the identity."""
    return float(np.max(np.abs(rep.word(rep.presentation.relator()) - np.eye(2 * rep.n))))


def make_representation(genus: int, images: dict[str, np.ndarray], n: Optional[int] = None,
                        check: bool = True) -> SurfaceRepresentation:
    q = sum(1 for k in images if k.startswith("c"))
    if n is None:
        n = sp.half_dim(next(iter(images.values())))
    rep = SurfaceRepresentation(SurfacePresentation(genus, q),
                                {k: np.asarray(v, dtype=float) for k, v in images.items()}, n)
    if check:
        for k, m in rep.images.items():
            if not sp.is_symplectic(m, 1e-8):
                raise ValidationError(f"image of {k} is not symplectic")
        res = validate_relation(rep)
        if res > RELATION_TOL:
            raise RelationError(f"surface relation residual {res:.3g} exceeds {RELATION_TOL}")
    return rep


def random_representation(genus: int, boundary_count: int, n: int, rng: np.random.Generator,
                          scale: float = 0.5) -> SurfaceRepresentation:
    """Random images for all but the last boundary; the last solves the relation."""
    if boundary_count < 1:
        raise ValidationError("random_representation needs at least one boundary")
    p = SurfacePresentation(genus, boundary_count)
    images = {k: sla.expm(sp.random_lie_element(n, rng, scale)) for k in p.labels[:-1]}
    partial = SurfaceRepresentation(p, {**images, p.labels[-1]: np.eye(2 * n)}, n)
    w = partial.word(p.relator()[:-1])
    images[p.labels[-1]] = sp.symplectic_inverse(w)
    return SurfaceRepresentation(p, images, n)


def _haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_unitary_representation(genus: int, boundary_count: int, n: int,
                                  rng: np.random.Generator) -> SurfaceRepresentation:
    p = SurfacePresentation(genus, boundary_count)
    images = {k: sp.unitary_to_symplectic(_haar_unitary(n, rng)) for k in p.labels[:-1]}
    partial = SurfaceRepresentation(p, {**images, p.labels[-1]: np.eye(2 * n)}, n)
    images[p.labels[-1]] = sp.symplectic_inverse(partial.word(p.relator()[:-1]))
    return SurfaceRepresentation(p, images, n)


# --------------------------------------------------------------------------
# triangulation


@dataclass(frozen=True)
class Side:
    label: str          # generator letter, "t_j" for the cut to boundary j, with "^-1" when reversed
    start: int
    end: int
    start_word: Word = ()
    end_word: Word = ()


@dataclass(frozen=True)
class IdealTriangulation:
    corners: list[np.ndarray]
    anchors: list[tuple[Word, str]]       # (group word, anchor point name) per corner
    triangles: list[tuple[int, int, int]]
    sides: list[Side]
    orientation: list[int]

    @property
    def count(self) -> int:
        return len(self.triangles)


def _prefixes(word: Word) -> list[Word]:
    return [word[:k] for k in range(len(word) + 1)]


def _anchor_point(rep: SurfaceRepresentation, j: int) -> np.ndarray:
    try:
        return siegel.fixed_point(rep.boundary(j))
    except UnsupportedHolonomyError as exc:
        raise UnsupportedHolonomyError(f"boundary c{j}: {exc}") from exc


def _letter(label: str, e: int) -> str:
    return label if e > 0 else label + "^-1"


def triangulate(p: SurfacePresentation, rep: SurfaceRepresentation, fan_corner: int = 0,
                basepoint: Optional[np.ndarray] = None) -> IdealTriangulation:
    """Fan triangulation of the cut-open surface.

    ``fan_corner`` selects the apex of the fan; different apices give
    distinct triangulations of the same polygon.
    """
    chi = euler_characteristic(p)
    if chi > 0 or (chi == 0 and p.boundary_count != 2):
        raise ValidationError(f"triangulation needs chi < 0 (or the cylinder), got chi = {chi}")
    for j in range(1, p.boundary_count + 1):
        label = sp.classify(rep.boundary(j)).label_summary
        if rep.n > 1 and label not in ("elliptic", "parabolic"):
            raise UnsupportedHolonomyError(
                f"boundary c{j}: {label} holonomy with n={rep.n} has no implemented anchor")
    comm = p.commutator_word()
    corners: list[np.ndarray] = []
    anchors: list[tuple[Word, str]] = []
    sides: list[Side] = []
    q = p.boundary_count
    if q == 0:
        x0 = np.zeros((rep.n, rep.n), dtype=complex) if basepoint is None else siegel.check_point(basepoint)
        pre = _prefixes(comm)
        for k, w in enumerate(pre[:-1]):
            corners.append(siegel.act(rep.word(w), x0))
            anchors.append((w, "x0"))
            sides.append(Side(_letter(*comm[k]), k, (k + 1) % len(comm), w, pre[k + 1]))
    else:
        xs = {j: _anchor_point(rep, j) for j in range(1, q + 1)}
        pre = _prefixes(comm)
        for k, w in enumerate(pre):
            corners.append(siegel.act(rep.word(w), xs[q]))
            anchors.append((w, f"x{q}"))
            if k < len(comm):
                sides.append(Side(_letter(*comm[k]), k, k + 1, w, pre[k + 1]))
        pi = comm
        for j in range(1, q):
            corners.append(siegel.act(rep.word(pi), xs[j]))
            anchors.append((pi, f"x{j}"))
            sides.append(Side(f"t{j}", len(corners) - 2, len(corners) - 1, pi, pi))
            nxt = pi + ((f"c{j}", 1),)
            corners.append(siegel.act(rep.word(nxt), xs[q]))
            anchors.append((nxt, f"x{q}"))
            sides.append(Side(f"t{j}^-1", len(corners) - 2, len(corners) - 1, pi, nxt))
            pi = nxt
        # the last corner repeats corner 0 (its anchor word differs by c_q)
        corners.pop()
        anchors.pop()
        last = sides[-1]
        sides[-1] = Side(last.label, last.start, 0, last.start_word, last.end_word)
    m = len(corners)
    apex = fan_corner % m if m else 0
    tris = [(apex, (apex + i) % m, (apex + i + 1) % m) for i in range(1, m - 1)]
    return IdealTriangulation(corners, anchors, tris, sides, [ORIENTATION] * len(tris))


def side_pairing_residual(rep: SurfaceRepresentation, tri: IdealTriangulation) -> float:
    """Max distance between paired polygon sides after applying the gluing element.

    A side labelled ``l`` starting at anchor word w is glued to the side
    labelled ``l^-1`` ending at anchor word w' by rho(w') rho(w)^-1, which
    reverses the orientation.
    """
    by_label = {s.label: s for s in tri.sides}
    worst = 0.0
    for s in tri.sides:
        if s.label.endswith("^-1"):
            continue
        partner = by_label.get(s.label + "^-1")
        if partner is None:
            continue
        g = rep.word(partner.end_word) @ sp.symplectic_inverse(rep.word(s.start_word))
        p1, p2 = tri.corners[s.start], tri.corners[s.end]
        q1, q2 = tri.corners[partner.end], tri.corners[partner.start]
        try:
            worst = max(worst, float(np.max(np.abs(siegel.act(g, p1) - q1))),
                        float(np.max(np.abs(siegel.act(g, p2) - q2))))
        except ValidationError:
            continue
    return worst


# --------------------------------------------------------------------------
# invariants


@dataclass(frozen=True)
class ToledoResult:
    value: float
    error_estimate: float
    triangle_values: list[float]


def toledo(rep: SurfaceRepresentation, tri: Optional[IdealTriangulation] = None,
           tol: float = siegel.QUAD_TOL) -> ToledoResult:
    """(1/2 pi) times the signed omega-area of the straightened triangulation.

    Elliptic and hyperbolic boundaries are anchored at fixed points, where
    the boundary alpha correction vanishes; parabolic boundaries are capped
    by the cone to their Shilov fixed point, so the area already is the
    invariant.
    """
    if tri is None:
        tri = triangulate(rep.presentation, rep)
    vals = []
    for (i, j, k), o in zip(tri.triangles, tri.orientation):
        vals.append(o * siegel.triangle_integral(tri.corners[i], tri.corners[j], tri.corners[k], tol))
    return ToledoResult(math.fsum(vals) / (2 * np.pi), len(vals) * tol / (2 * np.pi), vals)


def _fixed_dim(m: np.ndarray, tol: float = H0_TOL) -> int:
    s = np.linalg.svd(m - np.eye(m.shape[0]), compute_uv=False)
    return int(np.sum(s < tol))


def h0_dimensions(rep: SurfaceRepresentation, tol: float = H0_TOL) -> tuple[int, int]:
    """(dim of vectors fixed by every generator, sum of boundary fixed dims)."""
    d = 2 * rep.n
    stack = [rep.images[k] - np.eye(d) for k in rep.presentation.labels]
    if stack:
        s = np.linalg.svd(np.vstack(stack), compute_uv=False)
        h_sigma = int(np.sum(s < tol)) + max(0, d - len(s))
    else:
        h_sigma = d
    h_bdry = sum(_fixed_dim(rep.boundary(j), tol) for j in range(1, rep.presentation.boundary_count + 1))
    return h_sigma, h_bdry


def dim_hat_h1(rep: SurfaceRepresentation, h0: Optional[tuple[int, int]] = None) -> int:
    """-dim E chi - dim H0(boundary) + 2 dim H0(surface)."""
    hs, hb = h0 if h0 is not None else h0_dimensions(rep)
    v = -2 * rep.n * euler_characteristic(rep.presentation) - hb + 2 * hs
    if v < 0:
        raise InconsistencyError(f"relative cohomology dimension came out negative ({v})")
    return v


def boundary_holonomies(rep: SurfaceRepresentation) -> list[eta_mod.CircleHolonomy]:
    out = []
    for j in range(1, rep.presentation.boundary_count + 1):
        try:
            out.append(eta_mod.circle_holonomy(rep.boundary(j)))
        except UnsupportedHolonomyError as exc:
            raise UnsupportedHolonomyError(f"boundary c{j}: {exc}") from exc
    return out


@dataclass(frozen=True)
class Check:
    name: str
    lhs: float
    rhs: float
    holds: bool
    margin: float

    @property
    def equality(self) -> bool:
        return abs(self.margin) < 1e-6


@dataclass(frozen=True)
class MilnorWoodVerdict:
    checks: list[Check]

    @property
    def all_hold(self) -> bool:
        return all(c.holds for c in self.checks)

    def get(self, name: str) -> Optional[Check]:
        for c in self.checks:
            if c.name == name:
                return c
        return None


@dataclass(frozen=True)
class InvariantReport:
    toledo: float
    toledo_error: float
    eta_per_boundary: list[eta_mod.EtaResult]
    alpha_per_boundary: list[eta_mod.EtaResult]
    rho: float
    signature: int
    signature_residual: float
    chi: int
    dim_h0_sigma: int
    dim_h0_boundary: int
    dim_hat_h1: int
    parity_ok: bool
    boundary_labels: list[str]
    boundary_angles: list[Optional[tuple[float, ...]]]
    n: int
    mw_slack: float = 0.0
    modified_mw: Optional[MilnorWoodVerdict] = None


def signature(rep: SurfaceRepresentation, tol: float = siegel.QUAD_TOL,
              window: float = 40.0) -> tuple[int, float]:
    r = compute_invariants(rep, tol=tol, window=window)
    return r.signature, r.signature_residual


def compute_invariants(rep: SurfaceRepresentation, tol: float = siegel.QUAD_TOL,
                       window: float = 40.0, tri: Optional[IdealTriangulation] = None) -> InvariantReport:
    """Toledo, rho, signature = round(2T + rho), cohomology dimensions and Milnor-Wood checks."""
    p = rep.presentation
    chi = euler_characteristic(p)
    hols = boundary_holonomies(rep)
    t = toledo(rep, tri, tol)
    rho = eta_mod.rho_invariant(hols, window)
    s_real = 2 * t.value + rho.value
    sign = int(round(s_real))
    resid = abs(s_real - sign)
    if resid > INTEGRALITY_TOL:
        raise IntegralityError(f"2T + rho = {s_real:.6g} is not close to an integer", resid)
    h0 = h0_dimensions(rep)
    d1 = dim_hat_h1(rep, h0)
    labels = [sp.classify(rep.boundary(j)).label_summary for j in range(1, p.boundary_count + 1)]
    angles = [h.log.angles if lb == "elliptic" else None for h, lb in zip(hols, labels)]
    report = InvariantReport(
        toledo=t.value, toledo_error=t.error_estimate, eta_per_boundary=rho.eta_terms,
        alpha_per_boundary=rho.alpha_terms, rho=rho.value, signature=sign,
        signature_residual=resid, chi=chi, dim_h0_sigma=h0[0], dim_h0_boundary=h0[1],
        dim_hat_h1=d1, parity_ok=(sign - d1) % 2 == 0 and abs(sign) <= d1,
        boundary_labels=labels, boundary_angles=angles, n=rep.n)
    verdict = check_milnor_wood(rep, report)
    return InvariantReport(**{**report.__dict__, "modified_mw": verdict,
                              "mw_slack": verdict.checks[0].margin})


def _psl_angle(theta: float) -> float:
    return theta if theta < np.pi else theta - np.pi


def _le(name: str, lhs: float, rhs: float, slack: float = 1e-6) -> Check:
    return Check(name, float(lhs), float(rhs), bool(lhs <= rhs + slack), float(rhs - lhs))


def check_milnor_wood(rep: SurfaceRepresentation, report: InvariantReport) -> MilnorWoodVerdict:
    """Classical and modified Milnor-Wood bounds evaluated on a report.

    Each check is ``lhs <= rhs``; margins are ``rhs - lhs``.
    """
    n = rep.n
    achi = abs(report.chi)
    T = report.toledo
    checks = [
        _le("signature", abs(report.signature), 2 * n * achi),
        _le("toledo", abs(T), n * achi),
        _le("signature_h1", abs(report.signature), report.dim_hat_h1),
    ]
    labels = report.boundary_labels
    if labels and all(lb == "elliptic" for lb in labels):
        s = sum(1.0 - th / np.pi for a in report.boundary_angles for th in a)
        checks.append(_le("elliptic_lower", -n * achi - s, T))
        checks.append(_le("elliptic_upper", T, n * achi - s))
        if n == 1:
            th = [_psl_angle(a[0]) for a in report.boundary_angles]
            checks.append(_le("TI1_lower", -achi - 1 + sum(t / np.pi for t in th), T))
            checks.append(_le("TI1_upper", T, achi + 1 - sum(1 - t / np.pi for t in th)))
    if n == 1:
        th = [_psl_angle(a[0]) for a, lb in zip(report.boundary_angles, labels) if lb == "elliptic"]
        checks.append(_le("TI0_lower", -achi - 1 + sum(t / np.pi for t in th), T))
        checks.append(_le("TI0_upper", T, achi + 1 - sum(1 - t / np.pi for t in th)))
    if any(_fixed_dim(rep.boundary(j)) > 0 for j in range(1, rep.presentation.boundary_count + 1)):
        checks.append(_le("signature_eigenvalue_one", abs(report.signature), 2 * n * achi - 1))
    return MilnorWoodVerdict(checks)


# --------------------------------------------------------------------------
# fixtures

_FIELD = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*:\s*(.*)$")


def _numbers(text: str, line: int) -> list[float]:
    out = []
    for tok in text.replace(",", " ").split():
        try:
            out.append(float(tok))
        except ValueError:
            raise FixtureError(f"not a number: {tok!r}", line) from None
    return out


def parse_representation(text: str) -> SurfaceRepresentation:
    """Parse the fixture text format.

    Lines ``key: value`` set ``n``, ``genus``, ``boundary_count`` or a
    generator (``a1``, ``b1``, ..., ``c1``, ...) given as 4n^2 row-major
    numbers; lines without a key continue the previous generator.  ``#``
    starts a comment.
    """
    header: dict[str, tuple[int, int]] = {}
    mats: dict[str, tuple[list[float], int]] = {}
    current = None
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _FIELD.match(line)
        if m:
            key, val = m.group(1), m.group(2)
            if key in ("n", "genus", "boundary_count"):
                try:
                    header[key] = (int(val.strip()), no)
                except ValueError:
                    raise FixtureError(f"{key} must be an integer, got {val.strip()!r}", no) from None
                current = None
            elif re.fullmatch(r"[abc][1-9][0-9]*", key):
                if key in mats:
                    raise FixtureError(f"generator {key} given twice", no)
                mats[key] = (_numbers(val, no), no)
                current = key
            else:
                raise FixtureError(f"unknown field {key!r}", no)
        else:
            if current is None:
                raise FixtureError("numbers outside a generator entry", no)
            mats[current][0].extend(_numbers(line, no))
    for key in ("n", "genus", "boundary_count"):
        if key not in header:
            raise FixtureError(f"missing field {key!r}")
    n, g, q = header["n"][0], header["genus"][0], header["boundary_count"][0]
    if n < 1:
        raise FixtureError("n must be positive", header["n"][1])
    pres = SurfacePresentation(g, q)
    images = {}
    for label in pres.labels:
        if label not in mats:
            raise FixtureError(f"missing generator {label}")
        vals, no = mats[label]
        if len(vals) != 4 * n * n:
            raise FixtureError(f"generator {label} has {len(vals)} entries, expected {4 * n * n}", no)
        mat = np.array(vals).reshape(2 * n, 2 * n)
        if not sp.is_symplectic(mat, 1e-8):
            raise FixtureError(f"generator {label} is not symplectic", no)
        images[label] = mat
    extra = set(mats) - set(pres.labels)
    if extra:
        k = sorted(extra)[0]
        raise FixtureError(f"generator {k} does not belong to genus {g} with {q} boundaries", mats[k][1])
    rep = SurfaceRepresentation(pres, images, n)
    res = validate_relation(rep)
    if res > RELATION_TOL:
        raise RelationError(f"surface relation residual {res:.3g} exceeds {RELATION_TOL}")
    return rep


def load_representation(path: str | Path) -> SurfaceRepresentation:
    return parse_representation(Path(path).read_text())


def format_representation(rep: SurfaceRepresentation) -> str:
    lines = [f"n: {rep.n}", f"genus: {rep.presentation.genus}",
             f"boundary_count: {rep.presentation.boundary_count}"]
    for label in rep.presentation.labels:
        m = rep.images[label]
        lines.append(f"{label}: " + " ".join(repr(float(v)) for v in m[0]))
        lines += ["    " + " ".join(repr(float(v)) for v in row) for row in m[1:]]
    return "\n".join(lines) + "\n"


def parse_matrix(text: str) -> np.ndarray:
    """Whitespace separated rows of numbers; ``#`` comments allowed."""
    rows = []
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            rows.append((_numbers(line, no), no))
    if not rows:
        raise FixtureError("matrix file is empty")
    width = len(rows[0][0])
    for vals, no in rows:
        if len(vals) != width:
            raise FixtureError(f"row has {len(vals)} entries, expected {width}", no)
    m = np.array([r for r, _ in rows])
    if m.shape[0] != m.shape[1] or m.shape[0] % 2:
        raise FixtureError(f"expected a square matrix of even size, got {m.shape}")
    return m


def load_matrix(path: str | Path) -> np.ndarray:
    return parse_matrix(Path(path).read_text())
