"""Command line front end.

Exit codes: 0 success, 1 a property scan found a violated bound,
2 invalid input, 3 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from . import eta as eta_mod
from . import siegel
from . import surface
from . import symplectic as sp
from .errors import FixtureError, NumericalError, SympSigError, UnsupportedHolonomyError, ValidationError

SCHEMA_VERSION = 1
EXIT_OK, EXIT_VIOLATION, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 1, 2, 3


@dataclass(frozen=True)
class RunConfig:
    quad_tol: float = 1e-8
    spectrum_window: float = 40.0
    smoothing_params: tuple[float, ...] = eta_mod.DEFAULT_T
    seed: int = 0
    output_format: str = "text"

    def __post_init__(self):
        if not self.quad_tol > 0:
            raise ValidationError("--tol must be positive")
        if not self.spectrum_window >= 10:
            raise ValidationError("--window must be at least 10")
        if self.output_format not in ("json", "csv", "text"):
            raise ValidationError(f"unknown format {self.output_format!r}")


def num(value: float, method: str, error: float = 0.0) -> dict:
    return {"value": float(value), "method": method, "error": float(error)}


def _eta_entry(r: eta_mod.EtaResult) -> dict:
    return num(r.value, r.method, r.error_estimate)


# --------------------------------------------------------------------------
# commands


def cmd_classify(matrix: np.ndarray, config: RunConfig) -> dict:
    res = sp.classify(matrix)
    out: dict[str, Any] = {
        "label": res.label_summary,
        "dimensions": res.dimensions,
        "eigenvalues": [[float(z.real), float(z.imag)] for z in res.eigenvalues],
    }
    if sp.half_dim(matrix) == 1:
        lg = sp.boundary_log_sl2(matrix)
        p = lg.canonical_params
        params = {"epsilon": lg.sign}
        if p.lam is not None:
            params["lambda"] = p.lam
        if p.theta is not None:
            params["theta"] = p.theta
        if p.mu is not None:
            params["mu"] = p.mu
        out["canonical"] = params
        bits = [p.kind] + [f"{sym}={params[k]:.6g}" for k, sym in
                           (("theta", "θ"), ("lambda", "λ"), ("mu", "μ")) if k in params]
        out["summary"] = ", ".join(bits)
    else:
        out["summary"] = res.label_summary
    return out


def cmd_eta(matrix: np.ndarray, config: RunConfig) -> dict:
    hol = eta_mod.circle_holonomy(matrix)
    spec = eta_mod.enumerate_spectrum(hol, config.spectrum_window)
    numeric = eta_mod.eta_numeric(spec, config.smoothing_params)
    alpha = eta_mod.boundary_alpha_integral(hol, config.quad_tol)
    out: dict[str, Any] = {"label": sp.classify(matrix).label_summary}
    if hol.n == 1:
        table = eta_mod.eta_closed_sl2(hol.log, "table")
        spectral = eta_mod.eta_closed_sl2(hol.log, "spectral")
        out["eta_table"] = _eta_entry(table)
        out["eta_spectral"] = _eta_entry(spectral)
        out["rho_table"] = num(alpha.value + table.value, "closed-form")
    else:
        spectral = eta_mod.eta(hol, config.spectrum_window)
        out["eta_spectral"] = _eta_entry(spectral)
    out["eta_numeric"] = num(numeric.value, numeric.method, numeric.error_estimate)
    out["alpha"] = _eta_entry(alpha)
    out["rho"] = num(alpha.value + spectral.value, "closed-form" if alpha.method == "closed-form" else "mixed",
                     alpha.error_estimate)
    out["spectrum_count"] = spec.count
    if spec.warnings:
        out["warnings"] = list(spec.warnings)
    return out


def _report_dict(report: surface.InvariantReport) -> dict:
    mw = report.modified_mw
    return {
        "toledo": num(report.toledo, "quadrature", report.toledo_error),
        "eta_per_boundary": [_eta_entry(e) for e in report.eta_per_boundary],
        "alpha_per_boundary": [_eta_entry(a) for a in report.alpha_per_boundary],
        "rho": num(report.rho, "regularized",
                   sum(t.error_estimate for t in report.eta_per_boundary + report.alpha_per_boundary)),
        "signature": report.signature,
        "signature_residual": num(report.signature_residual, "rounding"),
        "chi": report.chi,
        "dim_h0_sigma": report.dim_h0_sigma,
        "dim_h0_boundary": report.dim_h0_boundary,
        "dim_hat_h1": report.dim_hat_h1,
        "parity_ok": report.parity_ok,
        "boundary_labels": report.boundary_labels,
        "mw_slack": num(report.mw_slack, "evaluation"),
        "milnor_wood": [] if mw is None else [
            {"name": c.name, "lhs": c.lhs, "rhs": c.rhs, "holds": c.holds,
             "margin": c.margin, "equality": c.equality} for c in mw.checks],
    }


def cmd_invariants(rep: surface.SurfaceRepresentation, config: RunConfig) -> dict:
    report = surface.compute_invariants(rep, tol=config.quad_tol, window=config.spectrum_window)
    out = _report_dict(report)
    out["relation_residual"] = num(surface.validate_relation(rep), "evaluation")
    if rep.n > 1 and "parabolic" in report.boundary_labels:
        out["notes"] = ["higher-rank parabolic boundary anchored at its Shilov fixed point"]
    return out


def cmd_curvature_report(n: int, samples: int, config: RunConfig) -> dict:
    if not 1 <= n <= 4:
        raise ValidationError("curvature-report supports 1 <= n <= 4")
    if samples < 1:
        raise ValidationError("--samples must be positive")
    rng = np.random.default_rng(config.seed)
    ks = [siegel.hol_sect_curvature_at_zero(siegel.random_tangent(n, rng)) for _ in range(samples)]
    ident = siegel.hol_sect_curvature_at_zero(np.eye(n))
    out: dict[str, Any] = {
        "n": n,
        "samples": samples,
        "k_min": num(min(ks), "sampling"),
        "k_max": num(max(ks), "sampling"),
        "k_identity": num(ident, "closed-form"),
        "range_ok": bool(min(ks) >= -1 - 1e-9 and max(ks) <= -1.0 / n + 1e-9),
    }
    if n <= 3:
        out["ricci_error"] = num(siegel.ricci_check_at_zero(n), "finite-difference")
    chern = [siegel.chern_form_check(siegel.random_point(n, rng, 0.7), siegel.random_tangent(n, rng))
             for _ in range(5)]
    out["chern_form_error"] = num(max(chern), "finite-difference")
    return out


def cmd_triangle(vertices: Sequence[np.ndarray], config: RunConfig) -> dict:
    x, y, z = vertices
    edge = siegel.triangle_integral(x, y, z, config.quad_tol)
    out = {"n": int(x.shape[0]), "integral": num(edge, "quadrature", 3 * config.quad_tol)}
    if all(siegel.is_interior(v) for v in vertices):
        out["integral_2d"] = num(siegel.triangle_integral_2d(x, y, z), "quadrature")
    out["bound"] = num(x.shape[0] * math.pi, "closed-form")
    return out


def cmd_mw_scan(genus: int, boundaries: int, n: int, count: int, config: RunConfig) -> dict:
    if count < 1:
        raise ValidationError("--count must be positive")
    rng = np.random.default_rng(config.seed)
    tally: dict[str, list[int]] = {}
    skipped = integrality_fail = parity_fail = done = 0
    worst = 0.0
    attempts = 0
    while done < count and attempts < 50 * count:
        attempts += 1
        rep = surface.random_representation(genus, boundaries, n, rng)
        try:
            report = surface.compute_invariants(rep, tol=config.quad_tol, window=config.spectrum_window)
        except UnsupportedHolonomyError:
            skipped += 1
            continue
        except NumericalError:
            integrality_fail += 1
            done += 1
            continue
        done += 1
        worst = max(worst, report.signature_residual)
        parity_fail += not report.parity_ok
        for c in report.modified_mw.checks:
            t = tally.setdefault(c.name, [0, 0])
            t[0] += 1
            t[1] += c.holds
    checks = {k: {"evaluated": v[0], "held": v[1]} for k, v in sorted(tally.items())}
    ok = integrality_fail == 0 and parity_fail == 0 and all(v[0] == v[1] for v in tally.values())
    return {
        "genus": genus, "boundaries": boundaries, "n": n, "seed": config.seed,
        "evaluated": done, "skipped_unsupported": skipped,
        "integrality_failures": integrality_fail, "parity_failures": parity_fail,
        "max_signature_residual": num(worst, "rounding"),
        "checks": checks, "all_hold": ok,
    }


# --------------------------------------------------------------------------
# output


def _flatten(prefix: str, obj: Any, rows: list[tuple[str, Any, str, Any]]) -> None:
    if isinstance(obj, dict) and set(obj) == {"value", "method", "error"}:
        rows.append((prefix, obj["value"], obj["method"], obj["error"]))
    elif isinstance(obj, dict):
        for k, v in obj.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, rows)
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            _flatten(f"{prefix}[{i}]", v, rows)
    else:
        rows.append((prefix, obj, "", ""))


def _fmt(v: Any) -> str:
    if isinstance(v, bool) or not isinstance(v, float):
        return str(v)
    return f"{v + 0.0:.6g}"


def render(payload: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(payload, indent=2) + "\n"
    rows: list[tuple[str, Any, str, Any]] = []
    _flatten("", payload, rows)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["key", "value", "method", "error"])
        w.writerows(rows)
        return buf.getvalue()
    lines = []
    if "summary" in payload:
        lines.append(str(payload["summary"]))
    for key, value, method, err in rows:
        if key == "summary":
            continue
        tail = f"  [{method}, ±{_fmt(err)}]" if method else ""
        lines.append(f"{key}: {_fmt(value)}{tail}")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# parsing


def _parse_vertices(text: str) -> list[np.ndarray]:
    blocks, cur = [], []
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            if cur:
                blocks.append(cur)
                cur = []
            continue
        try:
            cur.append([complex(tok.replace("i", "j")) for tok in line.split()])
        except ValueError:
            raise FixtureError(f"cannot parse complex row {line!r}", no) from None
    if cur:
        blocks.append(cur)
    if len(blocks) != 3:
        raise FixtureError(f"expected three blank-line separated vertex blocks, got {len(blocks)}")
    return [siegel.check_closure_point(np.array(b)) for b in blocks]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=1e-8, help="quadrature tolerance")
    common.add_argument("--window", type=float, default=40.0, help="spectrum window Lambda")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("json", "csv", "text"), default="text")
    common.add_argument("--fixture", type=Path, help="input file")

    p = argparse.ArgumentParser(prog="sympsig", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("classify", parents=[common], help="classify a symplectic matrix")
    sub.add_parser("eta", parents=[common], help="eta and rho of a boundary holonomy")
    sub.add_parser("invariants", parents=[common], help="Toledo, rho, signature of a representation")
    c = sub.add_parser("curvature-report", parents=[common], help="sampled curvature checks")
    c.add_argument("--n", type=int, default=2)
    c.add_argument("--samples", type=int, default=1000)
    t = sub.add_parser("triangle", parents=[common], help="integrate omega over one triangle")
    t.add_argument("--n", type=int, default=1, help="size of the random triangle if no fixture")
    s = sub.add_parser("mw-scan", parents=[common], help="Milnor-Wood checks over random representations")
    s.add_argument("--genus", type=int, default=1)
    s.add_argument("--boundaries", type=int, default=1)
    s.add_argument("--n", type=int, default=1)
    s.add_argument("--count", type=int, default=50)
    return p


def _need_fixture(args) -> Path:
    if args.fixture is None:
        raise ValidationError(f"{args.command} needs --fixture")
    return args.fixture


def run(args: argparse.Namespace) -> tuple[dict, int]:
    config = RunConfig(quad_tol=args.tol, spectrum_window=args.window, seed=args.seed,
                       output_format=args.format)
    code = EXIT_OK
    if args.command == "classify":
        result = cmd_classify(surface.load_matrix(_need_fixture(args)), config)
    elif args.command == "eta":
        result = cmd_eta(surface.load_matrix(_need_fixture(args)), config)
    elif args.command == "invariants":
        result = cmd_invariants(surface.load_representation(_need_fixture(args)), config)
    elif args.command == "curvature-report":
        result = cmd_curvature_report(args.n, args.samples, config)
    elif args.command == "triangle":
        if args.fixture is not None:
            verts = _parse_vertices(args.fixture.read_text())
        else:
            rng = np.random.default_rng(config.seed)
            verts = [siegel.random_point(args.n, rng) for _ in range(3)]
        result = cmd_triangle(verts, config)
    else:
        result = cmd_mw_scan(args.genus, args.boundaries, args.n, args.count, config)
        code = EXIT_OK if result["all_hold"] else EXIT_VIOLATION
    return {"schema_version": SCHEMA_VERSION, "command": args.command, **result}, code


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        payload, code = run(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except SympSigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    sys.stdout.write(render(payload, args.format))
    return code


if __name__ == "__main__":
    sys.exit(main())
