"""Command-line front end for the ballcomp library.

Reports are JSON documents with a ``schema_version`` field; traces are CSV.
Exit status is 0 when an analysis completes (whatever the verdict), 2 for
parse or configuration errors and 3 for numerical indeterminacy.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass

import numpy as np

from . import boundary, decide, galerkin, kernel, mapspec
from .errors import (
    BallCompError,
    Indeterminate,
    InvalidParams,
    NonConvergent,
    NotSelfMap,
    ParseError,
    QuadratureUnderResolved,
)
from .lfm import adjoint_map, normalize_t_form, unitary_conjugate
from .mapspec import array_to_json, complex_to_json
from .space import SpaceSpec

SCHEMA_VERSION = 1
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


@dataclass
class AnalysisConfig:
    dim: int | None = None
    galerkin: tuple[int, int] | None = None
    curve: str = "gammaM:4"
    tol_self_map: float = boundary.SELF_MAP_TOL
    tol_data: float = boundary.DATA_TOL
    tol_eq: float = 1e-9
    tol_limit: float = 1e-6
    out: str | None = None
    space_text: str = "hardy"

    def resolve_space(self, n: int) -> SpaceSpec:
        if self.dim is not None and self.dim != n:
            raise ParseError(f"--dim {self.dim} does not match map dimension {n}", "config")
        return parse_space(self.space_text, n)


def parse_space(text: str, n: int) -> SpaceSpec:
    if text == "hardy":
        return SpaceSpec.hardy(n)
    if text.startswith("bergman:"):
        try:
            s = float(text.split(":", 1)[1])
            return SpaceSpec.bergman(n, s)
        except ValueError as exc:
            raise ParseError(f"bad --space value {text!r}: {exc}", "config") from None
    raise ParseError(f"--space must be 'hardy' or 'bergman:s', got {text!r}", "config")


def parse_galerkin(text: str) -> tuple[int, int]:
    try:
        D, k = (int(v) for v in text.split(":"))
    except ValueError:
        raise ParseError(f"--galerkin expects D:k, got {text!r}", "config") from None
    if not 0 <= k <= D:
        raise ParseError("--galerkin needs 0 <= k <= D", "config")
    return D, k


def parse_curve(text: str, n: int) -> kernel.CurveFamily:
    name, _, args = text.partition(":")
    try:
        vals = [float(v) for v in args.split(",")] if args else []
    except ValueError:
        raise ParseError(f"bad curve parameters in {text!r}", "config") from None
    if name == "gammaM" and len(vals) == 1:
        return kernel.gamma_M_family(vals[0], n)
    if name == "gamma" and not vals:
        return kernel.gamma_family(n)
    if name == "gammak" and len(vals) in (1, 2):
        fam = kernel.gamma_k_family(int(vals[0]), n)
        if len(vals) == 2:
            r = vals[1]
            if not 0 < r < 1:
                raise InvalidParams(f"r must lie in (0, 1), got {r}")
            fam = kernel.CurveFamily(fam.name, fam.point, math.sqrt(1.0 - r))
        return fam
    if name == "gammakr" and len(vals) == 2:
        return kernel.gamma_kr_family(int(vals[0]), vals[1], n)
    raise ParseError(f"unknown curve {text!r}; use gammaM:M, gamma, gammak:k[,r] or gammakr:k,r", "config")


# ---------------------------------------------------------------------------
# report pieces


def _jc_json(jc: boundary.JCData) -> dict:
    return {
        "zeta": array_to_json(jc.zeta),
        "eta": array_to_json(jc.eta),
        "d": jc.d_val if jc.finite else "inf",
        "d_derivative": jc.d_derivative if math.isfinite(jc.d_derivative) else None,
        "extrapolation_error": jc.extrapolation_error,
    }


def _map_json(phi) -> dict:
    return {"n": phi.n, "A": array_to_json(phi.A), "B": array_to_json(phi.B),
            "C": array_to_json(phi.C), "d": complex_to_json(phi.d)}


def _tform_json(tf) -> dict:
    return {"t": tf.t, "K": complex_to_json(tf.K), "beta": array_to_json(tf.beta),
            "gamma": array_to_json(tf.gamma), "alpha": array_to_json(tf.alpha)}


def _bound_json(r: kernel.BoundReport) -> dict:
    return {
        "kind": "essnorm_lower_bound",
        "bound": r.bound,
        "symmetric_bound": r.symmetric_bound,
        "witness": None if r.witness is None else array_to_json(r.witness),
        "d_at_witness": r.d_at_witness if math.isfinite(r.d_at_witness) else "inf",
        "branch": r.branch,
        "beta_exp": r.space.beta_exp,
    }


def _audit_json(a: decide.TFormAudit) -> dict:
    return {
        "kind": "tform_audit",
        "zeta": array_to_json(a.zeta),
        "eta": array_to_json(a.eta),
        "deltas": a.deltas,
        "differing": a.differing,
        "phi": _tform_json(a.phi_form),
        "psi": _tform_json(a.psi_form),
    }


def _certificate_json(cert) -> dict | None:
    if isinstance(cert, kernel.BoundReport):
        return _bound_json(cert)
    if isinstance(cert, decide.TFormAudit):
        return _audit_json(cert)
    if isinstance(cert, dict):
        return {"kind": "sup_norms", **cert}
    return None


def decision_json(dec: decide.Decision) -> dict:
    return {
        "verdict": dec.verdict.value,
        "compact": dec.compact,
        "witness": None if dec.witness is None else array_to_json(dec.witness),
        "certificate": _certificate_json(dec.certificate),
        "sup_norms": dec.details.get("sup_norms"),
    }


def analyze(phi, cfg: AnalysisConfig) -> dict:
    space = cfg.resolve_space(phi.n)
    sup = boundary.sup_norm(phi, cfg.tol_self_map)
    compact = boundary.is_compact_single(phi, cfg.tol_self_map)
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": "analyze",
        "space": space.label(),
        "beta_exp": space.beta_exp,
        "map": _map_json(phi),
        "sup_norm": sup,
        "compact": compact,
        "contacts": [],
        "continuum": False,
        "adjoint_map": _map_json(adjoint_map(phi)),
        "t_form": None,
    }
    if not compact:
        cs = boundary.contact_points(phi)
        report["continuum"] = cs.continuum
        jcs = [boundary.angular_derivative(phi, z) for z in cs.points]
        report["contacts"] = [_jc_json(jc) for jc in jcs]
        for jc in jcs:
            if jc.finite and np.linalg.norm(jc.eta - jc.zeta) <= 1e-7:
                tf = normalize_t_form(unitary_conjugate(phi, jc.zeta, jc.zeta), decide.AUDIT_TFORM_TOL)
                report["t_form"] = {"zeta": array_to_json(jc.zeta), **_tform_json(tf)}
                break
    return report


def decide_diff(phi, psi, cfg: AnalysisConfig) -> dict:
    if phi.n != psi.n:
        raise ParseError(f"maps have different dimensions ({phi.n} and {psi.n})", "config")
    space = cfg.resolve_space(phi.n)
    for m in (phi, psi):
        boundary.sup_norm(m, cfg.tol_self_map)
    dec = decide.decide_difference(phi, psi, space, cfg.tol_self_map, cfg.tol_eq, cfg.tol_data)
    audit = decide.audit_necessary_conditions(phi, psi, space)
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": "decide-diff",
        "space": space.label(),
        "beta_exp": space.beta_exp,
        "decision": decision_json(dec),
        "audit": {
            "passed": audit.passed,
            "contacts": [
                {"zeta": array_to_json(c.zeta), "source": c.source, "same_data": c.same_data,
                 "d_phi": c.d_phi if math.isfinite(c.d_phi) else "inf",
                 "d_psi": c.d_psi if math.isfinite(c.d_psi) else "inf"}
                for c in audit.contacts
            ],
            "tform": [_audit_json(a) for a in audit.tform],
        },
    }
    if cfg.galerkin is not None:
        D, k = cfg.galerkin
        probes = {str(j): galerkin.tail_norm_probe(phi, psi, space, D, j) for j in range(D + 1)}
        report["galerkin"] = {"D": D, "k": k, "probe": probes[str(k)], "probe_by_k": probes}
    return report


def trace(phi, psi, cfg: AnalysisConfig) -> str:
    if phi.n != psi.n:
        raise ParseError(f"maps have different dimensions ({phi.n} and {psi.n})", "config")
    space = cfg.resolve_space(phi.n)
    family = parse_curve(cfg.curve, phi.n)
    return kernel.write_trace_csv(kernel.curve_trace(phi, psi, family, space))


# ---------------------------------------------------------------------------
# entry point


def _write(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".ballcomp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--space", default="hardy", help="hardy or bergman:s")
    common.add_argument("--dim", type=int, help="expected dimension N (checked against the maps)")
    common.add_argument("--galerkin", metavar="D:k", help="add tail-norm probes with degree cap D and cut k")
    common.add_argument("--curve", default="gammaM:4",
                        help="gammaM:M | gamma | gammak:k[,r] | gammakr:k,r (trace only)")
    common.add_argument("--tol-self-map", type=float, default=boundary.SELF_MAP_TOL)
    common.add_argument("--tol-data", type=float, default=boundary.DATA_TOL)
    common.add_argument("--tol-eq", type=float, default=1e-9)
    common.add_argument("--tol-limit", type=float, default=1e-6)
    common.add_argument("--out", help="output path (written atomically); stdout if omitted")

    parser = argparse.ArgumentParser(prog="ballcomp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("analyze", parents=[common], help="boundary analysis of one map")
    p.add_argument("map")
    p = sub.add_parser("decide-diff", parents=[common], help="compactness of C_phi - C_psi")
    p.add_argument("map_a")
    p.add_argument("map_b")
    p = sub.add_parser("trace", parents=[common], help="CSV ladder along an approach curve")
    p.add_argument("map_a")
    p.add_argument("map_b")
    return parser


def _config(args) -> AnalysisConfig:
    tols = [args.tol_self_map, args.tol_data, args.tol_eq, args.tol_limit]
    if not all(t > 0 for t in tols):
        raise ParseError("tolerances must be positive", "config")
    return AnalysisConfig(
        dim=args.dim,
        galerkin=parse_galerkin(args.galerkin) if args.galerkin else None,
        curve=args.curve,
        tol_self_map=args.tol_self_map,
        tol_data=args.tol_data,
        tol_eq=args.tol_eq,
        tol_limit=args.tol_limit,
        out=args.out,
        space_text=args.space,
    )


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        cfg = _config(args)
        if args.command == "analyze":
            text = json.dumps(analyze(mapspec.load(args.map), cfg), indent=2) + "\n"
        elif args.command == "decide-diff":
            report = decide_diff(mapspec.load(args.map_a), mapspec.load(args.map_b), cfg)
            text = json.dumps(report, indent=2) + "\n"
        else:
            text = trace(mapspec.load(args.map_a), mapspec.load(args.map_b), cfg)
        _write(text, cfg.out)
    except (ParseError, InvalidParams, NotSelfMap, ValueError) as exc:
        print(f"ballcomp: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (Indeterminate, NonConvergent, QuadratureUnderResolved) as exc:
        print(f"ballcomp: indeterminate: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except BallCompError as exc:
        print(f"ballcomp: error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def main() -> None:
    sys.exit(run())
