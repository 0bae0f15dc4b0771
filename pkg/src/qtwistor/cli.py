"""Command-line front end: ``qtwistor <command> --scene PATH [flags]``.

Exit codes: 0 when every check passes, 1 when some check fails, 2 on
input errors (unreadable scene, bad expression, wrong dimension).
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .compare import compare_report
from .connect import (check_quaternionic, commutator_residual, connection_report, curvature,
                      extract_sp1_forms, levi_civita, metric_report, ricci_forms, split_curvature)
from .errors import (DimensionError, ExprSyntaxError, NotQuaternionicPair, QTwistorError,
                     SceneError, SingularMetric, UnknownSymbolError)
from .fourdim import asd_report
from .qkt import kernel_search, qkt_candidates, theorem_qkt_check, type_residual
from .quat import oproiu_diagnostics, verify_basis
from .report import CheckReport
from .scene import load_scene
from .twistor import twistor_points, twistor_report

REPORT_SCHEMA = 1
COMMANDS = ("verify-structure", "connection-report", "compare-connections",
            "twistor-check", "asd-check", "qkt-check")
CURVATURE_TOL = 1e-6


def _cmd_verify(scene, args):
    pts = scene.points
    rep = metric_report(scene.metric, pts)
    rep.extend(verify_basis(scene.basis, pts, args.tol))
    if rep.passed:
        diag = [oproiu_diagnostics(scene.basis, p, seed=args.seed) for p in pts]
        rep.add("N1 + N2 + N3 lies in span{J_a X, J_a Y}", "pq", max(d["six"] for d in diag),
                args.tol, pts, eight_vector_span=max(d["eight"] for d in diag))
    rep.info.update(dimension=scene.dimension, quaternionic_dimension=scene.dimension // 4)
    return rep


def _cmd_connection(scene, args):
    conn, H, pts = scene.connection, scene.basis, scene.points
    rep = connection_report(conn, H, pts, args.tol, CURVATURE_TOL)
    if rep.passed:
        p = pts[0]
        Rp, rho = split_curvature(conn, H, p)
        rep.info.update(
            point=p,
            omega=extract_sp1_forms(conn, H, p),
            rho_trace=rho,
            rho_structure_forms=ricci_forms(conn, H, p, "structure-forms"),
            curvature_norm=float(np.linalg.norm(curvature(conn, p))),
            gl_part_norm=float(np.linalg.norm(Rp)),
            split_commutator=commutator_residual(Rp, H.at(p)),
        )
    return rep


def _cmd_compare(scene, args):
    if scene.other_connection is None:
        raise SceneError("other_connection", "compare-connections needs a second connection")
    rep = check_quaternionic(scene.connection, scene.basis, scene.points, args.tol)
    other = check_quaternionic(scene.other_connection, scene.basis, scene.points, args.tol)
    other.checks[0].name = "second connection preserves Q"
    rep.extend(other)
    if not rep.passed:
        return rep
    try:
        rep.extend(compare_report(scene.connection, scene.other_connection, scene.basis,
                                  scene.points, args.tol, seed=args.seed))
    except NotQuaternionicPair as exc:
        rep.add("difference tensor splitting", "split-eq0", float("inf"), args.tol, scene.points,
                error=str(exc))
    return rep


def _cmd_twistor(scene, args):
    return twistor_report(scene.connection, scene.basis, scene.points, args.tol, args.seed,
                          curvature_tol=CURVATURE_TOL)


def _cmd_asd(scene, args):
    return asd_report(scene.metric, scene.points, max(args.tol, CURVATURE_TOL))


def _kernel_checks(scene, args):
    rep = CheckReport()
    p = scene.points[0]
    Js = scene.basis.at(p)
    kernel = kernel_search(Js, scene.metric.at(p))
    worst = max((type_residual(T, Js) for T in kernel), default=float("inf"))
    rep.add("constant 3-forms of the right type exist", "qkt-type", worst, max(args.tol, 1e-10), [p],
            kernel_dimension=len(kernel))
    cands = qkt_candidates(scene.metric, scene.basis, p)
    rep.info["kernel_dimension"] = len(kernel)
    rep.info["candidates_accepted"] = sum(c["accepted"] for c in cands)
    rep.info["candidates_rejected"] = sorted({c["reason"].split(" (")[0] for c in cands
                                              if not c["accepted"]})
    return rep


def _cmd_qkt(scene, args):
    rep = _kernel_checks(scene, args)
    if scene.torsion_form is None:
        rep.info["verdict"] = "no skew-torsion connection in scene"
        return rep
    conn0 = scene.torsion_free_connection or levi_civita(scene.metric)
    zp = twistor_points(scene.points, 1, args.seed)
    rep.extend(theorem_qkt_check(scene.connection, conn0, scene.metric, scene.basis, scene.points,
                                 zp, args.tol))
    return rep


HANDLERS = {
    "verify-structure": _cmd_verify,
    "connection-report": _cmd_connection,
    "compare-connections": _cmd_compare,
    "twistor-check": _cmd_twistor,
    "asd-check": _cmd_asd,
    "qkt-check": _cmd_qkt,
}


def build_parser():
    ap = argparse.ArgumentParser(prog="qtwistor", description="Numerical checks for almost quaternionic "
                                 "structures, quaternionic connections and their twistor spaces.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--scene", required=True, help="scene JSON file or preset name (flat4, flat8, ...)")
    ap.add_argument("--tol", type=float, default=1e-8)
    ap.add_argument("--samples", type=int, default=None,
                    help="number of sampled points (default: the scene's count, else 20)")
    ap.add_argument("--seed", type=int, default=None, help="sampling seed (default: the scene's, else 0)")
    ap.add_argument("--format", choices=("json", "text"), default="json")
    return ap


def run(argv=None, out=None, err=None):
    """Run one command; returns (exit code, report or None)."""
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    args = build_parser().parse_args(argv)
    if args.tol <= 0 or (args.samples is not None and args.samples < 1):
        print("error: --tol must be positive and --samples at least 1", file=err)
        return 2, None
    try:
        scene = load_scene(args.scene, args.samples, args.seed)
        args.seed = 0 if args.seed is None else args.seed
        rep = HANDLERS[args.command](scene, args)
    except (SceneError, ExprSyntaxError, UnknownSymbolError, DimensionError, SingularMetric) as exc:
        print(f"error: {exc}", file=err)
        return 2, None
    except QTwistorError as exc:
        # a precondition the scene does not meet counts as a failed check
        print(f"check failed: {exc}", file=err)
        return 1, CheckReport()
    if args.format == "json":
        doc = {"schema": REPORT_SCHEMA, "command": args.command, "scene": scene.name,
               "flags": {"tol": args.tol, "samples": len(scene.points), "seed": args.seed}}
        doc.update(rep.to_dict())
        out.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    else:
        out.write(f"{args.command} on {scene.name} ({len(scene.points)} points)\n")
        out.write(rep.to_text() + "\n")
    return (0 if rep.passed else 1), rep


def main(argv=None):
    try:
        code, _ = run(argv)
    except SystemExit as exc:  # argparse usage errors
        code = 2 if exc.code not in (0, None) else 0
    return code


if __name__ == "__main__":
    sys.exit(main())
