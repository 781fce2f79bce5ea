"""Command-line reports: identity suites, coefficient algebra, curvature
tables and lattice flows.

Every subcommand prints one JSON document to stdout (keys sorted, so reports
are byte-stable for a fixed seed) and the wall time to stderr.  Exit codes:
0 all checks passed, 1 some check failed or the flow aborted, 2 usage error.
"""

import argparse
import json
import sys
import time

from . import __version__
from .checks import SUITE_TOL, run_suite
from .frames import AbelianField, frame_field, sample_points
from .gauge import CanonicalAbelian, coeffs_from_pqrs, el_residuals_geometric
from .geometry import (
    curvature,
    extract_u2,
    ricci_data,
    solve_levi_civita,
    structure_forms,
)
from .lattice import (
    DegenerateFrameError,
    FlowConfig,
    LatticeState,
    configure_threads,
    descend,
)

MANIFOLD_CHOICES = ("flat", "t4", "s2xr2", "cp2", "random")

# charts where the integrable-Kahler consequences (rho+ = (s/4) omega, the
# metric field equations on the right potential) are expectations rather
# than mere reports
KAHLER_CHARTS = ("flat", "s2xr2", "cp2")


def _emit(report):
    json.dump(report, sys.stdout, sort_keys=True)
    sys.stdout.write("\n")


def cmd_verify(args):
    report = run_suite(args.manifold, seed=args.seed, points=args.points,
                       tol=args.tol if args.tol is not None else SUITE_TOL)
    report["version"] = __version__
    _emit(report)
    return 0 if report["pass"] else 1


def cmd_params(args):
    lam, mu, nu = coeffs_from_pqrs(args.p, args.q, args.r, args.s)
    relation = 3.0 * lam - mu + 4.0 * nu
    report = {
        "p": args.p, "q": args.q, "r": args.r, "s": args.s,
        "lam": lam, "mu": mu, "nu": nu,
        "relation": relation,
        "pass": bool(abs(relation) <= 1e-12),
        "version": __version__,
    }
    if lam == 0.0:
        report["mu_tilde"] = None
        report["nu_tilde"] = None
        report["flag"] = "lam = 0: mu_tilde and nu_tilde are undefined"
    else:
        report["mu_tilde"] = mu / lam
        report["nu_tilde"] = nu / lam
    _emit(report)
    return 0 if report["pass"] else 1


def _curvature_point_row(ff, a_field, x, mu_t, tol, kahler):
    cof = ff.coframe_at(x, 2)
    R = curvature(solve_levi_civita(cof))
    rd = ricci_data(R, cof)
    sf = structure_forms(ff.at(x, 2))
    row = {
        "point": [float(v) for v in x],
        "s": rd.s,
        "torsion_norm": extract_u2(solve_levi_civita(cof)).torsion.max_abs(),
        "j_defect": rd.j_defect,
        "rho_minus_norm": rd.rho_minus.max_abs(),
    }
    rho_plus_defect = (rd.rho_plus - (rd.s / 4.0) * sf.kahler).max_abs()
    row["rho_plus_defect"] = rho_plus_defect
    if kahler:
        row["rho_plus_pass"] = bool(rho_plus_defect <= tol)
    el = el_residuals_geometric(ff, a_field, x, mu_t)
    row["el"] = el
    return row


def cmd_curvature(args):
    ff = frame_field(args.manifold, seed=args.seed)
    if args.manifold == "cp2":
        a_field = CanonicalAbelian(ff)
    else:
        a_field = AbelianField.zero()
    kahler = args.manifold in KAHLER_CHARTS
    tol = args.tol if args.tol is not None else SUITE_TOL
    anchors = {"flat": (0.0, 1e-12), "s2xr2": (2.0, 1e-8), "cp2": (12.0, 1e-6)}

    rows = []
    for x in sample_points(args.manifold, args.points, seed=args.seed):
        rows.append(_curvature_point_row(ff, a_field, x, args.mu_tilde, tol, kahler))

    report = {
        "manifold": args.manifold, "seed": args.seed, "points": args.points,
        "mu_tilde": args.mu_tilde, "tol": tol, "rows": rows,
        "version": __version__,
    }
    passes = [row["rho_plus_pass"] for row in rows if "rho_plus_pass" in row]
    if args.manifold in anchors:
        target, stol = anchors[args.manifold]
        defect = max(abs(row["s"] - target) for row in rows)
        report["scalar_curvature"] = {
            "target": target, "max_defect": defect, "tol": stol,
            "pass": bool(defect <= stol),
        }
        passes.append(report["scalar_curvature"]["pass"])
    # the metric field equations are expectations only where the chart plus
    # potential is known critical: cp2 at any mu_t, flat torus at mu_t = 3
    if args.manifold == "cp2" or (args.manifold == "flat" and args.mu_tilde == 3.0):
        worst = max(
            max(
                row["el"][k] if row["el"][k] is not None else float("inf")
                for k in ("r_ric20", "r_da20", "r_domega", "r_mainfeq")
            )
            for row in rows
        )
        report["el_check"] = {"max_residual": worst, "tol": tol,
                              "pass": bool(worst <= tol)}
        passes.append(report["el_check"]["pass"])
    report["pass"] = all(passes) if passes else True
    _emit(report)
    return 0 if report["pass"] else 1


def cmd_flow(args):
    if args.init == "flat":
        st = LatticeState.flat(args.n)
    else:
        st = LatticeState.perturbed(args.n, seed=args.seed, amplitude=args.amplitude)
    cfg = FlowConfig(
        mu_tilde=args.mu_tilde,
        lambda_overall=args.lam,
        step=args.step,
        max_iters=args.steps,
        grad_tol=args.grad_tol,
    )
    try:
        final, log = descend(st, cfg)
    except DegenerateFrameError as exc:
        _emit({"reason": "degenerate_abort", "detail": str(exc),
               "version": __version__})
        return 1
    log.write_jsonl(args.log)
    if args.csv:
        log.write_csv(args.csv)
    report = {
        "n": args.n, "mu_tilde": args.mu_tilde, "lam": args.lam,
        "init": args.init, "seed": args.seed,
        "iterations": len(log.rows), "reason": log.reason,
        "final_residuals": log.final_residuals,
        "log_path": str(args.log),
        "version": __version__,
    }
    if args.csv:
        report["csv_path"] = str(args.csv)
    _emit(report)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="akgeo",
        description="identity suites, curvature reports and lattice flows "
                    "for the almost-Hermitian functional",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_verify = sub.add_parser("verify", help="run the identity suite on a chart")
    p_verify.add_argument("--manifold", choices=MANIFOLD_CHOICES, default="random")
    p_verify.add_argument("--seed", type=int, default=0)
    p_verify.add_argument("--points", type=int, default=20)
    p_verify.add_argument("--tol", type=float, default=None)
    p_verify.set_defaults(func=cmd_verify)

    p_params = sub.add_parser("params", help="coefficient algebra for (p,q,r,s)")
    p_params.add_argument("p", type=float)
    p_params.add_argument("q", type=float)
    p_params.add_argument("r", type=float)
    p_params.add_argument("s", type=float)
    p_params.set_defaults(func=cmd_params)

    p_curv = sub.add_parser("curvature", help="per-point curvature report")
    p_curv.add_argument("--manifold", choices=MANIFOLD_CHOICES, default="cp2")
    p_curv.add_argument("--seed", type=int, default=0)
    p_curv.add_argument("--points", type=int, default=20)
    p_curv.add_argument("--mu-tilde", type=float, default=3.0)
    p_curv.add_argument("--tol", type=float, default=None)
    p_curv.set_defaults(func=cmd_curvature)

    p_flow = sub.add_parser("flow", help="gradient descent on the periodic grid")
    p_flow.add_argument("--n", type=int, choices=(4, 8, 16), default=4)
    p_flow.add_argument("--mu-tilde", type=float, default=3.0)
    p_flow.add_argument("--lam", type=float, default=1.0)
    p_flow.add_argument("--init", choices=("flat", "perturbed"), default="perturbed")
    p_flow.add_argument("--steps", type=int, default=200)
    p_flow.add_argument("--step", type=float, default=0.01)
    p_flow.add_argument("--grad-tol", type=float, default=1e-8)
    p_flow.add_argument("--seed", type=int, default=0)
    p_flow.add_argument("--amplitude", type=float, default=1e-2)
    p_flow.add_argument("--log", default="flow.jsonl")
    p_flow.add_argument("--csv", default=None)
    p_flow.set_defaults(func=cmd_flow)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    configure_threads()
    start = time.time()
    code = args.func(args)
    print(f"wall {time.time() - start:.2f}s", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
